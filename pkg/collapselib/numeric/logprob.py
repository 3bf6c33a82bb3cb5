""" Signed log-domain arithmetic.

Probabilities in the spontaneous localization argument reach magnitudes such as exp(-1e50), far below the smallest
double. Every such quantity is held as a LogValue: a sign and the natural log of the absolute value. Base 10 is only
used when rendering reports.
"""
from __future__ import annotations

import math
import typing

import attr
import numpy as np
from scipy import special

import collapselib
from collapselib import logging


__all__ = ['LogDomainError', 'LogValue', 'log_add', 'log_sub', 'log_sum', 'log_binomial', 'log_erfc',
           'log1mexp', 'ERFC_CROSSOVER']


_logger = logging.get_logger(__name__)

# Above this z the asymptotic expansion of erfc is used
ERFC_CROSSOVER = 26.5

# Signed subtraction keeping fewer than ~8 significant digits is flagged as inexact
_CANCELLATION_LIMIT = -18.0

# math.comb is exact, beyond this size the beta function form is faster and accurate to a few ulp
_EXACT_BINOMIAL_LIMIT = 1024

_LN_SQRT_PI = 0.5 * math.log(math.pi)
_LN_10 = math.log(10.0)


class LogDomainError(collapselib.CollapseLibError, ValueError):
    pass


def _sign_validator(_: typing.Any, __: attr.Attribute, value: int) -> None:
    if value not in (-1, 0, 1):
        raise LogDomainError(f"LogValue sign must be -1, 0 or +1, not {value!r}")


@attr.s(frozen=True, slots=True, eq=True, order=False, repr=False)
class LogValue(object):
    """ Real number stored as (sign, ln|value|). A zero sign means exactly zero, log_mag is then -inf. """

    sign: int = attr.ib(validator=_sign_validator)
    log_mag: float = attr.ib(converter=float, default=-math.inf)

    # Set when the value came out of a subtraction with heavy cancellation, does not take part in equality
    inexact: bool = attr.ib(default=False, eq=False, kw_only=True)

    def __attrs_post_init__(self) -> None:
        if math.isnan(self.log_mag):
            raise LogDomainError('LogValue magnitude cannot be NaN')

        if self.sign == 0 or self.log_mag == -math.inf:
            object.__setattr__(self, 'sign', 0)
            object.__setattr__(self, 'log_mag', -math.inf)
        elif self.log_mag == math.inf:
            raise LogDomainError('LogValue magnitude cannot be infinite')

    @classmethod
    def zero(cls) -> LogValue:
        return cls(0)

    @classmethod
    def one(cls) -> LogValue:
        return cls(1, 0.0)

    @classmethod
    def from_real(cls, value: float) -> LogValue:
        """ Convert an ordinary float.

        :param value: finite real number
        :return: LogValue
        """
        value = float(value)

        if not math.isfinite(value):
            raise LogDomainError(f"Cannot represent {value} as a LogValue")

        if value == 0.0:
            return cls(0)

        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def from_log(cls, log_mag: float, sign: int = 1) -> LogValue:
        """ Wrap a natural log magnitude.

        :param log_mag: ln|value|, -inf for zero
        :param sign: sign of the value
        :return: LogValue
        """
        return cls(sign, log_mag)

    @classmethod
    def from_complement(cls, epsilon: float) -> LogValue:
        """ Represent 1 - epsilon without forming the rounded difference, eg. |α|² = 1 - 1e-9.

        :param epsilon: value in [0, 1]
        :return: LogValue of 1 - epsilon
        """
        if not 0.0 <= epsilon <= 1.0:
            raise LogDomainError(f"Complement argument {epsilon} outside [0, 1]")

        if epsilon == 1.0:
            return cls(0)

        return cls(1, math.log1p(-epsilon))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    @property
    def log10_mag(self) -> typing.Optional[float]:
        """ log10|value|, None for zero. """
        if self.sign == 0:
            return None

        return self.log_mag / _LN_10

    def to_real(self) -> float:
        """ Convert back to float, underflowing to 0.0 (or overflowing to inf) outside the double range. """
        if self.sign == 0:
            return 0.0

        try:
            return self.sign * math.exp(self.log_mag)
        except OverflowError:
            return self.sign * math.inf

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {'sign': self.sign, 'log10_mag': self.log10_mag}

    def complement(self) -> LogValue:
        """ 1 - value for a probability held as a LogValue, computed without cancellation. """
        if self.sign < 0 or self.log_mag > 0.0:
            raise LogDomainError('Complement only defined for probabilities in [0, 1]')

        if self.sign == 0:
            return LogValue.one()

        return LogValue(1, log1mexp(self.log_mag))

    def __neg__(self) -> LogValue:
        return LogValue(-self.sign, self.log_mag, inexact=self.inexact)

    def __abs__(self) -> LogValue:
        return LogValue(abs(self.sign), self.log_mag, inexact=self.inexact)

    def __add__(self, other: typing.Any) -> LogValue:
        return log_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other: typing.Any) -> LogValue:
        return log_sub(self, _coerce(other))

    def __rsub__(self, other: typing.Any) -> LogValue:
        return log_sub(_coerce(other), self)

    def __mul__(self, other: typing.Any) -> LogValue:
        other = _coerce(other)

        return LogValue(self.sign * other.sign, self.log_mag + other.log_mag if self.sign * other.sign else -math.inf,
                        inexact=self.inexact or other.inexact)

    __rmul__ = __mul__

    def __truediv__(self, other: typing.Any) -> LogValue:
        other = _coerce(other)

        if other.sign == 0:
            raise ZeroDivisionError('LogValue division by zero')

        if self.sign == 0:
            return LogValue.zero()

        return LogValue(self.sign * other.sign, self.log_mag - other.log_mag, inexact=self.inexact or other.inexact)

    def __pow__(self, exponent: float) -> LogValue:
        """ Power of a non-negative value, or integer power of a signed value. """
        if self.sign == 0:
            if exponent <= 0:
                raise LogDomainError('Zero raised to a non-positive power')

            return LogValue.zero()

        if self.sign < 0:
            if not float(exponent).is_integer():
                raise LogDomainError('Negative LogValue raised to a non-integer power')

            sign = -1 if int(exponent) % 2 else 1
        else:
            sign = 1

        return LogValue(sign, self.log_mag * exponent, inexact=self.inexact)

    def _key(self) -> typing.Tuple[int, float]:
        # Ordering key, negative values order by decreasing magnitude
        if self.sign == 0:
            return 0, 0.0

        return self.sign, self.sign * self.log_mag

    def __lt__(self, other: LogValue) -> bool:
        return self._key() < _coerce(other)._key()

    def __le__(self, other: LogValue) -> bool:
        return self._key() <= _coerce(other)._key()

    def __gt__(self, other: LogValue) -> bool:
        return self._key() > _coerce(other)._key()

    def __ge__(self, other: LogValue) -> bool:
        return self._key() >= _coerce(other)._key()

    def __repr__(self) -> str:
        if self.sign == 0:
            return 'LogValue(0)'

        return f"LogValue({'-' if self.sign < 0 else '+'}exp({self.log_mag!r}){', inexact' if self.inexact else ''})"

    def __str__(self) -> str:
        if self.sign == 0:
            return '0'

        log10_mag = typing.cast(float, self.log10_mag)

        if abs(log10_mag) < 300:
            return f"{self.to_real():.6g}"

        return f"{'-' if self.sign < 0 else ''}10^({log10_mag:.6g})"


def _coerce(x: typing.Any) -> LogValue:
    if isinstance(x, LogValue):
        return x

    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return LogValue.from_real(x)

    raise TypeError(f"Cannot use {type(x).__name__} as a LogValue")


def log1mexp(x: float) -> float:
    """ ln(1 - exp(x)) for x <= 0, accurate over the whole range.

    :param x: non-positive log magnitude
    :return: ln(1 - e^x), -inf at x = 0
    """
    if x > 0.0:
        raise LogDomainError(f"log1mexp undefined for positive argument {x}")

    if x == 0.0:
        return -math.inf

    if x > -math.log(2.0):
        return math.log(-math.expm1(x))

    return math.log1p(-math.exp(x))


def log_add(a: LogValue, b: LogValue) -> LogValue:
    """ Sum of two LogValues without leaving the log domain.

    :param a: operand
    :param b: operand
    :return: a + b
    """
    if a.sign == 0:
        return b

    if b.sign == 0:
        return a

    if a.sign == b.sign:
        return LogValue(a.sign, float(np.logaddexp(a.log_mag, b.log_mag)), inexact=a.inexact or b.inexact)

    # Opposite signs, magnitude of the larger operand wins
    big, small = (a, b) if a.log_mag >= b.log_mag else (b, a)
    diff = small.log_mag - big.log_mag

    if diff == 0.0:
        return LogValue.zero()

    remainder = log1mexp(diff)
    inexact = big.inexact or small.inexact

    if remainder < _CANCELLATION_LIMIT:
        _logger.warning(f"Precision loss subtracting near-equal values ({big!r}, {small!r})")
        inexact = True

    return LogValue(big.sign, big.log_mag + remainder, inexact=inexact)


def log_sub(a: LogValue, b: LogValue) -> LogValue:
    """ Difference a - b, flagged inexact when most significant digits cancel.

    :param a: minuend
    :param b: subtrahend
    :return: a - b
    """
    return log_add(a, -b)


def log_sum(values: typing.Iterable[LogValue]) -> LogValue:
    """ Sum of many LogValues. Same-sign terms are combined with a single log-sum-exp.

    :param values: iterable of LogValue
    :return: sum
    """
    positive = []
    negative = []
    inexact = False

    for value in values:
        inexact = inexact or value.inexact

        if value.sign > 0:
            positive.append(value.log_mag)
        elif value.sign < 0:
            negative.append(value.log_mag)

    total = LogValue.zero()

    if positive:
        total = LogValue(1, float(special.logsumexp(positive)))

    if negative:
        total = log_add(total, LogValue(-1, float(special.logsumexp(negative))))

    if inexact and not total.inexact:
        total = attr.evolve(total, inexact=True)

    return total


def log_binomial(n: int, k: int) -> LogValue:
    """ ln C(n, k).

    :param n: non-negative integer
    :param k: integer in [0, n]
    :return: LogValue of the binomial coefficient
    """
    if n < 0 or k < 0:
        raise LogDomainError(f"Binomial coefficient undefined for negative arguments (n={n}, k={k})")

    if k > n:
        raise LogDomainError(f"Binomial coefficient requires k <= n (n={n}, k={k})")

    n = int(n)

    # Fold onto the lower half so C(n, k) and C(n, n - k) are computed identically
    k = min(int(k), n - int(k))

    if k == 0:
        return LogValue.one()

    if n <= _EXACT_BINOMIAL_LIMIT:
        return LogValue(1, math.log(math.comb(n, k)))

    return LogValue(1, -math.log(n + 1) - float(special.betaln(n - k + 1, k + 1)))


def _log_erfc_asymptotic(z: float) -> float:
    # ln erfc(z) = -z² - ln(z√π) + ln(1 - 1/(2z²) + 3/(2z²)² - 15/(2z²)³ + ...)
    inv = 1.0 / (2.0 * z * z)
    term = 1.0
    tail = 0.0

    for m in range(1, 30):
        next_term = -term * (2 * m - 1) * inv

        if abs(next_term) >= abs(term):
            # Series is asymptotic, stop at the smallest term
            break

        term = next_term
        tail += term

        if abs(term) < 1e-17:
            break

    return -z * z - math.log(z) - _LN_SQRT_PI + math.log1p(tail)


def log_erfc(z: float) -> LogValue:
    """ Natural log of the complementary error function, valid far beyond the underflow of erfc itself.

    Below ERFC_CROSSOVER the scaled function erfcx is used (ln erfc = ln erfcx - z²), above it the asymptotic
    expansion. Negative arguments use erfc(-z) = 2 - erfc(z) = 1 + erf(z).

    :param z: real argument
    :return: LogValue of erfc(z)
    """
    z = float(z)

    if math.isnan(z):
        raise LogDomainError('log_erfc of NaN')

    if z == math.inf:
        return LogValue.zero()

    if z < 0.0:
        return LogValue(1, math.log1p(float(special.erf(-z))))

    if z <= ERFC_CROSSOVER:
        return LogValue(1, math.log(float(special.erfcx(z))) - z * z)

    return LogValue(1, _log_erfc_asymptotic(z))

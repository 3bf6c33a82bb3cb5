""" Marble states and n-marble product states.

A marble is a two-level superposition of being inside or outside the box. Its larger squared amplitude |α|² sits on
the dominant region and the small one |β|² on the other region. Product states are stored run-length encoded as
groups of identical consecutive marbles, so a homogeneous state of 10¹⁰ marbles, or one with a few marbles flipped out
of the box, costs O(groups) to hold and evaluate. Marble indices are 0-based.
"""
from __future__ import annotations

import enum
import itertools
import math
import typing

import attr
import numpy as np

import collapselib
from collapselib import logging
from collapselib.numeric.logprob import LogValue, log_binomial, log_sum


__all__ = ['StateDomainError', 'Region', 'MarbleState', 'ProductState', 'TermPattern', 'make_marble',
           'term_log_coefficient', 'outcome_count_distribution', 'outcome_count_pmf', 'flip_marble', 'expand_terms',
           'EXPANSION_LIMIT']


_logger = logging.get_logger(__name__)

# Largest heterogeneous state that may be expanded term by term
EXPANSION_LIMIT = 20


class StateDomainError(collapselib.CollapseLibError, ValueError):
    pass


class Region(enum.Enum):
    IN = 'in'
    OUT = 'out'

    @property
    def other(self) -> Region:
        return Region.OUT if self is Region.IN else Region.IN


def _probability_validator(_: typing.Any, attribute: attr.Attribute, value: LogValue) -> None:
    if value.sign < 0 or value.log_mag > 1e-12:
        raise StateDomainError(f"{attribute.name} must be a probability, got {value!r}")


@attr.s(frozen=True, slots=True)
class MarbleState(object):
    # |α|², the weight of the dominant region
    log_alpha_sq: LogValue = attr.ib(validator=_probability_validator)

    # |β|², the weight of the other region
    log_beta_sq: LogValue = attr.ib(validator=_probability_validator)

    # Region carrying |α|², IN is the state α|in> + β|out>
    dominant_region: Region = attr.ib(default=Region.IN)

    def __attrs_post_init__(self) -> None:
        total = self.log_alpha_sq + self.log_beta_sq

        if abs(total.log_mag) > 1e-12:
            raise StateDomainError(f"Marble state not normalized (|α|² + |β|² = {total.to_real()!r})")

        if self.log_beta_sq > self.log_alpha_sq:
            raise StateDomainError('Marble state requires |α|² >= |β|²')

    @property
    def balanced(self) -> bool:
        """ True when |α|² = |β|², neither region dominates. """
        return self.log_alpha_sq == self.log_beta_sq

    def log_weight(self, region: Region) -> LogValue:
        """ Squared amplitude associated with a region.

        :param region: IN or OUT
        :return: LogValue probability
        """
        return self.log_alpha_sq if region is self.dominant_region else self.log_beta_sq

    @property
    def log_in(self) -> LogValue:
        return self.log_weight(Region.IN)

    @property
    def log_out(self) -> LogValue:
        return self.log_weight(Region.OUT)

    def flipped(self) -> MarbleState:
        """ Exchange the roles of α and β, eg. α|in> + β|out> becomes β|in> + α|out>. """
        return attr.evolve(self, dominant_region=self.dominant_region.other)


def make_marble(alpha_sq: typing.Union[None, float, LogValue] = None, *, epsilon: typing.Optional[float] = None,
                region: Region = Region.IN) -> MarbleState:
    """ Construct a normalized marble with probability alpha_sq of being in `region`.

    Nearly all interesting marbles have |α|² within 1e-9 of one, so the (1 - ε) form is supported directly: pass
    epsilon instead of alpha_sq and |β|² = ε is kept exactly. Values below 0.5 place the dominant amplitude in the
    other region.

    :param alpha_sq: probability as a float or LogValue, in (0, 1]
    :param epsilon: alternatively 1 - alpha_sq, in [0, 1)
    :param region: region that alpha_sq refers to
    :return: MarbleState
    """
    if (alpha_sq is None) == (epsilon is None):
        raise StateDomainError('Specify exactly one of alpha_sq or epsilon')

    if epsilon is not None:
        epsilon = float(epsilon)

        if not 0.0 <= epsilon < 1.0:
            raise StateDomainError(f"epsilon {epsilon} outside [0, 1)")

        log_a = LogValue.from_complement(epsilon)
        log_b = LogValue.from_real(epsilon)
    elif isinstance(alpha_sq, LogValue):
        if alpha_sq.sign <= 0 or alpha_sq.log_mag > 0.0:
            raise StateDomainError(f"alpha_sq {alpha_sq!r} outside (0, 1]")

        log_a = alpha_sq
        log_b = alpha_sq.complement()
    else:
        alpha_sq = float(typing.cast(float, alpha_sq))

        if not 0.0 < alpha_sq <= 1.0:
            raise StateDomainError(f"alpha_sq {alpha_sq} outside (0, 1]")

        log_a = LogValue.from_real(alpha_sq)

        # 1 - alpha_sq is exact in floating point for alpha_sq >= 0.5
        log_b = LogValue.from_real(1.0 - alpha_sq) if alpha_sq >= 0.5 else LogValue(1, math.log1p(-alpha_sq))

    if log_b > log_a:
        log_a, log_b = log_b, log_a
        region = region.other

    marble = MarbleState(log_a, log_b, region)

    if marble.balanced:
        _logger.warning('Balanced marble (|α|² = |β|²), neither region dominates')

    return marble


def _groups_converter(groups: typing.Iterable[typing.Tuple[MarbleState, int]]) \
        -> typing.Tuple[typing.Tuple[MarbleState, int], ...]:
    merged: typing.List[typing.Tuple[MarbleState, int]] = []

    for marble, count in groups:
        count = int(count)

        if count < 0:
            raise StateDomainError('Group count cannot be negative')

        if count == 0:
            continue

        if merged and merged[-1][0] == marble:
            merged[-1] = (marble, merged[-1][1] + count)
        else:
            merged.append((marble, count))

    return tuple(merged)


@attr.s(frozen=True, slots=True)
class ProductState(object):
    """ Product of n non-interacting marble states, stored as runs of identical marbles in marble order. """

    groups: typing.Tuple[typing.Tuple[MarbleState, int], ...] = attr.ib(converter=_groups_converter)

    def __attrs_post_init__(self) -> None:
        if not self.groups:
            raise StateDomainError('Product state requires at least one marble')

    @classmethod
    def homogeneous(cls, marble: MarbleState, n: int) -> ProductState:
        """ n identical marbles.

        :param marble: single marble state
        :param n: number of marbles, >= 1
        :return: ProductState
        """
        if n < 1:
            raise StateDomainError(f"Product state requires n >= 1, got {n}")

        return cls(((marble, n),))

    @classmethod
    def from_groups(cls, groups: typing.Iterable[typing.Tuple[MarbleState, int]]) -> ProductState:
        """ Runs of (marble, count), adjacent runs of the same marble are merged. """
        return cls(tuple(groups))

    @classmethod
    def from_marbles(cls, marbles: typing.Iterable[MarbleState]) -> ProductState:
        return cls(((marble, 1) for marble in marbles))

    @property
    def n(self) -> int:
        return sum(count for _, count in self.groups)

    @property
    def is_homogeneous(self) -> bool:
        return len(self.groups) == 1

    @property
    def marbles(self) -> typing.List[MarbleState]:
        """ Explicit marble list, only available for states small enough to expand. """
        n = self.n

        if n > 10 ** 6:
            raise StateDomainError(f"Refusing to expand {n} marbles into a list")

        return [marble for marble, count in self.groups for _ in range(count)]

    def marble(self, index: int) -> MarbleState:
        """ Marble at a 0-based index. """
        group, _ = self._locate(index)

        return self.groups[group][0]

    def group_ranges(self) -> typing.Iterator[typing.Tuple[MarbleState, int, int]]:
        """ Iterate over (marble, first index, count) runs. """
        start = 0

        for marble, count in self.groups:
            yield marble, start, count
            start += count

    def _locate(self, index: int) -> typing.Tuple[int, int]:
        if not 0 <= index < self.n:
            raise StateDomainError(f"Marble index {index} out of range for {self.n} marbles")

        start = 0

        for group, (_, count) in enumerate(self.groups):
            if index < start + count:
                return group, index - start

            start += count

        raise AssertionError('unreachable')


@attr.s(frozen=True, slots=True)
class TermPattern(object):
    """ One term of the expanded product state: which marbles are IN, all others OUT.

    Stored as a set of listed indices together with the region they are declared in, so patterns like "all IN" stay
    cheap for huge n.
    """

    n: int = attr.ib()
    listed: typing.FrozenSet[int] = attr.ib(converter=frozenset, factory=frozenset)
    listed_region: Region = attr.ib(default=Region.IN)

    def __attrs_post_init__(self) -> None:
        if self.n < 1:
            raise StateDomainError('Pattern requires n >= 1')

        if any(not 0 <= i < self.n for i in self.listed):
            raise StateDomainError(f"Pattern indices must lie in [0, {self.n})")

    @classmethod
    def from_in_set(cls, n: int, in_set: typing.Iterable[int]) -> TermPattern:
        return cls(n, frozenset(in_set), Region.IN)

    @classmethod
    def all_in(cls, n: int) -> TermPattern:
        return cls(n, frozenset(), Region.OUT)

    @classmethod
    def all_out(cls, n: int) -> TermPattern:
        return cls(n, frozenset(), Region.IN)

    @classmethod
    def dominant(cls, state: ProductState) -> TermPattern:
        """ Pattern placing every marble in its own dominant region. """
        out_indices = [
            index
            for marble, start, count in state.group_ranges() if marble.dominant_region is Region.OUT
            for index in range(start, start + count)
        ]

        return cls(state.n, frozenset(out_indices), Region.OUT)

    def region_of(self, index: int) -> Region:
        return self.listed_region if index in self.listed else self.listed_region.other

    def count_in_range(self, start: int, count: int) -> int:
        """ Number of listed indices in [start, start + count). """
        return sum(1 for i in self.listed if start <= i < start + count)


def term_log_coefficient(state: ProductState, pattern: TermPattern) -> LogValue:
    """ Squared magnitude of the coefficient of one term in the expansion of the product state.

    :param state: product state
    :param pattern: term selector with the same n
    :return: Σ_{IN} ln|in weight| + Σ_{OUT} ln|out weight| as a LogValue
    """
    if pattern.n != state.n:
        raise StateDomainError(f"Pattern for {pattern.n} marbles applied to {state.n} marbles")

    total = LogValue.one()

    for marble, start, count in state.group_ranges():
        listed = pattern.count_in_range(start, count)
        listed_weight = marble.log_weight(pattern.listed_region)
        other_weight = marble.log_weight(pattern.listed_region.other)

        if listed:
            total = total * listed_weight ** listed

        if count - listed:
            total = total * other_weight ** (count - listed)

    return total


def _log_array(value: LogValue) -> float:
    return value.log_mag if value.sign else -math.inf


def _group_count_log_pmf(marble: MarbleState, count: int, limit: int) -> np.ndarray:
    # ln P(j of `count` identical marbles IN) for j = 0..min(count, limit)
    log_in = _log_array(marble.log_in)
    log_out = _log_array(marble.log_out)
    top = min(count, limit)

    pmf = np.full(top + 1, -math.inf)

    for j in range(top + 1):
        if (j and log_in == -math.inf) or (count - j and log_out == -math.inf):
            continue

        pmf[j] = log_binomial(count, j).log_mag + (j * log_in if j else 0.0) + \
            ((count - j) * log_out if count - j else 0.0)

    return pmf


def _count_log_pmf(state: ProductState, limit: int) -> np.ndarray:
    # Dynamic programming over marble groups, truncated at `limit` marbles IN
    dp = np.array([0.0])

    for marble, count in state.groups:
        if count == 1:
            log_in = _log_array(marble.log_in)
            log_out = _log_array(marble.log_out)

            new = np.full(min(len(dp) + 1, limit + 1), -math.inf)
            new[:len(dp)] = dp[:len(new)] + log_out
            new[1:] = np.logaddexp(new[1:], dp[:len(new) - 1] + log_in)
        else:
            group = _group_count_log_pmf(marble, count, limit)
            size = min(len(dp) + len(group) - 1, limit + 1)
            new = np.full(size, -math.inf)

            for j, log_j in enumerate(group):
                if log_j == -math.inf or j >= size:
                    continue

                span = min(len(dp), size - j)
                new[j:j + span] = np.logaddexp(new[j:j + span], dp[:span] + log_j)

        dp = new

    return dp


def outcome_count_distribution(state: ProductState, k: int) -> LogValue:
    """ Probability that exactly k marbles are found IN.

    Homogeneous states use C(n,k)|in|^{2k}|out|^{2(n-k)} directly, other states a dynamic programme over marble groups
    (O(n·k) for distinct marbles).

    :param state: product state
    :param k: number of marbles IN, 0 <= k <= n
    :return: LogValue probability
    """
    n = state.n

    if not 0 <= k <= n:
        raise StateDomainError(f"Count {k} out of range [0, {n}]")

    if state.is_homogeneous:
        marble = state.groups[0][0]

        if k and marble.log_in.is_zero or n - k and marble.log_out.is_zero:
            return LogValue.zero()

        total = log_binomial(n, k)

        # Skip empty powers, 0⁰ is not defined for LogValue
        if k:
            total = total * marble.log_in ** k

        if n - k:
            total = total * marble.log_out ** (n - k)

        return total

    dp = _count_log_pmf(state, k)

    return LogValue.from_log(float(dp[k])) if k < len(dp) else LogValue.zero()


def outcome_count_pmf(state: ProductState) -> typing.List[LogValue]:
    """ Full distribution of the number of marbles IN, k = 0..n, from a single dynamic programming pass.

    :param state: product state, n small enough for an explicit list
    :return: list of n + 1 LogValue probabilities
    """
    n = state.n

    if n > 10 ** 6:
        raise StateDomainError(f"Refusing to tabulate the count distribution of {n} marbles")

    if state.is_homogeneous:
        return [outcome_count_distribution(state, k) for k in range(n + 1)]

    dp = _count_log_pmf(state, n)

    return [LogValue.from_log(float(x)) for x in dp]


def flip_marble(state: ProductState, index: int) -> ProductState:
    """ Exchange α and β of one marble, all other marbles untouched.

    :param state: product state
    :param index: 0-based marble index
    :return: new ProductState
    """
    group, offset = state._locate(index)
    marble, count = state.groups[group]

    split = [(marble, offset), (marble.flipped(), 1), (marble, count - offset - 1)]

    return ProductState(state.groups[:group] + tuple(split) + state.groups[group + 1:])


def expand_terms(state: ProductState) -> typing.Iterator[typing.Tuple[TermPattern, LogValue]]:
    """ Explicit expansion of the product state into its 2ⁿ terms, used as a brute-force oracle.

    :param state: product state with n <= EXPANSION_LIMIT
    :return: iterator of (pattern, squared coefficient)
    """
    n = state.n

    if n > EXPANSION_LIMIT:
        raise StateDomainError(f"Explicit expansion limited to {EXPANSION_LIMIT} marbles, got {n}")

    marbles = state.marbles

    for regions in itertools.product((Region.IN, Region.OUT), repeat=n):
        in_set = frozenset(i for i, region in enumerate(regions) if region is Region.IN)
        weight = LogValue.one()

        for marble, region in zip(marbles, regions):
            weight = weight * marble.log_weight(region)

        yield TermPattern.from_in_set(n, in_set), weight


def total_log_weight(terms: typing.Iterable[typing.Tuple[TermPattern, LogValue]]) -> LogValue:
    """ Sum of squared coefficients over a collection of terms. """
    return log_sum(weight for _, weight in terms)

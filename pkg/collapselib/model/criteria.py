""" Criteria deciding where marbles are and how many of them are in the box.

Verdicts compare a squared amplitude proportion, in the log domain, against 1 - p. A claim is ASSERTED when the
proportion is at least 1 - p, DENIED when it is at most p, and INDETERMINATE in between. The counting anomaly is every
single marble claim ASSERTED while the collective claim on all n marbles is DENIED.
"""
from __future__ import annotations

import enum
import math
import typing

import attr

import collapselib
from collapselib import logging
from collapselib.data import unit
from collapselib.numeric.logprob import LogValue, log_sum
from collapselib.model.state_algebra import MarbleState, ProductState, Region, TermPattern, term_log_coefficient


__all__ = ['CriteriaError', 'NoFiniteThreshold', 'Criterion', 'VerdictStatus', 'Claim', 'CriterionVerdict',
           'AccessibilityReport', 'EnumerationReport', 'scalar_product_proximity', 'posr_verdict',
           'fuzzy_link_verdict', 'anomaly_threshold', 'mass_accessibility', 'enumeration_report',
           'DEFAULT_EPSILON']


_logger = logging.get_logger(__name__)

# Accessibility cutoff standing in for R² <<< 1
DEFAULT_EPSILON = 1e-6


class CriteriaError(collapselib.CollapseLibError, ValueError):
    pass


class NoFiniteThreshold(CriteriaError):
    pass


class Criterion(enum.Enum):
    SCALAR_PRODUCT = 'scalar_product'
    POSR_FUZZY_LINK = 'posr_fuzzy_link'
    MASS_ACCESSIBILITY = 'mass_accessibility'


class VerdictStatus(enum.Enum):
    ASSERTED = 'asserted'
    INDETERMINATE = 'indeterminate'
    DENIED = 'denied'


@attr.s(frozen=True)
class Claim(object):
    # Region claimed for the marbles concerned, None for a collective claim mixing regions
    region: typing.Optional[Region] = attr.ib()

    # Number of marbles covered by the claim
    n: int = attr.ib(default=1)

    # 0-based index of the marble for single marble claims
    index: typing.Optional[int] = attr.ib(default=None, kw_only=True)

    # Collective claim over the whole product state
    collective: bool = attr.ib(default=False, kw_only=True)

    def __str__(self) -> str:
        if self.collective:
            if self.region is None:
                return f"all {self.n} marbles in their dominant regions"

            return f"all {self.n} marbles {self.region.value}"

        subject = 'marble' if self.index is None else f"marble {self.index}"

        return f"{subject} {typing.cast(Region, self.region).value}"

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            'region': None if self.region is None else self.region.value,
            'n': self.n,
            'index': self.index,
            'collective': self.collective,
            'text': str(self)
        }


@attr.s(frozen=True)
class CriterionVerdict(object):
    criterion: Criterion = attr.ib()
    claim: Claim = attr.ib()
    status: VerdictStatus = attr.ib()

    # Squared amplitude proportion of the claim
    score: LogValue = attr.ib()

    # ln(1 - p)
    threshold: LogValue = attr.ib()

    @property
    def holds(self) -> bool:
        return self.status is VerdictStatus.ASSERTED

    @property
    def denied(self) -> bool:
        return self.status is VerdictStatus.DENIED

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            'criterion': self.criterion.value,
            'claim': self.claim.to_json(),
            'holds': self.holds,
            'status': self.status.value,
            'score': self.score.to_json(),
            'threshold': self.threshold.to_json()
        }


def _check_p(p: float) -> typing.Tuple[LogValue, LogValue]:
    if not 0.0 < p < 0.5:
        raise CriteriaError(f"p must lie in (0, 0.5), got {p}")

    return LogValue.from_complement(p), LogValue.from_real(p)


def _verdict(criterion: Criterion, claim: Claim, score: LogValue, p: float) -> CriterionVerdict:
    threshold, denial = _check_p(p)

    if score >= threshold:
        status = VerdictStatus.ASSERTED
    elif score <= denial:
        status = VerdictStatus.DENIED
    else:
        status = VerdictStatus.INDETERMINATE

    return CriterionVerdict(criterion, claim, status, score, threshold)


def scalar_product_proximity(state: ProductState) -> LogValue:
    """ Squared overlap of the product state with the all IN state, Σᵢ ln|in weight|² (n·ln|α|² when homogeneous).

    :param state: product state
    :return: LogValue, published without a verdict threshold
    """
    return term_log_coefficient(state, TermPattern.all_in(state.n))


def posr_verdict(marble: MarbleState, region: Region, p: float, index: typing.Optional[int] = None) \
        -> CriterionVerdict:
    """ Is the marble in `region`? Holds when the squared amplitude there is at least 1 - p.

    :param marble: marble state
    :param region: claimed region
    :param p: tolerance in (0, 0.5)
    :param index: optional marble index, only used to label the claim
    :return: CriterionVerdict
    """
    return _verdict(Criterion.POSR_FUZZY_LINK, Claim(region, index=index), marble.log_weight(region), p)


def fuzzy_link_verdict(state: ProductState, pattern: TermPattern, p: float) -> CriterionVerdict:
    """ Collective claim that every marble is in the region the pattern assigns it. The proportion of squared amplitude
    carried by that single term is compared against 1 - p.

    :param state: product state
    :param pattern: term assigning a region to each marble
    :param p: tolerance in (0, 0.5)
    :return: CriterionVerdict
    """
    _check_p(p)

    if pattern.n == 1:
        return posr_verdict(state.marble(0), pattern.region_of(0), p, index=0)

    if not pattern.listed:
        region: typing.Optional[Region] = pattern.listed_region.other
    elif len(pattern.listed) == pattern.n:
        region = pattern.listed_region
    else:
        region = None

    claim = Claim(region, pattern.n, collective=True)

    return _verdict(Criterion.POSR_FUZZY_LINK, claim, term_log_coefficient(state, pattern), p)


def anomaly_threshold(alpha_sq: typing.Union[float, LogValue], p: float) -> int:
    """ Smallest n for which |α|²ⁿ <= p, ie. where the collective all IN claim is denied.

    The candidate ceil(ln p / ln|α|²) is corrected by evaluating n·ln|α|² exactly the way the collective verdict does.

    :param alpha_sq: in region probability, float or LogValue, in (0, 1)
    :param p: tolerance in (0, 0.5)
    :return: n* >= 1
    """
    _check_p(p)

    log_alpha_sq = alpha_sq if isinstance(alpha_sq, LogValue) else LogValue.from_real(alpha_sq)

    if log_alpha_sq.sign <= 0 or log_alpha_sq.log_mag > 0.0:
        raise CriteriaError(f"alpha_sq {alpha_sq!r} outside (0, 1)")

    if log_alpha_sq.log_mag == 0.0:
        raise NoFiniteThreshold('|α|² = 1, the collective claim is never denied')

    log_a = log_alpha_sq.log_mag
    log_p = LogValue.from_real(p).log_mag

    n = max(1, math.ceil(log_p / log_a))

    # Floating point rounding can leave the candidate one off in either direction
    while n > 1 and (n - 1) * log_a <= log_p:
        n -= 1

    while n * log_a > log_p:
        n += 1

    return n


@attr.s(frozen=True)
class AccessibilityReport(object):
    region: Region = attr.ib()

    # Expected number of marble masses found in the region
    mean_mass: LogValue = attr.ib()

    variance: LogValue = attr.ib()

    # variance / mean², None when no mass is expected
    ratio_sq: typing.Optional[LogValue] = attr.ib()

    accessible: bool = attr.ib()

    epsilon: float = attr.ib(kw_only=True)

    # Region expects no mass, accessibility is vacuous
    vacuous: bool = attr.ib(default=False, kw_only=True)

    def expected_mass(self, marble_mass: float) -> str:
        """ Expected mass in the region rendered in grams. """
        return unit.format_quantity(self.mean_mass.to_real() * marble_mass, unit.GRAM)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            'region': self.region.value,
            'mean_mass': self.mean_mass.to_json(),
            'variance': self.variance.to_json(),
            'ratio_sq': None if self.ratio_sq is None else self.ratio_sq.to_json(),
            'accessible': self.accessible,
            'vacuous': self.vacuous,
            'epsilon': self.epsilon
        }


def mass_accessibility(state: ProductState, region: Region, epsilon: float = DEFAULT_EPSILON) -> AccessibilityReport:
    """ Accessibility of the coarse grained mass in a region.

    Each marble carries unit mass and lands in `region` with its squared amplitude there, independently of the other
    marbles. The mass in the region then has mean Σpᵢ and variance Σpᵢqᵢ, and is accessible when
    R² = variance/mean² < epsilon.

    :param state: product state
    :param region: IN or OUT of the box
    :param epsilon: accessibility cutoff, > 0
    :return: AccessibilityReport
    """
    if not epsilon > 0:
        raise CriteriaError('Accessibility cutoff must be positive')

    means = []
    variances = []

    for marble, count in state.groups:
        weight = LogValue.from_real(count) * marble.log_weight(region)
        means.append(weight)
        variances.append(weight * marble.log_weight(region.other))

    mean = log_sum(means)
    variance = log_sum(variances)

    if mean.is_zero:
        _logger.debug(f"No mass expected {region.value}, accessibility is vacuous")

        return AccessibilityReport(region, mean, variance, None, False, epsilon=epsilon, vacuous=True)

    ratio_sq = variance / mean ** 2

    return AccessibilityReport(region, mean, variance, ratio_sq, ratio_sq < LogValue.from_real(epsilon),
                               epsilon=epsilon)


@attr.s(frozen=True)
class EnumerationReport(object):
    n: int = attr.ib()
    p: float = attr.ib()
    epsilon: float = attr.ib()

    # (first index, count, verdict) for each run of identical marbles
    per_marble: typing.Tuple[typing.Tuple[int, int, CriterionVerdict], ...] = attr.ib()

    all_in_fuzzy: CriterionVerdict = attr.ib()

    # None for heterogeneous states or when no finite threshold exists
    anomaly_threshold: typing.Optional[int] = attr.ib()

    scalar_product_log: LogValue = attr.ib()
    accessibility_in: AccessibilityReport = attr.ib()
    accessibility_out: AccessibilityReport = attr.ib()

    @property
    def anomaly_exhibited(self) -> bool:
        return all(verdict.holds for _, _, verdict in self.per_marble) and self.all_in_fuzzy.denied

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            'n': self.n,
            'p': self.p,
            'epsilon': self.epsilon,
            'per_marble': [
                {'first': first, 'count': count, **verdict.to_json()} for first, count, verdict in self.per_marble
            ],
            'all_in_fuzzy': self.all_in_fuzzy.to_json(),
            'anomaly_threshold': self.anomaly_threshold,
            'scalar_product_log': self.scalar_product_log.to_json(),
            'accessibility_in': self.accessibility_in.to_json(),
            'accessibility_out': self.accessibility_out.to_json(),
            'expected_in_mass': self.accessibility_in.mean_mass.to_json(),
            'anomaly_exhibited': self.anomaly_exhibited
        }


def enumeration_report(state: ProductState, p: float, epsilon: float = DEFAULT_EPSILON) -> EnumerationReport:
    """ Single marble PosR verdicts, the collective fuzzy link verdict and the mass accessibility of both regions, side
    by side.

    Each marble is claimed to be in its dominant region, the collective claim is the corresponding term (all IN for a
    state without flipped marbles).

    :param state: product state
    :param p: tolerance in (0, 0.5)
    :param epsilon: accessibility cutoff
    :return: EnumerationReport
    """
    per_marble = tuple(
        (first, count, posr_verdict(marble, marble.dominant_region, p, index=first if count == 1 else None))
        for marble, first, count in state.group_ranges()
    )

    collective = fuzzy_link_verdict(state, TermPattern.dominant(state), p)

    threshold: typing.Optional[int] = None

    if state.is_homogeneous:
        try:
            threshold = anomaly_threshold(state.groups[0][0].log_alpha_sq, p)
        except NoFiniteThreshold:
            _logger.debug('No finite anomaly threshold for pure marbles')

    return EnumerationReport(
        state.n,
        p,
        epsilon,
        per_marble,
        collective,
        threshold,
        scalar_product_proximity(state),
        mass_accessibility(state, Region.IN, epsilon),
        mass_accessibility(state, Region.OUT, epsilon)
    )

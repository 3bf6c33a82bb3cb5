""" Monte Carlo simulation of counting marbles with apparatuses.

Each marble i is correlated with its own apparatus M_i, a global apparatus M measures the count observable O (n + 1
eigenvalues). Collapse picks an O eigenvalue k, a further cascade picks one configuration with exactly k marbles and k
apparatuses IN, and finally the M pointer resolves, with a small tail probability |δ|² of pointing at a reading other
than k.
"""
from __future__ import annotations

import enum
import fractions
import itertools
import math
import typing

import attr
import numpy as np
from joblib import Parallel, delayed

import collapselib
from collapselib import logging
from collapselib.logging.classes import Logged
from collapselib.numeric.logprob import LogValue
from collapselib.model.state_algebra import (EXPANSION_LIMIT, ProductState, Region, TermPattern, expand_terms,
                                             make_marble, outcome_count_distribution, outcome_count_pmf)
from collapselib.util import iterate, random


__all__ = ['ChainError', 'FlipMode', 'Ordering', 'ChainParams', 'ChainOutcome', 'CorrelatedChain', 'PointerTails',
           'EigenspaceState', 'ChainSummary', 'OutcomeEnumeration', 'ChainRunner', 'correlate',
           'apply_pointer_tails', 'measure_O', 'cascade_collapse', 'resolve_pointer_with_tails',
           'mismatch_probability', 'enumerate_outcomes', 'run_chain']


_logger = logging.get_logger(__name__)

# Largest n for which the collapsed configuration is materialized as an explicit set of marbles
SUBSET_LIMIT = 10 ** 4

# Largest n for which a k histogram with n + 1 bins is kept
HISTOGRAM_LIMIT = 10 ** 6

# Largest n accepted by the exact outcome enumeration
ENUMERATION_LIMIT = 8


class ChainError(collapselib.CollapseLibError, ValueError):
    pass


class FlipMode(enum.Enum):
    """ Where a mis-resolved M pointer ends up. """
    UNIFORM = 'uniform'
    ADJACENT = 'adjacent'


class Ordering(enum.Enum):
    """ SEQUENTIAL collapses onto an O eigenspace first and then cascades, SIMULTANEOUS collapses the whole
    configuration at once. """
    SEQUENTIAL = 'sequential'
    SIMULTANEOUS = 'simultaneous'


def _alpha_sq_validator(_: typing.Any, attribute: attr.Attribute, value: float) -> None:
    if not 0.0 < value <= 1.0:
        raise ChainError(f"{attribute.name} must lie in (0, 1], got {value}")


def _gamma_sq_validator(_: typing.Any, attribute: attr.Attribute, value: float) -> None:
    if not 0.5 < value <= 1.0:
        raise ChainError(f"{attribute.name} must lie in (0.5, 1], got {value}")


def _seed_validator(_: typing.Any, attribute: attr.Attribute, value: int) -> None:
    if not 0 <= value < 2 ** 64:
        raise ChainError(f"{attribute.name} must be an unsigned 64-bit integer, got {value}")


def _optional_tuple(x: typing.Optional[typing.Iterable[float]]) -> typing.Optional[typing.Tuple[float, ...]]:
    return None if x is None else tuple(float(v) for v in x)


@attr.s(frozen=True)
class ChainParams(object):
    n: int = attr.ib(converter=int)

    # In box probability shared by all marbles
    alpha_sq: float = attr.ib(converter=float, validator=_alpha_sq_validator)

    # Pointer fidelity |γ|², the tail weight is |δ|² = 1 - |γ|²
    gamma_sq: float = attr.ib(default=1.0, converter=float, validator=_gamma_sq_validator)

    seed: int = attr.ib(default=0, converter=int, validator=_seed_validator)

    flip_mode: FlipMode = attr.ib(default=FlipMode.UNIFORM, converter=FlipMode, kw_only=True)
    ordering: Ordering = attr.ib(default=Ordering.SEQUENTIAL, converter=Ordering, kw_only=True)

    # Individual in box probabilities for heterogeneous marbles, overrides alpha_sq
    alpha_sq_each: typing.Optional[typing.Tuple[float, ...]] = attr.ib(default=None, converter=_optional_tuple,
                                                                        kw_only=True)

    def __attrs_post_init__(self) -> None:
        if self.n < 1:
            raise ChainError('Chain requires at least one marble')

        if self.alpha_sq_each is not None:
            if len(self.alpha_sq_each) != self.n:
                raise ChainError(f"Expected {self.n} marble probabilities, got {len(self.alpha_sq_each)}")

            if self.n > EXPANSION_LIMIT:
                raise ChainError(f"Heterogeneous chains are limited to {EXPANSION_LIMIT} marbles")

            if any(not 0.0 < a <= 1.0 for a in self.alpha_sq_each):
                raise ChainError('Marble probabilities must lie in (0, 1]')

    @property
    def delta_sq(self) -> float:
        return 1.0 - self.gamma_sq

    def state(self) -> ProductState:
        """ Product state of the marbles before any apparatus is involved. """
        if self.alpha_sq_each is None:
            return ProductState.homogeneous(make_marble(self.alpha_sq), self.n)

        return ProductState.from_marbles(make_marble(a) for a in self.alpha_sq_each)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            'n': self.n,
            'alpha_sq': self.alpha_sq,
            'gamma_sq': self.gamma_sq,
            'seed': self.seed,
            'flip_mode': self.flip_mode.value,
            'ordering': self.ordering.value,
            'alpha_sq_each': None if self.alpha_sq_each is None else list(self.alpha_sq_each)
        }


@attr.s(frozen=True, slots=True)
class ChainOutcome(object):
    n: int = attr.ib()

    # Marbles collapsed to |in>
    k_marbles_in: int = attr.ib()

    # Apparatuses M_i reading IN after the cascade
    k_apparatus_in: int = attr.ib()

    # Reading of the M pointer
    o_reading: int = attr.ib()

    # Explicit marbles found IN, only for n <= SUBSET_LIMIT
    in_set: typing.Optional[typing.FrozenSet[int]] = attr.ib(default=None, kw_only=True)

    # Pointer resolved onto its tail
    tail_flip: bool = attr.ib(default=False, kw_only=True)

    def __attrs_post_init__(self) -> None:
        for name in ('k_marbles_in', 'k_apparatus_in', 'o_reading'):
            if not 0 <= getattr(self, name) <= self.n:
                raise ChainError(f"{name} outside [0, {self.n}]")

    @property
    def consistent(self) -> bool:
        return self.k_marbles_in == self.k_apparatus_in == self.o_reading


@attr.s(frozen=True)
class CorrelatedChain(object):
    """ Marbles perfectly correlated with their apparatuses, |in>|IN> and |out>|OUT>. The amplitudes are those of the
    marble product state. """

    state: ProductState = attr.ib()

    # Probabilities of k = 0..n marbles IN, only for heterogeneous states
    count_pmf: typing.Optional[np.ndarray] = attr.ib(default=None, eq=False)

    # Suffix table, log P(j IN among marbles i..n-1), only for heterogeneous states
    log_suffix: typing.Optional[np.ndarray] = attr.ib(default=None, eq=False)

    @property
    def n(self) -> int:
        return self.state.n

    @property
    def in_probability(self) -> float:
        """ In box probability shared by all marbles of a homogeneous chain. """
        return self.state.groups[0][0].log_in.to_real()

    def outcome_log_probability(self, k: int) -> LogValue:
        return outcome_count_distribution(self.state, k)

    def joint_terms(self) -> typing.Iterator[typing.Tuple[TermPattern, TermPattern, LogValue]]:
        """ Expansion into marble ⊗ apparatus terms, apparatus pattern equal to the marble pattern in every term. """
        for pattern, weight in expand_terms(self.state):
            yield pattern, pattern, weight


def correlate(state: ProductState) -> CorrelatedChain:
    """ Correlate every marble with its apparatus.

    :param state: product state, any n when homogeneous, at most EXPANSION_LIMIT marbles otherwise
    :return: CorrelatedChain
    """
    if state.is_homogeneous:
        return CorrelatedChain(state)

    n = state.n

    if n > EXPANSION_LIMIT:
        raise ChainError(f"Heterogeneous chains are limited to {EXPANSION_LIMIT} marbles")

    pmf = np.array([v.to_real() for v in outcome_count_pmf(state)])
    pmf /= pmf.sum()

    # Suffix count distributions for exact conditional sampling inside an eigenspace
    marbles = state.marbles
    suffix = np.full((n + 1, n + 1), -math.inf)
    suffix[n, 0] = 0.0

    for i in range(n - 1, -1, -1):
        log_in = marbles[i].log_in.log_mag
        log_out = marbles[i].log_out.log_mag
        suffix[i, :] = suffix[i + 1, :] + log_out
        suffix[i, 1:] = np.logaddexp(suffix[i, 1:], suffix[i + 1, :-1] + log_in)

    return CorrelatedChain(state, pmf, suffix)


@attr.s(frozen=True)
class PointerTails(object):
    gamma_sq: float = attr.ib(converter=float, validator=_gamma_sq_validator)

    @property
    def log_gamma_sq(self) -> LogValue:
        return LogValue.from_real(self.gamma_sq)

    @property
    def log_delta_sq(self) -> LogValue:
        # Exact in floating point since gamma_sq > 0.5
        return LogValue.from_real(1.0 - self.gamma_sq)

    @property
    def flip_probability(self) -> float:
        return 1.0 - self.gamma_sq


def apply_pointer_tails(gamma_sq: float) -> PointerTails:
    """ Tail model of every macroscopic pointer, |ĨN> = γ|IN> + δ|OUT>. """
    return PointerTails(gamma_sq)


@attr.s(frozen=True)
class EigenspaceState(object):
    """ Projection of the correlated chain onto the O = k eigenspace: precisely k marbles IN, each configuration
    weighted by its coefficient. """

    chain: CorrelatedChain = attr.ib()
    k: int = attr.ib()

    # Probability of having landed in this eigenspace
    log_weight: LogValue = attr.ib()


def measure_O(chain: CorrelatedChain, rng: np.random.Generator) -> typing.Tuple[int, EigenspaceState]:
    """ Measure the count observable, collapsing onto one of its n + 1 eigenspaces.

    :param chain: correlated chain
    :param rng: random generator
    :return: (k, post measurement state)
    """
    if chain.count_pmf is None:
        k = int(rng.binomial(chain.n, chain.in_probability))
    else:
        k = int(rng.choice(chain.n + 1, p=chain.count_pmf))

    return k, EigenspaceState(chain, k, chain.outcome_log_probability(k))


def _conditional_subset(chain: CorrelatedChain, k: int, rng: np.random.Generator) -> typing.FrozenSet[int]:
    # Walk the marbles, including each with its probability conditioned on the number still required
    suffix = typing.cast(np.ndarray, chain.log_suffix)
    marbles = chain.state.marbles
    chosen = []
    remaining = k

    for i, marble in enumerate(marbles):
        if remaining == 0:
            break

        log_p = marble.log_in.log_mag + suffix[i + 1, remaining - 1] - suffix[i, remaining]

        if rng.random() < math.exp(min(0.0, log_p)):
            chosen.append(i)
            remaining -= 1

    return frozenset(chosen)


def cascade_collapse(eigenstate: EigenspaceState, rng: np.random.Generator) -> ChainOutcome:
    """ Collapse the eigenspace superposition onto one configuration with exactly k marbles, and k apparatuses, IN.

    For homogeneous chains every k-subset is equally likely, otherwise subsets are drawn with their exact conditional
    weights.

    :param eigenstate: state after measuring O
    :param rng: random generator
    :return: ChainOutcome before the M pointer resolves
    """
    chain = eigenstate.chain
    n = chain.n
    k = eigenstate.k

    in_set: typing.Optional[typing.FrozenSet[int]] = None

    if chain.log_suffix is not None:
        in_set = _conditional_subset(chain, k, rng)
    elif n <= SUBSET_LIMIT:
        in_set = frozenset(int(i) for i in rng.choice(n, size=k, replace=False))

    return ChainOutcome(n, k, k, k, in_set=in_set)


def _simultaneous_collapse(chain: CorrelatedChain, rng: np.random.Generator) -> ChainOutcome:
    # Every marble and its apparatus collapse independently, the count is read off afterwards
    n = chain.n

    if chain.count_pmf is not None:
        probabilities = np.array([marble.log_in.to_real() for marble in chain.state.marbles])
    elif n <= SUBSET_LIMIT:
        probabilities = np.full(n, chain.in_probability)
    else:
        k = int(rng.binomial(n, chain.in_probability))

        return ChainOutcome(n, k, k, k)

    indicators = rng.random(n) < probabilities
    in_set = frozenset(int(i) for i in np.flatnonzero(indicators))
    k = len(in_set)

    return ChainOutcome(n, k, k, k, in_set=in_set)


def resolve_pointer_with_tails(outcome: ChainOutcome, tails: typing.Union[float, PointerTails],
                               rng: np.random.Generator, flip_mode: FlipMode = FlipMode.UNIFORM) -> ChainOutcome:
    """ Resolve the M pointer. With probability |δ|² it points at a reading other than the marble count.

    :param outcome: outcome of the cascade
    :param tails: pointer tail model or |γ|²
    :param rng: random generator
    :param flip_mode: UNIFORM picks one of the n other readings, ADJACENT a neighbouring reading
    :return: ChainOutcome with the final pointer reading
    """
    if not isinstance(tails, PointerTails):
        tails = apply_pointer_tails(tails)

    if rng.random() >= tails.flip_probability:
        return attr.evolve(outcome, o_reading=outcome.k_marbles_in, tail_flip=False)

    n = outcome.n
    k = outcome.k_marbles_in

    if flip_mode is FlipMode.UNIFORM:
        reading = int(rng.integers(n))

        if reading >= k:
            reading += 1
    elif k == 0:
        reading = 1
    elif k == n:
        reading = n - 1
    else:
        reading = k + (1 if rng.random() < 0.5 else -1)

    return attr.evolve(outcome, o_reading=reading, tail_flip=True)


def mismatch_probability(params: ChainParams) -> LogValue:
    """ Probability that the M pointer disagrees with the collapsed marble count, |δ|² whatever k is. """
    return PointerTails(params.gamma_sq).log_delta_sq


@attr.s(frozen=True)
class OutcomeEnumeration(object):
    # Exact probabilities as fractions of the float parameters
    total: fractions.Fraction = attr.ib()
    mismatch: fractions.Fraction = attr.ib()
    count_pmf: typing.Tuple[fractions.Fraction, ...] = attr.ib()
    apparatus_disagreement: fractions.Fraction = attr.ib()


def enumerate_outcomes(params: ChainParams) -> OutcomeEnumeration:
    """ Exact enumeration over every (k, subset, pointer reading) outcome, in rational arithmetic.

    :param params: chain parameters with n <= ENUMERATION_LIMIT
    :return: OutcomeEnumeration
    """
    n = params.n

    if n > ENUMERATION_LIMIT:
        raise ChainError(f"Exact enumeration limited to {ENUMERATION_LIMIT} marbles")

    alphas = [fractions.Fraction(a) for a in (params.alpha_sq_each or (params.alpha_sq,) * n)]
    gamma_sq = fractions.Fraction(params.gamma_sq)
    delta_sq = 1 - gamma_sq

    total = fractions.Fraction(0)
    mismatch = fractions.Fraction(0)
    pmf = [fractions.Fraction(0)] * (n + 1)

    for regions in itertools.product((Region.IN, Region.OUT), repeat=n):
        weight = fractions.Fraction(1)

        for a, region in zip(alphas, regions):
            weight *= a if region is Region.IN else 1 - a

        k = sum(1 for region in regions if region is Region.IN)
        pmf[k] += weight

        # Pointer readings: k with |γ|², the tail weight spread over the other readings
        if params.flip_mode is FlipMode.UNIFORM or k in (0, n):
            others = [(r, delta_sq / n) for r in range(n + 1) if r != k] if params.flip_mode is FlipMode.UNIFORM \
                else [(1 if k == 0 else n - 1, delta_sq)]
        else:
            others = [(k - 1, delta_sq / 2), (k + 1, delta_sq / 2)]

        total += weight * gamma_sq

        for _, p_reading in others:
            total += weight * p_reading
            mismatch += weight * p_reading

    # The cascade always leaves marble and apparatus counts equal
    return OutcomeEnumeration(total, mismatch, tuple(pmf), fractions.Fraction(0))


@attr.s(frozen=True)
class ChainSummary(object):
    params: ChainParams = attr.ib()
    trials: int = attr.ib()
    k_histogram: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    reading_histogram: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    consistent: int = attr.ib()
    tail_flips: int = attr.ib()

    # Trials where the marble count and the apparatus count differ
    apparatus_disagreements: int = attr.ib()

    @property
    def consistency_rate(self) -> float:
        return self.consistent / self.trials

    @property
    def mismatch_rate(self) -> float:
        return 1.0 - self.consistency_rate

    @property
    def untraced_inconsistencies(self) -> int:
        """ Inconsistent trials not explained by a pointer tail. """
        return self.trials - self.consistent - self.tail_flips

    def to_json(self) -> typing.Dict[str, typing.Any]:
        mismatch = mismatch_probability(self.params)

        return {
            'k_histogram': [int(x) for x in self.k_histogram],
            'reading_histogram': [int(x) for x in self.reading_histogram],
            'trials': self.trials,
            'consistency_rate': self.consistency_rate,
            'empirical_mismatch_rate': self.mismatch_rate,
            'mismatch_log10': mismatch.log10_mag,
            'mismatch': mismatch.to_json(),
            'tail_flips': self.tail_flips,
            'apparatus_disagreements': self.apparatus_disagreements,
            'untraced_inconsistencies': self.untraced_inconsistencies,
            'params': self.params.to_json()
        }


class ChainRunner(Logged):
    """ Runs the counting protocol trial by trial. Trial i draws from substream (seed, i) and only counts are aggregated,
    so summaries depend neither on the number of workers nor on the chunk size. """

    def __init__(self, params: ChainParams, chunk_size: int = 4096):
        super().__init__()

        if params.n > HISTOGRAM_LIMIT:
            raise ChainError(f"Chain runs are limited to {HISTOGRAM_LIMIT} marbles")

        self.params = params
        self.chunk_size = chunk_size
        self.chain = correlate(params.state())
        self.tails = apply_pointer_tails(params.gamma_sq)

    def trial(self, rng: np.random.Generator, index: typing.Optional[int] = None) -> ChainOutcome:
        """ One pass through correlation, O measurement, cascade and pointer resolution. """
        if self.params.ordering is Ordering.SEQUENTIAL:
            _, eigenstate = measure_O(self.chain, rng)
            outcome = cascade_collapse(eigenstate, rng)
        else:
            outcome = _simultaneous_collapse(self.chain, rng)

        outcome = resolve_pointer_with_tails(outcome, self.tails, rng, self.params.flip_mode)

        if self.logger().isEnabledFor(logging.EVENT):
            self.logger().event(f"k = {outcome.k_marbles_in}, reading = {outcome.o_reading}", seed=self.params.seed,
                                trial=index)

        return outcome

    def run_chunk(self, start: int, count: int) -> typing.Tuple[np.ndarray, np.ndarray, int, int, int]:
        n = self.params.n

        k_histogram = np.zeros(n + 1, dtype=np.int64)
        reading_histogram = np.zeros(n + 1, dtype=np.int64)
        consistent = tail_flips = disagreements = 0

        for index in range(start, start + count):
            outcome = self.trial(random.substream(self.params.seed, index), index)

            k_histogram[outcome.k_marbles_in] += 1
            reading_histogram[outcome.o_reading] += 1
            consistent += outcome.consistent
            tail_flips += outcome.tail_flip
            disagreements += outcome.k_marbles_in != outcome.k_apparatus_in

        return k_histogram, reading_histogram, consistent, tail_flips, disagreements

    def run(self, trials: int, n_jobs: int = 1) -> ChainSummary:
        if trials < 1:
            raise ChainError('At least one trial is required')

        with self.timed(f"{trials} chain trials", logging.INFO):
            chunks = Parallel(n_jobs=n_jobs)(
                delayed(self.run_chunk)(start, count)
                for _, start, count in iterate.iterate_chunk(trials, self.chunk_size)
            )

        k_histogram = sum(c[0] for c in chunks)
        reading_histogram = sum(c[1] for c in chunks)

        summary = ChainSummary(
            self.params,
            trials,
            typing.cast(np.ndarray, k_histogram),
            typing.cast(np.ndarray, reading_histogram),
            sum(c[2] for c in chunks),
            sum(c[3] for c in chunks),
            sum(c[4] for c in chunks)
        )

        if summary.apparatus_disagreements:
            raise ChainError('Marble and apparatus counts disagree after the cascade')

        self.logger().info(f"Consistency rate {summary.consistency_rate:.6g} over {trials} trials",
                           seed=self.params.seed)

        return summary


def run_chain(params: ChainParams, trials: int, n_jobs: int = 1, chunk_size: int = 4096) -> ChainSummary:
    """ Run the counting protocol `trials` times.

    :param params: chain parameters, including the master seed
    :param trials: number of trials, >= 1
    :param n_jobs: joblib worker count
    :param chunk_size: trials per joblib task
    :return: ChainSummary
    """
    return ChainRunner(params, chunk_size).run(trials, n_jobs)

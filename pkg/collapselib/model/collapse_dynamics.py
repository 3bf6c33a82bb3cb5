""" Single marble centre-of-mass dynamics under spontaneous localization.

Everything here is in CGS: positions in cm, precisions in cm⁻², times in s, masses in g and ħ in erg·s. The wavefunction
is a 1D Gaussian exp(-b(x - μ)²/2) described by its mean μ and precision b, a hit at x₀ multiplies it by
exp(-α(x - x₀)²/2) and renormalizes.
"""
from __future__ import annotations

import enum
import math
import typing

import attr
import numpy as np
from joblib import Parallel, delayed
from scipy import integrate, optimize

import collapselib
from collapselib import logging
from collapselib.data import unit
from collapselib.logging.classes import Logged
from collapselib.numeric.logprob import LogValue, log_erfc
from collapselib.util import iterate, random


__all__ = ['DynamicsError', 'Mode', 'SpreadConvention', 'GrwParams', 'GaussianWavepacket', 'TrajectoryRecord',
           'EnsembleResult', 'TrajectorySimulator', 'amplified_rate', 'apply_hit', 'sample_hit_center',
           'sample_hit_times', 'variance_after_hits', 'schrodinger_spread_rate', 'shrink_rate', 'regime_time',
           'regime_time_numeric', 'equilibrium_width', 'forced_displacement', 'tail_hit_log_probability',
           'displacement_log_bound', 'far_hit_log_rate', 'marbles_for_certain_far_hit', 'simulate_trajectory',
           'run_ensemble', 'equilibrium_summary', 'TRAJECTORY_CSV_HEADER']


_logger = logging.get_logger(__name__)

TRAJECTORY_CSV_HEADER = ('t_s', 'hits', 'mean_cm', 'variance_cm2')

# Forced displacement is only meaningful while the wavefunction is much narrower than the hit
_NARROW_RATIO = 10.0

# Quoted orders of magnitude, carried into the equilibrium report next to the computed values
_QUOTED = {
    'regime_time_s': 1e5,
    'equilibrium_width_cm': 1e-11,
    'typical_precision_cm-2': 1e22,
    'hits_per_day': 1e12,
    'light_day_shift_cm': 1e2,
    'tail_log_mag_light_day': -1e50,
    'tail_log_mag_10cm': -1e22,
    'one_day_bound_log_mag': -1e34
}


class DynamicsError(collapselib.CollapseLibError, ValueError):
    pass


class Mode(enum.Enum):
    HITS = 'hits'
    HITS_SPREAD = 'hits+spread'

    @classmethod
    def _missing_(cls, value: object) -> typing.Optional['Mode']:
        # Long form of the hits only mode
        if isinstance(value, str) and value.strip().lower().replace('_', '-') == 'hits-only':
            return cls.HITS

        return None


class SpreadConvention(enum.Enum):
    """ Prefactor of the free spreading rate. PRINTED carries 4π², STANDARD carries 4. """
    PRINTED = 'printed'
    STANDARD = 'standard'

    @property
    def factor(self) -> float:
        return 4 * math.pi ** 2 if self is SpreadConvention.PRINTED else 4.0


def _positive(_: typing.Any, attribute: attr.Attribute, value: float) -> None:
    if not value > 0 or not math.isfinite(value):
        raise DynamicsError(f"{attribute.name} must be positive and finite, got {value!r}")


def _non_negative(_: typing.Any, attribute: attr.Attribute, value: float) -> None:
    if not value >= 0 or not math.isfinite(value):
        raise DynamicsError(f"{attribute.name} must be non-negative and finite, got {value!r}")


@attr.s(frozen=True)
class GrwParams(object):
    # Localization accuracy α
    alpha_loc: float = attr.ib(
        default=1e10,
        converter=unit.converter(unit.PER_CM2),  # type: ignore[misc]
        validator=_positive
    )

    # Per nucleon localization rate, zero switches localization off entirely
    lambda_micro: float = attr.ib(
        default=1e-16,
        converter=unit.converter(unit.PER_SECOND),  # type: ignore[misc]
        validator=_non_negative
    )

    # Nucleons in the marble
    n_nucleons: float = attr.ib(
        default=1e23,
        converter=unit.converter(),  # type: ignore[misc]
        validator=_positive
    )

    mass: float = attr.ib(
        default=1.0,
        converter=unit.converter(unit.GRAM),  # type: ignore[misc]
        validator=_positive
    )

    hbar: float = attr.ib(
        default=1.0546e-27,
        converter=unit.converter(unit.ERG_SECOND),  # type: ignore[misc]
        validator=_positive
    )

    spread_convention: SpreadConvention = attr.ib(default=SpreadConvention.PRINTED, converter=SpreadConvention,
                                                  kw_only=True)

    @property
    def rate(self) -> float:
        return amplified_rate(self)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            'alpha_loc_cm-2': self.alpha_loc,
            'lambda_micro_s-1': self.lambda_micro,
            'n_nucleons': self.n_nucleons,
            'mass_g': self.mass,
            'hbar_erg_s': self.hbar,
            'spread_convention': self.spread_convention.value
        }


@attr.s(frozen=True, slots=True)
class GaussianWavepacket(object):
    # Centre of the packet (cm)
    mean: float = attr.ib(converter=float)

    # Current precision a + n(t)α (cm⁻²)
    precision: float = attr.ib(converter=float, validator=_positive)

    # Accumulated log density of the hit centres that produced this state
    log_norm: LogValue = attr.ib(factory=LogValue.one)

    @property
    def variance(self) -> float:
        return 1.0 / self.precision


def amplified_rate(params: GrwParams) -> float:
    """ Localization rate of the whole marble, λ = Nλ_micro.

    :param params: model parameters
    :return: rate in s⁻¹
    """
    return params.n_nucleons * params.lambda_micro


def _hit_center_variance(precision: float, alpha_loc: float) -> float:
    return (alpha_loc + precision) / (2 * alpha_loc * precision)


def apply_hit(state: GaussianWavepacket, x0: float, alpha_loc: float) -> GaussianWavepacket:
    """ Localize the packet around x0. Precisions add and the new mean is the precision weighted average, log_norm
    accumulates the log density of x0 under the hit centre law.

    :param state: packet before the hit
    :param x0: hit centre (cm)
    :param alpha_loc: localization accuracy (cm⁻²)
    :return: packet after the hit
    """
    b = state.precision
    precision = b + alpha_loc
    mean = (b * state.mean + alpha_loc * x0) / precision

    center_variance = _hit_center_variance(b, alpha_loc)
    log_density = -0.5 * math.log(2 * math.pi * center_variance) - (x0 - state.mean) ** 2 / (2 * center_variance)

    return GaussianWavepacket(mean, precision, state.log_norm * LogValue.from_log(log_density))


def sample_hit_center(state: GaussianWavepacket, alpha_loc: float, rng: np.random.Generator) -> float:
    """ Draw a hit centre, normally distributed about the packet mean with variance (α + b)/(2αb).

    :param state: current packet
    :param alpha_loc: localization accuracy (cm⁻²)
    :param rng: random generator
    :return: hit centre (cm)
    """
    return float(rng.normal(state.mean, math.sqrt(_hit_center_variance(state.precision, alpha_loc))))


def sample_hit_times(rate: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    """ Hit times of a Poisson process over [0, duration), drawn as exponential inter-arrival times.

    :param rate: events per second
    :param duration: length of the window (s)
    :return: increasing array of hit times
    """
    if rate < 0 or duration < 0:
        raise DynamicsError('Rate and duration must be non-negative')

    if rate == 0 or duration == 0:
        return np.empty(0)

    scale = 1.0 / rate
    block = max(16, int(rate * duration + 6 * math.sqrt(rate * duration)) + 1)
    times: typing.List[np.ndarray] = []
    t = 0.0

    while True:
        arrivals = t + np.cumsum(rng.exponential(scale, block))
        inside = arrivals[arrivals < duration]
        times.append(inside)

        if len(inside) < block:
            return np.concatenate(times)

        t = float(arrivals[-1])


def variance_after_hits(a: float, hit_count: int, alpha_loc: float) -> float:
    """ Variance after hit_count localizations starting from precision a, 1/(a + nα). """
    if a <= 0 or hit_count < 0:
        raise DynamicsError('Require a > 0 and hit_count >= 0')

    return 1.0 / (a + hit_count * alpha_loc)


def schrodinger_spread_rate(a: float, t: float, params: GrwParams) -> float:
    """ Free spreading rate K ħ²(a + λαt)t/m², K = 4π² in the printed convention.

    :param a: initial precision (cm⁻²)
    :param t: elapsed time (s)
    :param params: model parameters
    :return: rate of increase of the variance (cm²/s)
    """
    if t < 0:
        raise DynamicsError('Time cannot be negative')

    return params.spread_convention.factor * params.hbar ** 2 * (a + params.rate * params.alpha_loc * t) * t / \
        params.mass ** 2


def shrink_rate(a: float, t: float, params: GrwParams) -> float:
    """ Rate at which hits reduce the variance, the magnitude of d/dt 1/(a + αλt). """
    if t < 0:
        raise DynamicsError('Time cannot be negative')

    la = params.rate * params.alpha_loc

    return la / (a + la * t) ** 2


def _rate_alpha(params: GrwParams) -> float:
    la = params.rate * params.alpha_loc

    if la == 0:
        raise DynamicsError('Regime analysis requires a non-zero localization rate')

    return la


def regime_time(params: GrwParams) -> float:
    """ Time at which free spreading and hit shrinking balance, √(m/(2πħλα)) in the printed convention.

    :param params: model parameters
    :return: time (s)
    """
    return math.sqrt(params.mass / (math.sqrt(params.spread_convention.factor) * params.hbar * _rate_alpha(params)))


def regime_time_numeric(a: float, params: GrwParams) -> float:
    """ Root find the time where the spread rate equals the shrink rate.

    The log of the ratio of the two rates is monotone in t, the root is bracketed by decades and refined by Brent's
    method in log time.

    :param a: initial precision (cm⁻²)
    :param params: model parameters
    :return: time (s)
    """
    la = _rate_alpha(params)
    log_k = math.log(params.spread_convention.factor) + 2 * math.log(params.hbar) - 2 * math.log(params.mass) - \
        math.log(la)

    def log_ratio(log_t: float) -> float:
        t = math.exp(log_t)

        return log_k + 3 * math.log(a + la * t) + log_t

    lo = hi = 0.0

    while log_ratio(lo) > 0:
        lo -= math.log(10)

    while log_ratio(hi) < 0:
        hi += math.log(10)

    return math.exp(optimize.brentq(log_ratio, lo, hi, xtol=1e-14, rtol=1e-14))


def equilibrium_width(params: GrwParams) -> float:
    """ Standard deviation where spreading and localization balance, [2πħ/(mλα)]^¼ in the printed convention. """
    return (math.sqrt(params.spread_convention.factor) * params.hbar /
            (params.mass * _rate_alpha(params))) ** 0.25


def forced_displacement(mean: float, b: float, x0: float, t: float, params: GrwParams) -> float:
    """ Mean after λt hits all forced to occur at x0, x̄ + (αλt/b)(x0 - x̄).

    Only valid while b >> α, outside that regime a warning is logged and the linearized value returned anyway.

    :param mean: initial mean (cm)
    :param b: packet precision (cm⁻²)
    :param x0: forced hit position (cm)
    :param t: elapsed time (s)
    :param params: model parameters
    :return: new mean (cm)
    """
    if b <= _NARROW_RATIO * params.alpha_loc:
        _logger.warning(f"Forced displacement with b = {b:g} not much larger than α = {params.alpha_loc:g}")

    return mean + params.alpha_loc * params.rate * t / b * (x0 - mean)


def tail_hit_log_probability(offset: float, precision: float) -> LogValue:
    """ Log probability of a localization further than offset from the packet mean, erfc(offset·√precision).

    A precision of 10²² gives erfc(10¹¹·offset).

    :param offset: distance from the mean (cm)
    :param precision: packet precision (cm⁻²)
    :return: LogValue probability
    """
    if offset < 0:
        raise DynamicsError('Offset cannot be negative')

    return log_erfc(offset * math.sqrt(precision))


def displacement_log_bound(displacement: float, precision: float, duration: float, params: GrwParams) -> LogValue:
    """ Upper bound style estimate for the mean moving by `displacement` within `duration`.

    Every one of the λt hits in the window has to land at least at the offset whose forced displacement reproduces
    `displacement`, the probabilities of the independent hits multiply. The result is a bound, not an exact
    probability.

    :param displacement: required shift of the mean (cm)
    :param precision: packet precision (cm⁻²)
    :param duration: window (s)
    :param params: model parameters
    :return: LogValue bound
    """
    if displacement < 0 or duration <= 0:
        raise DynamicsError('Require displacement >= 0 and duration > 0')

    hits = params.rate * duration

    if hits == 0:
        return LogValue.zero() if displacement > 0 else LogValue.one()

    offset = displacement * precision / (params.alpha_loc * hits)

    return tail_hit_log_probability(offset, precision) ** hits


def far_hit_log_rate(n_marbles: float, offset: float, precision: float, params: GrwParams) -> LogValue:
    """ Expected number of hits per second further than offset, summed over n independent marbles. """
    if n_marbles <= 0:
        raise DynamicsError('Number of marbles must be positive')

    return LogValue.from_real(n_marbles * params.rate) * tail_hit_log_probability(offset, precision)


def marbles_for_certain_far_hit(offset: float, precision: float) -> LogValue:
    """ Number of marbles needed before one localization event is expected to land further than offset. """
    tail = tail_hit_log_probability(offset, precision)

    if tail.is_zero:
        raise DynamicsError('Tail probability vanishes, no finite number of marbles')

    return LogValue.one() / tail


@attr.s(frozen=True)
class TrajectoryRecord(object):
    times: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    hits: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    means: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    variances: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))

    mode: Mode = attr.ib(kw_only=True)
    seed: typing.Optional[int] = attr.ib(default=None, kw_only=True)
    stream: typing.Optional[int] = attr.ib(default=None, kw_only=True)

    # Final packet, including precision history not visible in the sampled rows
    final: typing.Optional[GaussianWavepacket] = attr.ib(default=None, eq=False, kw_only=True)

    def __attrs_post_init__(self) -> None:
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise DynamicsError('Trajectory sample times must be strictly increasing')

        if len(self.hits) > 1 and np.any(np.diff(self.hits) < 0):
            raise DynamicsError('Trajectory hit counts must be nondecreasing')

    @property
    def hit_count(self) -> int:
        return int(self.hits[-1]) if len(self.hits) else 0

    def rows(self) -> typing.Iterator[typing.Tuple[float, int, float, float]]:
        for t, n, mean, variance in zip(self.times, self.hits, self.means, self.variances):
            yield float(t), int(n), float(mean), float(variance)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            'mode': self.mode.value,
            'seed': self.seed,
            'stream': self.stream,
            'hit_count': self.hit_count,
            'samples': [dict(zip(TRAJECTORY_CSV_HEADER, row)) for row in self.rows()]
        }


class TrajectorySimulator(Logged):
    """ Event driven simulation of one marble: Poisson hit times, sampled hit centres and, in hits+spread mode,
    integration of the free spreading rate between events. """

    def __init__(self, params: GrwParams, mode: Mode = Mode.HITS, samples: int = 100, record_hits: bool = False):
        super().__init__()

        if samples < 1:
            raise DynamicsError('At least one sample interval is required')

        self.params = params
        self.mode = Mode(mode)
        self.samples = samples
        self.record_hits = record_hits

        # Spreading constant, dv/dt = c/v² between hits
        la = params.rate * params.alpha_loc

        if self.mode is Mode.HITS_SPREAD and la > 0:
            self._spread_constant = params.spread_convention.factor * params.hbar ** 2 / (params.mass ** 2 * la)
        else:
            self._spread_constant = 0.0

    def spread(self, variance: float, dt: float) -> float:
        """ Integrate the free spreading of the variance over dt.

        Integrated in ln v, d(ln v)/dt = c/v³, which keeps the tolerances scale free between desk and physical units.

        :param variance: variance at the start of the interval (cm²)
        :param dt: interval (s)
        :return: variance at the end of the interval (cm²)
        """
        if self._spread_constant == 0.0 or dt <= 0:
            return variance

        c = self._spread_constant

        result = integrate.solve_ivp(lambda _, u: c * np.exp(-3 * u), (0.0, dt), [math.log(variance)],
                                     method='RK45', rtol=1e-10, atol=1e-12)

        if not result.success:
            raise DynamicsError(f"Spreading integration failed: {result.message}")

        return float(math.exp(result.y[0, -1]))

    def run(self, initial: GaussianWavepacket, duration: float, rng: typing.Union[int, np.random.Generator],
            stream: typing.Optional[int] = None) -> TrajectoryRecord:
        """ Simulate one trajectory.

        :param initial: packet at t = 0
        :param duration: simulated time (s)
        :param rng: seed or generator, a seed is recorded in the result
        :param stream: optional trajectory index, recorded in the result and in log records
        :return: TrajectoryRecord sampled on an even grid over [0, duration]
        """
        if duration < 0:
            raise DynamicsError('Duration cannot be negative')

        seed = rng if isinstance(rng, int) else None
        gen = random.generator(rng) if isinstance(rng, int) else rng

        hit_times = sample_hit_times(self.params.rate, duration, gen)

        if duration > 0:
            grid = np.linspace(0.0, duration, self.samples + 1)
        else:
            grid = np.zeros(1)

        self.logger().debug(f"{len(hit_times)} hits over {duration:g} s", seed=seed, trial=stream)

        times: typing.List[float] = []
        hits: typing.List[int] = []
        means: typing.List[float] = []
        variances: typing.List[float] = []

        def record(at: float) -> None:
            if times and at <= times[-1]:
                return

            times.append(at)
            hits.append(count)
            means.append(state.mean)
            variances.append(state.variance)

        state = initial
        count = 0
        verbose = self.logger().isEnabledFor(logging.EVENT)
        now = 0.0
        hit_index = 0

        for sample_time in grid:
            while hit_index < len(hit_times) and hit_times[hit_index] <= sample_time:
                t_hit = float(hit_times[hit_index])
                state = self._advance(state, t_hit - now)
                now = t_hit

                x0 = sample_hit_center(state, self.params.alpha_loc, gen)
                state = apply_hit(state, x0, self.params.alpha_loc)
                count += 1
                hit_index += 1

                if verbose:
                    self.logger().event(f"Hit {count} at t = {t_hit:.6g} s, x0 = {x0:.6g} cm", seed=seed,
                                        trial=stream)

                if self.record_hits:
                    record(t_hit)

            state = self._advance(state, float(sample_time) - now)
            now = float(sample_time)
            record(now)

        return TrajectoryRecord(np.array(times), np.array(hits, dtype=np.int64), np.array(means), np.array(variances),
                                mode=self.mode, seed=seed, stream=stream, final=state)

    def _advance(self, state: GaussianWavepacket, dt: float) -> GaussianWavepacket:
        if self._spread_constant == 0.0 or dt <= 0:
            return state

        return attr.evolve(state, precision=1.0 / self.spread(state.variance, dt))


def simulate_trajectory(initial: GaussianWavepacket, params: GrwParams, duration: float, mode: Mode = Mode.HITS,
                        rng: typing.Union[int, np.random.Generator] = 0, samples: int = 100,
                        record_hits: bool = False) -> TrajectoryRecord:
    """ Shortcut to simulate a single trajectory. Identical (seed, params, duration, mode) give identical records.

    :param initial: packet at t = 0
    :param params: model parameters
    :param duration: simulated time (s)
    :param mode: hits only, or hits with free spreading between them
    :param rng: seed or generator
    :param samples: number of sample intervals over the duration
    :param record_hits: also record a row immediately after every hit
    :return: TrajectoryRecord
    """
    return TrajectorySimulator(params, mode, samples, record_hits).run(initial, duration, rng)


@attr.s(frozen=True)
class EnsembleResult(object):
    seed: int = attr.ib()
    hit_counts: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    final_means: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))
    final_variances: np.ndarray = attr.ib(eq=attr.cmp_using(eq=np.array_equal))

    @property
    def trajectories(self) -> int:
        return len(self.hit_counts)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        counts = self.hit_counts.astype(float)

        return {
            'seed': self.seed,
            'trajectories': self.trajectories,
            'hits_mean': float(np.mean(counts)),
            'hits_variance': float(np.var(counts, ddof=1)) if self.trajectories > 1 else 0.0,
            'final_mean_mean_cm': float(np.mean(self.final_means)),
            'final_variance_mean_cm2': float(np.mean(self.final_variances))
        }


def _ensemble_chunk(simulator: TrajectorySimulator, initial: GaussianWavepacket, duration: float, seed: int,
                    start: int, count: int) -> typing.List[typing.Tuple[int, float, float]]:
    result = []

    for trajectory in range(start, start + count):
        record = simulator.run(initial, duration, random.substream(seed, trajectory), stream=trajectory)
        final = typing.cast(GaussianWavepacket, record.final)
        result.append((record.hit_count, final.mean, final.variance))

    return result


def run_ensemble(initial: GaussianWavepacket, params: GrwParams, duration: float, trajectories: int, seed: int,
                 mode: Mode = Mode.HITS, chunk_size: int = 256, n_jobs: int = 1) -> EnsembleResult:
    """ Run independent trajectories in parallel. Trajectory i draws from substream (seed, i) of the master seed, so the
    result depends neither on n_jobs nor on chunk_size.

    :param initial: packet at t = 0
    :param params: model parameters
    :param duration: simulated time (s)
    :param trajectories: number of trajectories
    :param seed: master seed
    :param mode: simulation mode
    :param chunk_size: trajectories per joblib task
    :param n_jobs: joblib worker count
    :return: EnsembleResult with per trajectory hit counts and final packets
    """
    if trajectories < 1:
        raise DynamicsError('At least one trajectory is required')

    simulator = TrajectorySimulator(params, mode, samples=1)

    with simulator.timed(f"ensemble of {trajectories} trajectories", logging.INFO):
        chunks = Parallel(n_jobs=n_jobs)(
            delayed(_ensemble_chunk)(simulator, initial, duration, seed, start, count)
            for _, start, count in iterate.iterate_chunk(trajectories, chunk_size)
        )

    rows = [row for chunk in chunks for row in chunk]

    return EnsembleResult(
        seed,
        np.array([row[0] for row in rows], dtype=np.int64),
        np.array([row[1] for row in rows]),
        np.array([row[2] for row in rows])
    )


def equilibrium_summary(params: GrwParams, typical_precision: float = 1e22, day: float = 86400.0,
                        near_offset: float = 10.0, far_offset: float = 1e14) -> typing.Dict[str, typing.Any]:
    """ Regime analytics for a macroscopic marble, computed values side by side with the quoted orders of magnitude.

    :param params: model parameters
    :param typical_precision: precision of a typical centre of mass wavefunction (cm⁻²)
    :param day: forced displacement window (s)
    :param near_offset: near hit offset, also the one day displacement (cm)
    :param far_offset: far hit offset, one light day by default (cm)
    :return: dict ready for JSON output
    """
    t_regime = regime_time(params)
    width = equilibrium_width(params)

    single_far_hit = apply_hit(GaussianWavepacket(0.0, typical_precision), far_offset, params.alpha_loc)

    tail_near = tail_hit_log_probability(near_offset, typical_precision)
    tail_far = tail_hit_log_probability(far_offset, typical_precision)

    return {
        'rate_s-1': params.rate,
        'mean_time_between_hits_s': 1.0 / params.rate,
        'regime_time_s': t_regime,
        'regime_time_numeric_s': regime_time_numeric(0.0, params),
        'regime_time': unit.format_quantity(t_regime, unit.SECOND),
        'equilibrium_width_cm': width,
        'equilibrium_width': unit.format_quantity(width, unit.CM),
        'equilibrium_precision_cm-2': 1.0 / width ** 2,
        'forced_shift_factor': params.alpha_loc * params.rate * day / typical_precision,
        'forced_shift_cm': forced_displacement(0.0, typical_precision, near_offset, day, params),
        'hits_per_day': params.rate * day,
        'light_day_shift_cm': single_far_hit.mean,
        'tail_near': tail_near.to_json(),
        'tail_near_log_mag': tail_near.log_mag,
        'tail_far': tail_far.to_json(),
        'tail_far_log_mag': tail_far.log_mag,
        'one_day_bound': displacement_log_bound(near_offset, typical_precision, day, params).to_json(),
        'marbles_for_far_hit': marbles_for_certain_far_hit(far_offset, typical_precision).to_json(),
        'quoted': dict(_QUOTED),
        'params': params.to_json()
    }

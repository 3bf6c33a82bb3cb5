import math
import unittest

import numpy as np
from scipy import integrate, stats

from collapselib.model import collapse_dynamics
from collapselib.model.collapse_dynamics import GaussianWavepacket, GrwParams, Mode
from collapselib.numeric.logprob import LogValue
from collapselib.util import random


def _desk_params(**kwargs) -> GrwParams:
    # λ = 100 s⁻¹, α = 1, m = 2π and ħ = 1 give a spreading constant of 0.01 and an equilibrium variance of 0.1
    return GrwParams(1.0, 1.0, 100.0, 2 * math.pi, 1.0, **kwargs)


class TestModelCollapseDynamics(unittest.TestCase):
    def test_params_defaults(self):
        params = GrwParams()

        self.assertEqual(collapse_dynamics.amplified_rate(params), 1e7)
        self.assertEqual(params.rate, 1e7)

    def test_params_units(self):
        params = GrwParams(alpha_loc='1e14 m**-2', mass='1 kg')

        self.assertAlmostEqual(params.alpha_loc, 1e10, delta=1e-3)
        self.assertAlmostEqual(params.mass, 1000.0, 9)

    def test_params_invalid(self):
        with self.assertRaises(collapse_dynamics.DynamicsError):
            GrwParams(alpha_loc=-1.0)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            GrwParams(mass=0.0)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            GrwParams(lambda_micro=-1e-16)

        with self.assertRaises(ValueError):
            GrwParams(spread_convention='sideways')

        self.assertEqual(GrwParams(lambda_micro=0.0).rate, 0.0)

    def test_apply_hit_grid(self):
        rng = np.random.default_rng(2)
        x = np.linspace(-25.0, 25.0, 50001)

        for _ in range(100):
            b, alpha_loc = rng.uniform(0.5, 5.0, 2)
            mean, x0 = rng.uniform(-3.0, 3.0, 2)

            result = collapse_dynamics.apply_hit(GaussianWavepacket(mean, b), x0, alpha_loc)

            log_w = -b * (x - mean) ** 2 / 2 - alpha_loc * (x - x0) ** 2 / 2
            w = np.exp(log_w - np.max(log_w))
            total = integrate.trapezoid(w, x)

            grid_mean = integrate.trapezoid(x * w, x) / total
            grid_variance = integrate.trapezoid((x - grid_mean) ** 2 * w, x) / total

            self.assertAlmostEqual(result.mean, grid_mean, delta=1e-8)
            self.assertAlmostEqual(result.variance, grid_variance, delta=1e-8 * grid_variance)
            self.assertEqual(result.precision, b + alpha_loc)

    def test_apply_hit_log_norm(self):
        x = np.linspace(-40.0, 40.0, 80001)

        for mean, b, x0, alpha_loc in ((0.0, 1.0, 0.5, 2.0), (1.0, 4.0, -2.0, 0.5), (-0.5, 0.8, 3.0, 1.5)):
            with self.subTest(mean=mean, b=b, x0=x0, alpha_loc=alpha_loc):
                result = collapse_dynamics.apply_hit(GaussianWavepacket(mean, b), x0, alpha_loc)

                # Density of the hit centre, |ψ|² smeared by the normalized localization Gaussian
                density = math.sqrt(b / math.pi) * np.exp(-b * (x - mean) ** 2) * \
                    math.sqrt(alpha_loc / math.pi) * np.exp(-alpha_loc * (x - x0) ** 2)

                self.assertAlmostEqual(result.log_norm.log_mag, math.log(integrate.trapezoid(density, x)),
                                       delta=1e-8)

    def test_apply_hit_accumulates(self):
        state = GaussianWavepacket(0.0, 1.0)
        first = collapse_dynamics.apply_hit(state, 0.3, 1.0)
        second = collapse_dynamics.apply_hit(first, -0.2, 1.0)

        self.assertEqual(state.log_norm, LogValue.one())
        self.assertEqual(second.precision, 3.0)
        self.assertLess(second.log_norm.log_mag, 0.0)

    def test_sample_hit_center(self):
        rng = random.generator(8)
        state = GaussianWavepacket(1.5, 4.0)
        n = 100000

        draws = np.array([collapse_dynamics.sample_hit_center(state, 1.0, rng) for _ in range(n)])

        # (α + b)/(2αb) with α = 1 and b = 4
        variance = 5.0 / 8.0

        self.assertLess(abs(np.mean(draws) - 1.5), 4 * math.sqrt(variance / n))
        self.assertAlmostEqual(np.var(draws, ddof=1) / variance, 1.0, delta=0.02)

    def test_sample_hit_times(self):
        rng = random.generator(13)
        rate = 100.0
        trials = 10000

        counts = []

        for _ in range(trials):
            times = collapse_dynamics.sample_hit_times(rate, 1.0, rng)

            self.assertTrue(np.all(np.diff(times) > 0))
            self.assertTrue(np.all((times >= 0.0) & (times < 1.0)))

            counts.append(len(times))

        counts = np.array(counts, dtype=float)

        self.assertLess(abs(np.mean(counts) - rate), 3 * math.sqrt(rate / trials))

        # Sample variance of a Poisson count, scaled chi-square with trials - 1 degrees of freedom
        lo, hi = stats.chi2.ppf([0.005, 0.995], trials - 1) * rate / (trials - 1)

        self.assertTrue(lo < np.var(counts, ddof=1) < hi)

    def test_sample_hit_times_long(self):
        # Many more events than the first block
        times = collapse_dynamics.sample_hit_times(1e4, 2.0, random.generator(1))

        self.assertLess(abs(len(times) - 2e4), 6 * math.sqrt(2e4))
        self.assertTrue(np.all(np.diff(times) > 0))

    def test_sample_hit_times_empty(self):
        rng = random.generator(0)

        self.assertEqual(len(collapse_dynamics.sample_hit_times(0.0, 10.0, rng)), 0)
        self.assertEqual(len(collapse_dynamics.sample_hit_times(10.0, 0.0, rng)), 0)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.sample_hit_times(-1.0, 1.0, rng)

    def test_variance_after_hits(self):
        self.assertEqual(collapse_dynamics.variance_after_hits(1e22, 0, 1e10), 1e-22)
        self.assertAlmostEqual(collapse_dynamics.variance_after_hits(2.0, 3, 0.5), 1 / 3.5, 15)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.variance_after_hits(0.0, 1, 1.0)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.variance_after_hits(1.0, -1, 1.0)

    def test_rates_balance_at_regime_time(self):
        params = GrwParams()
        t = collapse_dynamics.regime_time(params)

        spread = collapse_dynamics.schrodinger_spread_rate(0.0, t, params)
        shrink = collapse_dynamics.shrink_rate(0.0, t, params)

        self.assertAlmostEqual(spread / shrink, 1.0, 9)

    def test_regime_time_physical(self):
        params = GrwParams()

        self.assertAlmostEqual(collapse_dynamics.regime_time(params) / 3.8848e4, 1.0, delta=1e-3)
        self.assertAlmostEqual(collapse_dynamics.equilibrium_width(params) / 1.6044e-11, 1.0, delta=1e-3)
        self.assertAlmostEqual(1 / collapse_dynamics.equilibrium_width(params) ** 2 / 3.885e21, 1.0, delta=1e-3)

    def test_regime_time_numeric(self):
        params = GrwParams()
        analytic = collapse_dynamics.regime_time(params)

        self.assertAlmostEqual(collapse_dynamics.regime_time_numeric(0.0, params) / analytic, 1.0, 9)

        # A narrow starting packet reaches the balance earlier
        self.assertLess(collapse_dynamics.regime_time_numeric(1e22, params), analytic)

    def test_regime_requires_rate(self):
        params = GrwParams(lambda_micro=0.0)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.regime_time(params)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.equilibrium_width(params)

    def test_spread_convention(self):
        printed = GrwParams()
        standard = GrwParams(spread_convention='standard')

        self.assertAlmostEqual(collapse_dynamics.regime_time(standard) / collapse_dynamics.regime_time(printed),
                               math.sqrt(math.pi), 12)
        self.assertAlmostEqual(collapse_dynamics.equilibrium_width(printed) /
                               collapse_dynamics.equilibrium_width(standard), math.pi ** 0.25, 12)

    def test_desk_equilibrium(self):
        params = _desk_params()

        self.assertAlmostEqual(collapse_dynamics.equilibrium_width(params) ** 2, 0.1, 12)
        self.assertAlmostEqual(collapse_dynamics.regime_time(params), 0.1, 12)

    def test_forced_displacement(self):
        params = GrwParams()

        shift = collapse_dynamics.forced_displacement(0.0, 1e22, 10.0, 86400.0, params)

        self.assertAlmostEqual(shift, 8.64, 9)
        self.assertAlmostEqual(collapse_dynamics.forced_displacement(1.0, 1e22, 1.0, 86400.0, params), 1.0, 12)

    def test_forced_displacement_wide_packet(self):
        with self.assertLogs('collapselib.model.collapse_dynamics', 'WARNING'):
            collapse_dynamics.forced_displacement(0.0, 1e10, 10.0, 1.0, GrwParams())

    def test_tail_probability(self):
        self.assertEqual(collapse_dynamics.tail_hit_log_probability(0.0, 1e22), LogValue.one())

        near = collapse_dynamics.tail_hit_log_probability(10.0, 1e22)
        far = collapse_dynamics.tail_hit_log_probability(1e14, 1e22)

        self.assertAlmostEqual(near.log_mag / -1e24, 1.0, 9)
        self.assertAlmostEqual(far.log_mag / -1e50, 1.0, 9)
        self.assertEqual(far.sign, 1)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.tail_hit_log_probability(-1.0, 1e22)

    def test_displacement_bound(self):
        bound = collapse_dynamics.displacement_log_bound(10.0, 1e22, 86400.0, GrwParams())

        self.assertLess(bound.log_mag, -1e34)
        self.assertAlmostEqual(bound.log_mag / -1.1574e36, 1.0, delta=1e-3)

        idle = GrwParams(lambda_micro=0.0)

        self.assertTrue(collapse_dynamics.displacement_log_bound(1.0, 1e22, 1.0, idle).is_zero)
        self.assertEqual(collapse_dynamics.displacement_log_bound(0.0, 1e22, 1.0, idle), LogValue.one())

    def test_far_hits(self):
        params = GrwParams()
        tail = collapse_dynamics.tail_hit_log_probability(1e14, 1e22)

        marbles = collapse_dynamics.marbles_for_certain_far_hit(1e14, 1e22)

        self.assertAlmostEqual(marbles.log_mag, -tail.log_mag, delta=1e-9 * abs(tail.log_mag))

        # z = 1 keeps the tail small enough to compare against the marble rate
        near_tail = collapse_dynamics.tail_hit_log_probability(1e-11, 1e22)
        rate = collapse_dynamics.far_hit_log_rate(1e30, 1e-11, 1e22, params)

        self.assertAlmostEqual(rate.log_mag - near_tail.log_mag, math.log(1e37), delta=1e-12 * math.log(1e37))
        self.assertAlmostEqual(near_tail.to_real(), math.erfc(1.0), delta=1e-12)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.far_hit_log_rate(0, 1e14, 1e22, params)

    def test_single_far_hit(self):
        result = collapse_dynamics.apply_hit(GaussianWavepacket(0.0, 1e22), 1e14, 1e10)

        self.assertAlmostEqual(result.mean, 100.0, 6)

    def test_mode_names(self):
        self.assertIs(Mode('hits'), Mode.HITS)
        self.assertIs(Mode('hits-only'), Mode.HITS)
        self.assertIs(Mode(' Hits_Only '), Mode.HITS)
        self.assertIs(Mode('hits+spread'), Mode.HITS_SPREAD)

        with self.assertRaises(ValueError):
            Mode('spread-only')

    def test_trajectory_hits_only(self):
        params = _desk_params()
        record = collapse_dynamics.simulate_trajectory(GaussianWavepacket(0.0, 1.0), params, 1.0, Mode.HITS, 4,
                                                       samples=20)

        self.assertEqual(len(record.times), 21)
        self.assertEqual(record.times[0], 0.0)
        self.assertEqual(record.times[-1], 1.0)
        self.assertTrue(np.all(np.diff(record.hits) >= 0))

        # Precisions add exactly for integer α and a
        for n, variance in zip(record.hits, record.variances):
            self.assertEqual(variance, collapse_dynamics.variance_after_hits(1.0, int(n), 1.0))

        self.assertEqual(record.final.variance, collapse_dynamics.variance_after_hits(1.0, record.hit_count, 1.0))

    def test_trajectory_deterministic(self):
        params = _desk_params()
        initial = GaussianWavepacket(0.0, 1.0)

        a = collapse_dynamics.simulate_trajectory(initial, params, 2.0, Mode.HITS_SPREAD, 99, samples=10)
        b = collapse_dynamics.simulate_trajectory(initial, params, 2.0, Mode.HITS_SPREAD, 99, samples=10)
        c = collapse_dynamics.simulate_trajectory(initial, params, 2.0, Mode.HITS_SPREAD, 100, samples=10)

        self.assertEqual(a, b)
        self.assertNotEqual(a, c)
        self.assertEqual(a.seed, 99)

    def test_trajectory_record_hits(self):
        record = collapse_dynamics.simulate_trajectory(GaussianWavepacket(0.0, 1.0), _desk_params(), 1.0, Mode.HITS,
                                                       21, samples=10, record_hits=True)

        self.assertEqual(len(record.times), 11 + record.hit_count)
        self.assertTrue(np.all(np.diff(record.times) > 0))

    def test_trajectory_without_rate(self):
        params = GrwParams(lambda_micro=0.0)
        record = collapse_dynamics.simulate_trajectory(GaussianWavepacket(0.5, 1e22), params, 1.0, Mode.HITS, 0,
                                                       samples=5)

        self.assertEqual(record.hit_count, 0)
        self.assertTrue(np.all(record.variances == 1e-22))
        self.assertTrue(np.all(record.means == 0.5))

    def test_trajectory_zero_duration(self):
        record = collapse_dynamics.simulate_trajectory(GaussianWavepacket(0.0, 1.0), _desk_params(), 0.0)

        self.assertEqual(len(record.times), 1)
        self.assertEqual(record.hit_count, 0)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.simulate_trajectory(GaussianWavepacket(0.0, 1.0), _desk_params(), -1.0)

    def test_spread_analytic(self):
        simulator = collapse_dynamics.TrajectorySimulator(_desk_params(), Mode.HITS_SPREAD)

        # v³ = v₀³ + 3ct with c = 0.01
        self.assertAlmostEqual(simulator.spread(0.1, 0.5) / 0.016 ** (1 / 3), 1.0, delta=1e-6)
        self.assertAlmostEqual(simulator.spread(1e-3, 2.0) / (1e-9 + 0.06) ** (1 / 3), 1.0, delta=1e-6)
        self.assertEqual(simulator.spread(0.1, 0.0), 0.1)

        hits_only = collapse_dynamics.TrajectorySimulator(_desk_params(), Mode.HITS)

        self.assertEqual(hits_only.spread(0.1, 0.5), 0.1)

    def test_spread_equilibrium(self):
        record = collapse_dynamics.simulate_trajectory(GaussianWavepacket(0.0, 1.0), _desk_params(), 10.0,
                                                       Mode.HITS_SPREAD, 7, samples=100)

        late = record.variances[record.times >= 5.0]

        self.assertTrue(np.all((late > 0.1 / 3) & (late < 0.3)))
        self.assertAlmostEqual(np.mean(late) / 0.1, 1.0, delta=0.5)

    def test_record_validation(self):
        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.TrajectoryRecord(np.array([0.0, 0.0]), np.array([0, 0]), np.zeros(2), np.ones(2),
                                               mode=Mode.HITS)

        with self.assertRaises(collapse_dynamics.DynamicsError):
            collapse_dynamics.TrajectoryRecord(np.array([0.0, 1.0]), np.array([2, 1]), np.zeros(2), np.ones(2),
                                               mode=Mode.HITS)

    def test_record_json(self):
        record = collapse_dynamics.simulate_trajectory(GaussianWavepacket(0.0, 1.0), _desk_params(), 1.0, Mode.HITS,
                                                       3, samples=4)
        encoded = record.to_json()

        self.assertEqual(encoded['mode'], 'hits')
        self.assertEqual(encoded['seed'], 3)
        self.assertEqual(len(encoded['samples']), 5)
        self.assertEqual(set(encoded['samples'][0]), set(collapse_dynamics.TRAJECTORY_CSV_HEADER))

    def test_ensemble_independent_of_jobs(self):
        params = _desk_params()
        initial = GaussianWavepacket(0.0, 1.0)

        serial = collapse_dynamics.run_ensemble(initial, params, 1.0, 12, 5, Mode.HITS, chunk_size=4, n_jobs=1)
        parallel = collapse_dynamics.run_ensemble(initial, params, 1.0, 12, 5, Mode.HITS, chunk_size=4, n_jobs=2)

        self.assertEqual(serial, parallel)
        self.assertEqual(serial.trajectories, 12)

        encoded = serial.to_json()

        self.assertEqual(encoded['trajectories'], 12)
        self.assertAlmostEqual(encoded['hits_mean'], float(np.mean(serial.hit_counts)), 12)

    def test_ensemble_chunk_size(self):
        params = _desk_params()
        initial = GaussianWavepacket(0.0, 1.0)

        by_four = collapse_dynamics.run_ensemble(initial, params, 0.5, 13, 21, Mode.HITS, chunk_size=4)
        by_five = collapse_dynamics.run_ensemble(initial, params, 0.5, 13, 21, Mode.HITS, chunk_size=5)

        self.assertEqual(by_four, by_five)

        # Each trajectory is reproducible on its own from (seed, index)
        for index in (0, 4, 12):
            with self.subTest(index=index):
                record = collapse_dynamics.simulate_trajectory(initial, params, 0.5, Mode.HITS,
                                                               random.substream(21, index), samples=1)

                self.assertEqual(by_four.hit_counts[index], record.hit_count)
                self.assertEqual(by_four.final_means[index], record.final.mean)
                self.assertEqual(by_four.final_variances[index], record.final.variance)

    def test_ensemble_hit_statistics(self):
        trajectories = 10000
        rate = 10.0

        # 0.1 s at λ = 100 s⁻¹
        result = collapse_dynamics.run_ensemble(GaussianWavepacket(0.0, 1.0), _desk_params(), 0.1, trajectories, 11,
                                                Mode.HITS, chunk_size=1000, n_jobs=2)

        counts = result.hit_counts.astype(float)

        self.assertEqual(result.trajectories, trajectories)
        self.assertLess(abs(np.mean(counts) - rate), 3 * math.sqrt(rate / trajectories))

        lo, hi = stats.chi2.ppf([0.005, 0.995], trajectories - 1) * rate / (trajectories - 1)

        self.assertTrue(lo < np.var(counts, ddof=1) < hi)

        np.testing.assert_array_equal(result.final_variances, 1.0 / (1.0 + counts))

    def test_equilibrium_summary(self):
        summary = collapse_dynamics.equilibrium_summary(GrwParams())

        self.assertEqual(summary['rate_s-1'], 1e7)
        self.assertAlmostEqual(summary['regime_time_numeric_s'] / summary['regime_time_s'], 1.0, 9)
        self.assertAlmostEqual(summary['forced_shift_factor'], 0.864, 12)
        self.assertAlmostEqual(summary['forced_shift_cm'], 8.64, 9)
        self.assertAlmostEqual(summary['hits_per_day'], 8.64e11, delta=1.0)
        self.assertAlmostEqual(summary['light_day_shift_cm'], 100.0, 6)
        self.assertAlmostEqual(summary['tail_far_log_mag'] / -1e50, 1.0, 9)
        self.assertLess(summary['one_day_bound']['log10_mag'], -1e34 / math.log(10))
        self.assertEqual(summary['quoted']['regime_time_s'], 1e5)
        self.assertEqual(summary['params']['spread_convention'], 'printed')


if __name__ == '__main__':
    unittest.main()

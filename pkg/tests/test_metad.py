from __future__ import absolute_import, unicode_literals
import os
import unittest

import numpy as np
from scipy.stats import norm

from metadutils import metad
from metadutils.counts import RatingCounts
from metadutils.errors import DomainError, FitError
from metadutils.observer import RECOVERY_OBSERVER, ObserverSpec, SimOptions, expected_counts, simulate_counts

SLOW = os.environ.get('METADUTILS_SLOW')

TOY = RatingCounts([
    [[40, 30], [20, 10]],
    [[10, 20], [30, 40]],
])


def toy_loglik(m, t1, t2, counts):
    """Log-likelihood for h = 2 and meta_c = 0, written out cell by cell."""
    ll = 0.0
    for s, mu in ((0, -m / 2.0), (1, m / 2.0)):
        high_s1 = norm.cdf(t1 - mu) / norm.cdf(-mu)
        high_s2 = norm.sf(t2 - mu) / norm.sf(-mu)
        ll = ll + counts[s, 0, 0] * np.log(1 - high_s1) + counts[s, 0, 1] * np.log(high_s1)
        ll = ll + counts[s, 1, 0] * np.log(1 - high_s2) + counts[s, 1, 1] * np.log(high_s2)
    return ll


def grid_search(counts, rounds=5, points=41):
    lo = np.array([-1.0, -4.0, 0.01])
    hi = np.array([3.0, -0.01, 4.0])
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], points) for i in range(3)]
        m, t1, t2 = np.meshgrid(*axes, indexing='ij')
        with np.errstate(divide='ignore', invalid='ignore'):
            ll = toy_loglik(m, t1, t2, counts)
        ll = np.where(np.isfinite(ll), ll, -np.inf)
        i = np.unravel_index(np.argmax(ll), ll.shape)
        best = np.array([m[i], t1[i], t2[i]]), ll[i]
        step = (hi - lo) / (points - 1)
        lo = np.maximum(best[0] - 2 * step, [-1.0, -6.0, 1e-4])
        hi = np.minimum(best[0] + 2 * step, [3.0, -1e-4, 6.0])
    return best


class TestParams(unittest.TestCase):
    def test_thresholds(self):
        p = metad.MetaDParams(1.0, 0.1, [-1.0, -0.5], [0.5, 1.0])
        self.assertEqual(p.h, 3)
        self.assertEqual(p.thresholds().tolist(), [-1.0, -0.5, 0.1, 0.5, 1.0])

    def test_validate(self):
        with self.assertRaises(DomainError):
            metad.MetaDParams(1.0, 0.0, [-0.5, -1.0], [0.5, 1.0]).validate()
        with self.assertRaises(DomainError):
            metad.MetaDParams(1.0, 0.6, [-1.0, -0.5], [0.5, 1.0]).validate()
        with self.assertRaises(DomainError):
            metad.MetaDParams(1.0, 0.0, [-1.0], [0.5, 1.0])


class TestProbabilities(unittest.TestCase):
    def test_conditional_rows_sum_to_one(self):
        p = metad.type2_probs(metad.MetaDParams(1.5, 0.2, [-1.5, -1.0, -0.5], [0.5, 1.0, 1.5]))
        self.assertEqual(p.h, 4)
        np.testing.assert_allclose(p.p.sum(axis=2), np.ones((2, 2)), atol=1e-12)
        self.assertTrue(np.all(p.p >= 0))

    def test_confidence_tracks_correctness(self):
        p = metad.type2_probs(metad.MetaDParams(2.0, 0.0, [-1.0], [1.0]))
        # highest confidence is more likely for a correct response
        self.assertGreater(p[0, 0, 1], p[1, 0, 1])
        self.assertGreater(p[1, 1, 1], p[0, 1, 1])

    def test_joint_probs(self):
        params = metad.MetaDParams(1.0, 0.0, [-1.0], [1.0])
        j = metad.joint_probs(1.0, 0.0, params)
        np.testing.assert_allclose(j.sum(axis=(1, 2)), [1.0, 1.0], atol=1e-12)

    def test_log_likelihood_matches_cellwise(self):
        params = metad.MetaDParams(0.8, 0.0, [-0.7], [0.6])
        self.assertAlmostEqual(metad.log_likelihood(params, TOY), toy_loglik(0.8, -0.7, 0.6, TOY.counts), places=9)

    def test_scale_mismatch(self):
        with self.assertRaises(DomainError):
            metad.type2_probs(metad.MetaDParams(1.0, 0.0, [-1.0], [1.0]), h=3)


class TestMRatio(unittest.TestCase):
    def test_values(self):
        # published ratios come from unrounded estimates; rounded inputs land within 1e-4
        for meta_d, d, published in ((2.7738, 3.2396, 0.8563), (1.6510, 2.5217, 0.6548)):
            self.assertAlmostEqual(metad.m_ratio(meta_d, d), meta_d / d, places=12)
            self.assertAlmostEqual(metad.m_ratio(meta_d, d), published, delta=1e-4)
        self.assertAlmostEqual(metad.m_ratio(2.7738, 3.2396), 0.85622, places=5)
        self.assertAlmostEqual(metad.m_ratio(1.6510, 2.5217), 0.65472, places=5)

    def test_domain(self):
        with self.assertRaises(DomainError):
            metad.m_ratio(1.0, 0.0)
        with self.assertRaises(DomainError):
            metad.m_ratio(1.0, -0.5)


class TestPadding(unittest.TestCase):
    def test_degenerate(self):
        arr, padded = metad.pad_cells(TOY)
        self.assertFalse(padded)
        counts = np.array(TOY.counts)
        counts[0, 1, 1] = 0
        arr, padded = metad.pad_cells(counts)
        self.assertTrue(padded)
        self.assertEqual(arr[0, 1, 1], 0.25)
        self.assertEqual(arr[0, 0, 0], 40.25)

    def test_policies(self):
        self.assertTrue(metad.pad_cells(TOY, metad.ALWAYS)[1])
        counts = np.array(TOY.counts)
        counts[0, 1, 1] = 0
        self.assertFalse(metad.pad_cells(counts, metad.NEVER)[1])
        with self.assertRaises(DomainError):
            metad.pad_cells(TOY, 'maybe')


class TestFit(unittest.TestCase):
    def test_toy_matches_grid_search(self):
        fit = metad.fit_meta_d(TOY)
        self.assertTrue(fit.converged)
        self.assertAlmostEqual(fit.d_prime_type1, 1.0488, places=3)
        self.assertAlmostEqual(fit.params.meta_c, 0.0, places=9)
        (m, t1, t2), ll = grid_search(TOY.counts)
        self.assertAlmostEqual(fit.params.meta_d, m, delta=2e-3)
        self.assertLess(abs(fit.log_likelihood - ll) / TOY.total, 1e-3)
        self.assertGreaterEqual(fit.log_likelihood, ll - 1e-6)

    def test_ideal_observer_expected_counts(self):
        spec = ObserverSpec(2.0, 0.3, 2.0, [-1.2, -0.6, -0.2], [0.8, 1.2, 1.8])
        fit = metad.fit_meta_d(expected_counts(spec, 10000))
        self.assertTrue(fit.converged)
        self.assertAlmostEqual(fit.m_ratio, 1.0, delta=0.02)
        np.testing.assert_allclose(fit.params.t2_criteria_s2, [0.8, 1.2, 1.8], atol=0.02)

    def test_recovery_observer(self):
        spec = ObserverSpec.from_dict(RECOVERY_OBSERVER)
        fit = metad.fit_meta_d(expected_counts(spec, 10000))
        self.assertAlmostEqual(fit.d_prime_type1, 3.2, places=6)
        self.assertAlmostEqual(fit.params.meta_d, 3.0, delta=0.01)

    def test_random_ideal_observers(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            d = rng.uniform(0.5, 3.5)
            c = rng.uniform(-0.3, 0.3)
            meta_c = c
            gaps = rng.uniform(0.3, 0.6, size=(2, 3))
            spec = ObserverSpec(d, c, d, meta_c - np.cumsum(gaps[0])[::-1], meta_c + np.cumsum(gaps[1]))
            counts = simulate_counts(spec, SimOptions(10000, sample_type2=False))
            fit = metad.fit_meta_d(counts)
            self.assertTrue(0.98 <= fit.m_ratio <= 1.02, (d, c, fit.m_ratio))

    def test_zero_sensitivity(self):
        counts = np.full((2, 2, 2), 10.0)
        with self.assertRaises(FitError):
            metad.fit_meta_d(counts)

    def test_padding_reported(self):
        counts = np.array(TOY.counts)
        counts[1, 0, 1] = 0
        fit = metad.fit_meta_d(counts)
        self.assertTrue(fit.padded)
        self.assertTrue(np.isfinite(fit.params.meta_d))

    def test_budget_exhausted(self):
        fit = metad.fit_meta_d(TOY, max_evals=5)
        self.assertFalse(fit.converged)

    def test_report_round_trip(self):
        fit = metad.fit_meta_d(TOY, meta={'task': 'A_sentiment'})
        d = fit.to_dict()
        self.assertEqual(d['meta'], {'task': 'A_sentiment'})
        self.assertEqual(d['n_s1'], 100)
        again = metad.FitResult.from_dict(d)
        self.assertEqual(again.params.meta_d, fit.params.meta_d)
        self.assertEqual(again.counts, TOY)
        self.assertEqual(again.to_dict(), d)


class TestFitInvariants(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        spec = ObserverSpec.from_dict(RECOVERY_OBSERVER)
        cls.counts = simulate_counts(spec, SimOptions(10000, seed=21))
        cls.fit = metad.fit_meta_d(cls.counts)

    def test_thresholds_increasing(self):
        self.assertTrue(np.all(np.diff(self.fit.params.thresholds()) > 0))

    def test_meta_c_constraint(self):
        p = self.fit.params
        self.assertLessEqual(abs(p.meta_c / p.meta_d - self.fit.c_prime), 1e-9)

    def test_likelihood_dominates_ideal_observer(self):
        p = self.fit.params
        ideal = metad.MetaDParams(self.fit.d_prime_type1, self.fit.c_prime * self.fit.d_prime_type1,
            p.t2_criteria_s1, p.t2_criteria_s2)
        data, _ = metad.pad_cells(self.counts)
        self.assertGreaterEqual(self.fit.objective, metad.log_likelihood(ideal, data) - 1e-6)

    def test_shuffled_confidence_destroys_meta_d(self):
        rng = np.random.default_rng(8)
        values = []
        for _ in range(20):
            shuffled = np.zeros_like(self.counts.counts)
            for r in range(2):
                # permute confidence labels across both stimuli of one response class
                pooled = (self.counts.counts[0, r] + self.counts.counts[1, r]).astype(np.int64)
                shuffled[0, r] = rng.multivariate_hypergeometric(pooled, int(self.counts.counts[0, r].sum()))
                shuffled[1, r] = pooled - shuffled[0, r]
            fit = metad.fit_meta_d(shuffled)
            values.append(fit.params.meta_d)
        self.assertLess(abs(np.mean(values)), 0.15 * self.fit.params.meta_d)

    def test_coarsened_scale(self):
        coarse = self.counts.coarsen([(1, 2, 3), (4, 5)])
        fit = metad.fit_meta_d(coarse)
        self.assertTrue(fit.converged)
        self.assertTrue(0 <= fit.params.meta_d <= 1.5 * fit.d_prime_type1)

    def test_reported_likelihood_uses_observed_counts(self):
        self.assertTrue(self.fit.padded)
        self.assertAlmostEqual(self.fit.log_likelihood, metad.log_likelihood(self.fit.params, self.counts), places=6)
        data, _ = metad.pad_cells(self.counts)
        self.assertAlmostEqual(self.fit.objective, metad.log_likelihood(self.fit.params, data), places=4)
        again = metad.FitResult.from_dict(self.fit.to_dict())
        self.assertEqual(again.objective, self.fit.objective)

    def feasible_sample(self, n, seed):
        """Random feasible parameter points sharing the fit's meta-c constraint."""
        rng = np.random.default_rng(seed)
        h = self.counts.h
        d = self.fit.d_prime_type1
        for _ in range(n):
            meta_d = rng.uniform(0.0, 2.0 * d)
            meta_c = self.fit.c_prime * meta_d
            gaps = rng.exponential(0.5, size=(2, h - 1)) + 1e-3
            yield metad.MetaDParams(meta_d, meta_c, meta_c - np.cumsum(gaps[0])[::-1], meta_c + np.cumsum(gaps[1]))

    def check_feasible_sample(self, n, seed):
        data, _ = metad.pad_cells(self.counts)
        best_obj = max(metad.log_likelihood(p, data) for p in self.feasible_sample(n, seed))
        best_raw = max(metad.log_likelihood(p, self.counts) for p in self.feasible_sample(n, seed))
        self.assertGreaterEqual(self.fit.objective, best_obj - 1e-6)
        self.assertGreaterEqual(self.fit.log_likelihood, best_raw - 1e-6)

    def test_likelihood_dominates_feasible_sample(self):
        self.check_feasible_sample(300, 4)

    @unittest.skipUnless(SLOW, 'set METADUTILS_SLOW=1 to run')
    def test_likelihood_dominates_large_feasible_sample(self):
        self.check_feasible_sample(10000, 5)

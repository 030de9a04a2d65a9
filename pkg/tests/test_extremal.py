import unittest

import math
import time
from fractions import Fraction

import numpy as np

from geocorr.exceptions import BudgetExceeded, DegenerateMarginal
from geocorr.extremal import (CorrPath, beta_count_near_half,
                              breakpoint_count, breakpoints,
                              closed_form_index,
                              equal_breakpoint_count, grid_denominator,
                              max_corr, mean_product_equal_closed,
                              mean_product_max, mean_product_min,
                              mean_product_min_exact, min_corr,
                              min_corr_equal_closed, min_corr_exact,
                              std_product_exact)
from geocorr.extremal.exact import RationalProb
from geocorr.geom import second_moment

RHO_QUARTER = -1862 / 3072


def random_pairs(n, seed, low=0.01, high=0.99):
    """Random parameter pairs with ``p1 + p2 < 1``."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < n:
        p1, p2 = rng.uniform(low, high, 2)
        if p1 + p2 < 1:
            pairs.append((p1, p2))
    return pairs


def small_fraction_pairs(n):
    fractions = sorted({Fraction(a, b) for b in range(2, 11)
                        for a in range(1, b)})
    pairs = [(f1, f2) for f1 in fractions for f2 in fractions if f1 + f2 < 1]
    step = max(len(pairs) // n, 1)
    return pairs[::step][:n]


class TestBreakpoints(unittest.TestCase):

    def test_quarter_grid(self):
        grid = breakpoints(0.25, 0.25)
        expected = np.array([64, 81, 108, 112, 144, 148, 175, 192]) / 256
        np.testing.assert_allclose(grid.points, expected, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(
            grid.labels,
            [(1, 4), (1, 3), (1, 2), (2, 2), (2, 1), (3, 1), (4, 1)])
        self.assertEqual((grid.d1, grid.d2), (4, 4))

    def test_half_case_empty(self):
        grid = breakpoints(0.6, 0.7)
        self.assertEqual(len(grid), 0)
        self.assertEqual(breakpoint_count(0.6, 0.7), (0, 0))

    def test_two_points(self):
        grid = breakpoints(0.5, 0.49)
        np.testing.assert_allclose(grid.points, [0.5, 0.51], atol=1e-15)
        np.testing.assert_array_equal(grid.labels, [(1, 1)])

    def test_grid_endpoints(self):
        for p1, p2 in random_pairs(200, seed=5):
            grid = breakpoints(p1, p2)
            self.assertAlmostEqual(grid.points[0], p1, places=14)
            self.assertAlmostEqual(grid.points[-1], 1 - p2, places=14)
            self.assertTrue(np.all(np.diff(grid.points) >= 0))

    def test_degenerate(self):
        with self.assertRaises(DegenerateMarginal):
            breakpoints(1.0, 0.5)
        with self.assertRaises(DegenerateMarginal):
            min_corr(0.5, 1.0)
        with self.assertRaises(DegenerateMarginal):
            max_corr(1.0, 1.0)
        with self.assertRaises(DegenerateMarginal):
            min_corr_equal_closed(1.0)

    def test_breakpoint_count(self):
        for p1, p2 in random_pairs(1000, seed=8):
            d1 = math.floor(math.log(p1) / math.log(1 - p2))
            d2 = math.floor(math.log(p2) / math.log(1 - p1))
            self.assertEqual(breakpoint_count(p1, p2), (d1, d2))
            self.assertEqual(min_corr(p1, p2).n_breakpoints, d1 + d2)

    def test_equal_count(self):
        self.assertEqual(equal_breakpoint_count(0.25), 4)
        self.assertEqual(equal_breakpoint_count(0.5), 0)


class TestMinCorr(unittest.TestCase):

    def test_mean_product_examples(self):
        self.assertAlmostEqual(mean_product_min(0.25, 0.25), 442 / 256,
                               places=14)
        self.assertEqual(mean_product_min(0.6, 0.7), 0.0)

    def test_examples(self):
        result = min_corr(0.25, 0.25)
        self.assertAlmostEqual(result.rho, RHO_QUARTER, places=13)
        self.assertEqual(result.path, CorrPath.GENERAL_ENUMERATION)
        self.assertEqual(result.n_breakpoints, 8)

        result = min_corr(0.5, 0.5)
        self.assertAlmostEqual(result.rho, -0.5, places=14)
        self.assertEqual(result.path, CorrPath.CLOSED_FORM_HALF)

        result = min_corr(0.6, 0.7)
        self.assertAlmostEqual(result.rho, -math.sqrt(0.12), places=14)
        self.assertEqual(result.e_xy, 0.0)

    def test_assembly(self):
        result = min_corr(0.3, 0.2)
        self.assertAlmostEqual(result.covariance,
                               result.e_xy - (0.7 / 0.3) * (0.8 / 0.2),
                               places=12)
        self.assertAlmostEqual(
            result.rho,
            result.covariance / math.sqrt(0.7 / 0.09 * 0.8 / 0.04),
            places=12)

    def test_half_line(self):
        for p in np.linspace(0.5, 0.999, 500):
            self.assertLessEqual(abs(min_corr(p, p).rho - (p - 1)), 1e-12,
                                 msg=f"p={p}")

    def test_symmetry(self):
        for p1, p2 in random_pairs(300, seed=13, low=0.005):
            self.assertLessEqual(
                abs(min_corr(p1, p2).rho - min_corr(p2, p1).rho), 1e-13)

    def test_range(self):
        for p1, p2 in random_pairs(200, seed=17):
            lo, hi = min_corr(p1, p2).rho, max_corr(p1, p2).rho
            self.assertTrue(-1 < lo <= 0)
            self.assertTrue(0 < hi <= 1)

    def test_continuity(self):
        h = 1e-6
        for p in np.linspace(0.02, 0.98, 200):
            step = abs(min_corr(p + h, p + h).rho - min_corr(p, p).rho)
            self.assertLessEqual(step, 10 * h, msg=f"p={p}")

    def test_linear_scaling(self):
        def median_time(p, repeats=5):
            times = []
            for _ in range(repeats):
                start = time.perf_counter()
                result = min_corr(p, p)
                times.append(time.perf_counter() - start)
            return result.n_breakpoints, float(np.median(times))

        # per-call overhead, measured on a two-point grid
        _, overhead = median_time(0.45)
        sizes, times = [], []
        for p in [1e-2, 1e-3, 1e-4, 1e-5]:
            n, elapsed = median_time(p)
            sizes.append(n)
            times.append(max(elapsed - overhead, 1e-9))
        self.assertLess(times[-1], 5.0)
        slope = np.polyfit(np.log(sizes), np.log(times), 1)[0]
        self.assertTrue(0.85 <= slope <= 1.15, msg=f"slope {slope:.3f}")


class TestMaxCorr(unittest.TestCase):

    def test_identical_marginals(self):
        for p in [0.01, 0.25, 0.5, 0.9]:
            result = max_corr(p, p)
            self.assertAlmostEqual(result.rho, 1.0, places=12)
            self.assertEqual(result.path, CorrPath.CLOSED_FORM_EQUAL_P)
            self.assertAlmostEqual(result.e_xy, second_moment(p))

    def test_unequal_marginals(self):
        result = max_corr(0.3, 0.6)
        self.assertTrue(0 < result.rho < 1)
        self.assertEqual(result.path, CorrPath.GENERAL_ENUMERATION)

    def test_tail_truncation(self):
        loose, _ = mean_product_max(0.3, 0.6, tol=1e-6)
        tight, n = mean_product_max(0.3, 0.6, tol=1e-14)
        self.assertGreater(n, 0)
        self.assertLessEqual(abs(loose - tight), 1e-5 * tight)

    def test_cap_warning(self):
        with self.assertWarns(RuntimeWarning):
            mean_product_max(0.3, 0.6, tol=1e-30, cap=50)


class TestClosedForm(unittest.TestCase):

    def test_quarter(self):
        self.assertAlmostEqual(mean_product_equal_closed(0.25), 442 / 256,
                               places=13)
        result = min_corr_equal_closed(0.25)
        self.assertAlmostEqual(result.rho, RHO_QUARTER, places=12)
        self.assertEqual(result.path, CorrPath.CLOSED_FORM_EQUAL_P)

    def test_half_branch(self):
        result = min_corr_equal_closed(0.75)
        self.assertEqual(result.e_xy, 0.0)
        self.assertAlmostEqual(result.rho, -0.25, places=14)
        self.assertEqual(result.path, CorrPath.CLOSED_FORM_HALF)

    def test_matches_engine(self):
        self.assertLessEqual(
            abs(min_corr_equal_closed(0.1).rho - min_corr(0.1, 0.1).rho),
            1e-10)
        for p in np.linspace(0.01, 0.5, 502)[1:-1]:
            diff = abs(min_corr_equal_closed(p).rho - min_corr(p, p).rho)
            self.assertLessEqual(diff, 1e-10, msg=f"p={p}")

    def test_closed_form_index(self):
        idx = closed_form_index(0.25)
        self.assertEqual(idx.k, 2)
        self.assertEqual(idx.c, (4, 2))
        self.assertEqual(idx.case, 1)
        with self.assertRaises(ValueError):
            closed_form_index(0.5)

    def test_remainder_cases_occur(self):
        cases = {closed_form_index(p).case for p in np.linspace(0.01, 0.49, 500)}
        self.assertTrue(cases <= {1, 2, 3})
        self.assertGreater(len(cases), 1)

    def test_beta_count(self):
        for p in np.linspace(0.0005, 0.4995, 1000):
            self.assertIn(beta_count_near_half(p), (0, 1, 2), msg=f"p={p}")


class TestExact(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(mean_product_min_exact("1/4", "1/4"),
                         Fraction(442, 256))
        self.assertEqual(mean_product_min_exact(Fraction(1, 2),
                                                Fraction(1, 3)),
                         Fraction(1, 6))
        self.assertEqual(mean_product_min_exact("3/5", "7/10"), 0)

    def test_quarter_correlation(self):
        result = min_corr_exact(Fraction(1, 4), Fraction(1, 4))
        self.assertEqual(result.path, CorrPath.EXACT_RATIONAL)
        self.assertEqual(result.e_xy_exact, Fraction(442, 256))
        self.assertEqual(result.rho_exact, Fraction(-1862, 3072))
        self.assertEqual(grid_denominator("1/4", "1/4"), 256)
        self.assertEqual(std_product_exact("1/4", "1/4"), 12)
        self.assertLessEqual(abs(result.rho - min_corr(0.25, 0.25).rho),
                             1e-12)

    def test_irrational_scale(self):
        result = min_corr_exact(Fraction(1, 2), Fraction(1, 3))
        self.assertIsNone(result.rho_exact)
        self.assertAlmostEqual(result.rho, min_corr(0.5, 1 / 3).rho,
                               places=12)

    def test_matches_float(self):
        for f1, f2 in small_fraction_pairs(50):
            exact = float(mean_product_min_exact(f1, f2))
            approx = mean_product_min(float(f1), float(f2))
            self.assertLessEqual(abs(exact - approx),
                                 1e-12 * max(abs(exact), 1.0),
                                 msg=f"{f1}, {f2}")

    def test_budget(self):
        with self.assertRaises(BudgetExceeded):
            mean_product_min_exact(Fraction(1, 1000), Fraction(1, 1000))
        with self.assertRaises(BudgetExceeded):
            mean_product_min_exact("1/20", "1/20", bit_budget=100)
        self.assertGreater(mean_product_min_exact("1/20", "1/20"), 0)

    def test_rational_prob(self):
        self.assertEqual(RationalProb.parse("0.25").value, Fraction(1, 4))
        self.assertEqual(RationalProb.parse("2/8").denominator, 4)
        with self.assertRaises(ValueError):
            RationalProb.parse("5/4")
        with self.assertRaises(ValueError):
            RationalProb.parse("one half")
        with self.assertRaises(DegenerateMarginal):
            mean_product_min_exact(1, "1/2")

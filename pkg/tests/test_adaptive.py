import json
import math
import unittest
import logging as log

import numpy as np

from shearwave.dispersion.adaptive import (
    build_plan,
    h_delta,
    pf_radial_adaptive,
    pu_blend,
    pu_weights,
    remap_eigenfunction,
    solve_forward_adaptive,
)
from shearwave.dispersion.collocation import solve_forward
from shearwave.dispersion.pathfollow import PathSolution, dense_eval
from shearwave.dispersion.profiles import builtin_profile
from shearwave.dispersion.spectral import SeriesConvergence, chebyshev_coefficients, chebyshev_operator, series_convergence
from shearwave.dispersion.utils.errors import InvalidArgumentError, OutOfRangeError

L16 = -math.log(1e-16)


def still_water_speed(k, F2=0.05):
    k = np.asarray(k, dtype=float)
    return np.sqrt(np.tanh(k) / (F2 * k))


def linear_path(a: float, b: float) -> PathSolution:
    """A two-point path carrying c(k) = 2 + 0.01 k, reproduced exactly by cubic Hermite."""
    t = np.array([a, b])
    v = np.column_stack([np.ones(2), 2.0 + 0.01 * t])
    vdot = np.column_stack([np.zeros(2), np.full(2, 0.01)])
    return PathSolution(t=t, v=v, vdot=vdot, t_mid=None, v_mid=None, tol=1e-10)


class TestEffectiveDepth(unittest.TestCase):
    def test_capped(self):
        self.assertEqual(h_delta(1.0, 1e-16), 1.0)

    def test_large_wavenumber(self):
        self.assertAlmostEqual(h_delta(100.0, 1e-16), 0.368414, places=6)

    def test_domain(self):
        with self.assertRaises(InvalidArgumentError):
            h_delta(0.0)
        with self.assertRaises(InvalidArgumentError):
            h_delta(1.0, delta=1.0)


class TestDepthPlan(unittest.TestCase):
    def setUp(self):
        self.plan = build_plan(1e-16, 0.3, 0.8, k_max=1000.0)

    def test_intervals(self):
        (a0, b0), (a1, b1), (a2, b2) = self.plan.intervals[:3]
        self.assertEqual(a0, 0.0)
        self.assertAlmostEqual(b0, 46.05, places=2)
        self.assertAlmostEqual(a1, 36.84, places=2)
        self.assertAlmostEqual(b1, 153.51, places=2)
        self.assertAlmostEqual(a2, 122.80, places=2)
        self.assertAlmostEqual(b2, 511.69, places=2)

    def test_depths(self):
        self.assertEqual(self.plan.depths[0], 1.0)
        self.assertAlmostEqual(self.plan.depths[1], 0.62, places=14)
        self.assertAlmostEqual(self.plan.depths[2], 0.186, places=14)
        self.assertTrue(all(0 < h <= 1 for h in self.plan.depths))

    def test_consecutive_intervals_overlap(self):
        for lo, hi in self.plan.overlaps():
            self.assertLess(lo, hi)

    def test_depth_bounds(self):
        self.assertTrue(all(self.plan.depth_bounds_attained()))

    def test_truncated_at_k_max(self):
        plan = build_plan(1e-16, 0.3, 0.8, k_max=250.0)
        self.assertEqual(len(plan), 3)
        self.assertEqual(plan.k_max, 250.0)
        self.assertEqual(plan.covering(40.0), [0, 1])
        self.assertEqual(plan.covering(100.0), [1])

    def test_invalid_constants(self):
        with self.assertRaises(InvalidArgumentError):
            build_plan(1e-16, 0.8, 0.3)
        with self.assertRaises(InvalidArgumentError):
            build_plan(0.0, 0.3, 0.8)

    def test_json(self):
        data = json.loads(self.plan.to_json())
        self.assertEqual(data["weights"], "exp-ramp")
        self.assertEqual(len(data["intervals"]), len(self.plan))
        self.assertEqual(data["intervals"][1]["depth"], self.plan.depths[1])


class TestPartitionOfUnity(unittest.TestCase):
    def setUp(self):
        self.plan = build_plan(1e-16, 0.3, 0.8, k_max=250.0)

    def test_weights_sum_to_one(self):
        k = np.geomspace(0.025, 250.0, 10_000)
        phi = pu_weights(self.plan, k)
        self.assertEqual(phi.shape, (10_000, 3))
        self.assertTrue(np.all(phi >= 0))
        np.testing.assert_allclose(phi.sum(axis=1), 1.0, rtol=0, atol=1e-15)

    def test_single_interval_regions(self):
        np.testing.assert_array_equal(pu_weights(self.plan, 10.0), [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(pu_weights(self.plan, 100.0), [0.0, 1.0, 0.0])

    def test_overlap_blends_two(self):
        w = pu_weights(self.plan, 0.5 * (L16 / 0.8 + L16))
        self.assertEqual(int(np.count_nonzero(w)), 2)
        self.assertAlmostEqual(w[0], 0.5, places=12)

    def test_weights_are_continuous_at_overlap_edges(self):
        a1, b0 = self.plan.intervals[1][0], self.plan.intervals[0][1]
        eps = 1e-9
        np.testing.assert_allclose(pu_weights(self.plan, a1 - eps), pu_weights(self.plan, a1 + eps), atol=1e-12)
        np.testing.assert_allclose(pu_weights(self.plan, b0 - eps), pu_weights(self.plan, b0 + eps), atol=1e-12)

    def test_blend_reproduces_common_function(self):
        solutions = [linear_path(a, b) for a, b in self.plan.intervals]
        k = np.linspace(0.5, 249.0, 301)
        np.testing.assert_allclose(pu_blend(solutions, self.plan, k), 2.0 + 0.01 * k, rtol=1e-14)

    def test_blend_outside_coverage(self):
        solutions = [linear_path(a, b) for a, b in self.plan.intervals]
        with self.assertRaises(OutOfRangeError):
            pu_blend(solutions, self.plan, 300.0)
        with self.assertRaises(OutOfRangeError):
            pu_blend([solutions[0], None, None], self.plan, 100.0)


class TestAdaptiveSolvers(unittest.TestCase):
    def test_collocation_on_effective_depth(self):
        reduced = builtin_profile("quiescent").project(0.0)
        k = np.geomspace(0.025, 250.0, 25)
        for kk in k:
            sol, op = solve_forward_adaptive(reduced, 64, float(kk), delta=2.0**-52)
            self.assertEqual(op.depth, h_delta(float(kk), 2.0**-52))
            self.assertAlmostEqual(sol.c, float(still_water_speed(kk)), delta=1e-9 * sol.c)

    def test_blended_path_still_water(self):
        reduced = builtin_profile("quiescent").project(0.0)
        blended = pf_radial_adaptive(reduced, (0.025, 250.0), tol=1e-10, log_k=True)
        self.assertEqual(len(blended.plan), len(blended.solutions))
        k = np.geomspace(0.025, 250.0, 300)
        np.testing.assert_allclose(blended(k), still_water_speed(k), rtol=1e-7)
        with self.assertRaises(OutOfRangeError):
            blended(300.0)

    def test_remap(self):
        reduced = builtin_profile("quiescent").project(0.0)
        op = chebyshev_operator(32, 0.4)
        sol = solve_forward(reduced, op, 100.0)
        z = np.array([-1.0, -0.5, -0.4, op.z[3], 0.0])
        out = remap_eigenfunction(sol, op, z)
        self.assertEqual(out[0], 0.0)
        self.assertEqual(out[1], 0.0)
        self.assertEqual(out[3], sol.w[3])
        self.assertEqual(out[4], sol.w[0])
        with self.assertRaises(OutOfRangeError):
            remap_eigenfunction(sol, op, 0.5)

class TestBlendedShearPath(unittest.TestCase):
    ORDER = 64
    TOL = 1e-8

    @classmethod
    def setUpClass(cls):
        cls.reduced = builtin_profile("UT").project(0.0)
        cls.blended = pf_radial_adaptive(cls.reduced, (10.0, 120.0), tol=cls.TOL, order=cls.ORDER, jobs=2)
        cls.overlap = cls.blended.plan.overlaps()[0]

    def test_against_collocation(self):
        rng = np.random.default_rng(5)
        for k in rng.uniform(10.0, 120.0, 12):
            with self.subTest(k=k):
                direct, _ = solve_forward_adaptive(self.reduced, self.ORDER, float(k))
                self.assertAlmostEqual(float(self.blended(k)), direct.c, delta=10 * self.TOL * direct.c)

    def test_no_jump_at_overlap_edges(self):
        eps = 1e-9
        for edge in self.overlap:
            with self.subTest(edge=edge):
                left, right = self.blended(edge - eps), self.blended(edge + eps)
                self.assertLess(abs(right - left), 1e-8)

    def test_eigenfunction_on_own_nodes(self):
        k = 70.0
        j = int(np.argmax(self.blended.weights(k)))
        sol = self.blended.solutions[j]
        z = sol.operator.z[:-1]
        w = self.blended.eigenfunction(k, z)
        np.testing.assert_allclose(w, dense_eval(sol, k, eigenvector=True).w, atol=1e-13)
        self.assertAlmostEqual(np.linalg.norm(w), 1.0, delta=1e-6)

    def test_eigenfunction_continuous_across_overlap(self):
        # the dominant subinterval switches where both weights are one half
        middle = 0.5 * (self.overlap[0] + self.overlap[1])
        below, above = middle - 1e-9, middle + 1e-9
        self.assertNotEqual(np.argmax(self.blended.weights(below)), np.argmax(self.blended.weights(above)))
        shallow = min(self.blended.plan.depths[:2])
        z = np.linspace(-0.9 * shallow, 0.0, 40)
        w_below = self.blended.eigenfunction(below, z)
        w_above = self.blended.eigenfunction(above, z)
        np.testing.assert_allclose(w_below / w_below[-1], w_above / w_above[-1], atol=1e-6)

    def test_eigenfunction_outside_span(self):
        with self.assertRaises(OutOfRangeError):
            self.blended.eigenfunction(5.0, 0.0)


class TestResolution(unittest.TestCase):
    def coefficients_needed(self, k: float) -> SeriesConvergence:
        sol, _ = solve_forward_adaptive(builtin_profile("UT").project(0.0), 64, k)
        return series_convergence(chebyshev_coefficients(np.append(sol.w, 0.0)))

    def test_effective_depth_bounds_required_order(self):
        moderate, deep = self.coefficients_needed(50.0), self.coefficients_needed(250.0)
        self.assertTrue(moderate.converged)
        self.assertTrue(deep.converged)
        self.assertLessEqual(deep.required_n, 56)
        self.assertLessEqual(abs(deep.required_n - moderate.required_n), 6)



if __name__ == "__main__":
    log.getLogger().setLevel(log.INFO)
    unittest.main()

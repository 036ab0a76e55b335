import math
import unittest
import logging as log

import numpy as np

from shearwave.dispersion.collocation import (
    EigenPair,
    QuadraticPencil,
    assemble_backward,
    assemble_forward,
    normalise_eigenvector,
    reconstruct_flow,
    select_branch,
    solve_backward,
    solve_forward,
    solve_quadratic,
)
from shearwave.dispersion.diagnostics import backward_error_quadratic
from shearwave.dispersion.profiles import EssentialRange, builtin_profile, combine_profiles, essential_range
from shearwave.dispersion.spectral import chebyshev_operator
from shearwave.dispersion.utils.errors import (
    CriticalLayerError,
    InvalidArgumentError,
    NoPropagatingModeError,
)


def still_water_speed(k: float, F2: float = 0.05, h: float = 1.0) -> float:
    return math.sqrt(math.tanh(k * h) / (F2 * k))


def constant_vorticity_speed(k: float, sigma: float, F2: float = 0.05) -> float:
    T = math.tanh(k)
    return sigma - sigma * T / (2 * k) + math.sqrt(sigma**2 * T**2 / (4 * k**2) + T / (F2 * k))


class TestForward(unittest.TestCase):
    def setUp(self):
        self.op = chebyshev_operator(64)

    def test_still_water(self):
        reduced = builtin_profile("quiescent").project(0.0)
        sol = solve_forward(reduced, self.op, 5.0)
        self.assertAlmostEqual(sol.c, still_water_speed(5.0), delta=1e-10 * sol.c)
        self.assertAlmostEqual(sol.c, 2.0, delta=1e-3)
        self.assertEqual(sol.k, 5.0)
        self.assertEqual(sol.warnings, ())

    def test_constant_vorticity(self):
        for sigma in (0.1, 0.2, 0.5):
            reduced = builtin_profile("linear", a=sigma).project(0.0)
            for k in np.geomspace(0.1, 20.0, 12):
                with self.subTest(sigma=sigma, k=k):
                    sol = solve_forward(reduced, self.op, float(k))
                    expected = constant_vorticity_speed(float(k), sigma)
                    self.assertAlmostEqual(sol.c, expected, delta=1e-8 * expected)

    def test_constant_vorticity_reference_value(self):
        reduced = builtin_profile("linear", a=0.2).project(0.0)
        self.assertAlmostEqual(solve_forward(reduced, self.op, 1.0).c, 4.0274, places=4)

    def test_ut_branch_is_above_current(self):
        reduced = builtin_profile("UT").project(0.0)
        sol = solve_forward(reduced, self.op, 1.0)
        self.assertGreater(sol.c, essential_range(reduced).hi)
        self.assertIsInstance(sol.c, float)
        self.assertAlmostEqual(np.linalg.norm(sol.w), 1.0, places=12)
        self.assertGreaterEqual(sol.w[0], 0.0)
        self.assertEqual(sol.v.size, 65)

    def test_pencil_residual(self):
        reduced = builtin_profile("UT").project(0.0)
        sol = solve_forward(reduced, self.op, 2.5)
        pencil = assemble_forward(reduced, self.op, 2.5)
        self.assertLess(backward_error_quadratic(pencil.A2, pencil.A1, pencil.A0, sol.c, sol.w), 1e-10)

    def test_invalid_wavenumber(self):
        reduced = builtin_profile("UT").project(0.0)
        with self.assertRaises(InvalidArgumentError):
            solve_forward(reduced, self.op, 0.0)


class TestQuadratic(unittest.TestCase):
    def test_scalar_pencil(self):
        pencil = QuadraticPencil(A2=np.array([[1.0]]), A1=np.array([[0.0]]), A0=np.array([[-4.0]]))
        roots = sorted(p.c.real for p in solve_quadratic(pencil))
        np.testing.assert_allclose(roots, [-2.0, 2.0], atol=1e-14)

    def test_eigenpairs_satisfy_pencil(self):
        rng = np.random.default_rng(3)
        A2, A1, A0 = (rng.standard_normal((4, 4)) for _ in range(3))
        pencil = QuadraticPencil(A2=A2, A1=A1, A0=A0)
        pairs = solve_quadratic(pencil)
        self.assertEqual(len(pairs), 8)
        for p in pairs:
            self.assertLess(backward_error_quadratic(A2, A1, A0, p.c, p.w), 1e-10)

    def test_branch_filters(self):
        ess = EssentialRange(0.0, 1.0)
        pairs = [EigenPair(c=1 + 1j, w=np.ones(2)), EigenPair(c=1e9, w=np.ones(2))]
        with self.assertRaises(NoPropagatingModeError):
            select_branch(pairs, ess, k=1.0)
        pairs.append(EigenPair(c=0.5, w=np.ones(2)))
        pairs.append(EigenPair(c=3.0 + 0j, w=np.array([-1.0, 1.0])))
        best = select_branch(pairs, ess, k=1.0)
        self.assertEqual(best.c, 3.0)
        self.assertEqual(best.warnings, ())
        self.assertGreaterEqual(best.w[0], 0.0)

    def test_branch_inside_essential_range_warns(self):
        ess = EssentialRange(0.0, 1.0)
        best = select_branch([EigenPair(c=0.5, w=np.ones(2))], ess, k=1.0)
        self.assertEqual(len(best.warnings), 1)
        self.assertIn("critical layer", best.warnings[0])

    def test_normalise_eigenvector(self):
        w = normalise_eigenvector(np.array([-2j, 1j, 0.5j]))
        self.assertAlmostEqual(np.linalg.norm(w), 1.0, places=15)
        self.assertFalse(np.iscomplexobj(w))
        self.assertGreater(w[0], 0.0)


class TestBackward(unittest.TestCase):
    def setUp(self):
        self.op = chebyshev_operator(64)
        self.still = builtin_profile("quiescent").project(0.0)

    def test_still_water(self):
        sol = solve_backward(self.still, self.op, 2.0)
        self.assertAlmostEqual(math.tanh(sol.k) / sol.k, 0.05 * 2.0**2, delta=1e-10)
        self.assertAlmostEqual(sol.k, 5.0, delta=1e-2)

    def test_round_trip(self):
        reduced = builtin_profile("UT").project(0.0)
        for c in (2.0, 3.0):
            k = solve_backward(reduced, self.op, c).k
            self.assertAlmostEqual(solve_forward(reduced, self.op, k).c, c, delta=1e-8 * c)

    def test_critical_layer(self):
        reduced = builtin_profile("UT").project(0.0)
        with self.assertRaises(CriticalLayerError) as ctx:
            assemble_backward(reduced, self.op, 0.9)
        self.assertLessEqual(ctx.exception.z, 0.0)
        self.assertEqual(ctx.exception.payload()["error"], "CriticalLayerError")


class TestFlowField(unittest.TestCase):
    def setUp(self):
        self.op = chebyshev_operator(48)
        self.profile = combine_profiles(builtin_profile("UT"), builtin_profile("linear", a=0.2))

    def test_incompressible(self):
        theta, k = 0.3, 1.5
        sol = solve_forward(self.profile.project(theta), self.op, k)
        kx, ky = k * math.cos(theta), k * math.sin(theta)
        flow = reconstruct_flow(self.profile, (kx, ky), sol, self.op)
        self.assertEqual(flow.u.shape, (49,))
        self.assertEqual(flow.w[-1], 0.0)
        div = 1j * kx * flow.u + 1j * ky * flow.v + self.op.D @ flow.w
        self.assertLess(np.abs(div).max(), 1e-10 * np.abs(self.op.D @ flow.w).max())

    def test_mismatched_wavevector(self):
        sol = solve_forward(self.profile.project(0.0), self.op, 1.0)
        with self.assertRaises(InvalidArgumentError):
            reconstruct_flow(self.profile, (2.0, 0.0), sol, self.op)

class TestSpectralConvergence(unittest.TestCase):
    def test_ut_converges_with_resolution(self):
        reduced = builtin_profile("UT").project(0.0)
        k = 1.0
        reference = solve_forward(reduced, chebyshev_operator(64), k).c
        orders = (20, 24, 32, 40, 48)
        errors = [abs(solve_forward(reduced, chebyshev_operator(n), k).c - reference) for n in orders]
        floor = 1e-12 * reference
        rises = sum(1 for a, b in zip(errors, errors[1:]) if b > a and b > floor)
        self.assertLessEqual(rises, 1, errors)
        self.assertLess(errors[-1], 1e-11 * reference)
        self.assertLess(errors[-1], errors[0])


class TestRandomCases(unittest.TestCase):
    def test_forward_solutions(self):
        rng = np.random.default_rng(7)
        op = chebyshev_operator(48)
        for case in range(100):
            theta = float(rng.uniform(0.0, math.pi / 2))
            k = float(np.exp(rng.uniform(math.log(0.1), math.log(20.0))))
            sigma = float(rng.uniform(0.0, 0.5))
            linear = case % 2 == 0
            if linear:
                profile = builtin_profile("linear", a=sigma)
            else:
                profile = combine_profiles(builtin_profile("UT"), builtin_profile("linear", a=sigma))
            reduced = profile.project(theta)
            with self.subTest(case=case, linear=linear, theta=theta, k=k, sigma=sigma):
                sol = solve_forward(reduced, op, k)
                pencil = assemble_forward(reduced, op, k)
                self.assertLess(backward_error_quadratic(pencil.A2, pencil.A1, pencil.A0, sol.c, sol.w), 1e-10)
                self.assertAlmostEqual(np.linalg.norm(sol.w), 1.0, places=12)
                self.assertGreaterEqual(sol.w[0], 0.0)
                self.assertGreater(sol.c, essential_range(reduced).hi)
                if linear:
                    expected = constant_vorticity_speed(k, sigma * math.cos(theta))
                    self.assertAlmostEqual(sol.c, expected, delta=1e-8 * expected)



if __name__ == "__main__":
    log.getLogger().setLevel(log.INFO)
    unittest.main()

import math
import unittest
import logging as log

import numpy as np

from shearwave.dispersion.spectral import (
    barycentric_eval,
    cgl_points,
    chebyshev_coefficients,
    chebyshev_operator,
    diff_matrices,
    map_operator,
    reference_operator,
    series_convergence,
)
from shearwave.dispersion.utils.errors import InvalidArgumentError


class TestCGLPoints(unittest.TestCase):
    def test_small_orders(self):
        np.testing.assert_allclose(cgl_points(1), [1.0, -1.0], atol=1e-15)
        np.testing.assert_allclose(cgl_points(2), [1.0, 0.0, -1.0], atol=1e-15)
        half = math.sqrt(2.0) / 2.0
        np.testing.assert_allclose(cgl_points(4), [1.0, half, 0.0, -half, -1.0], atol=1e-15)

    def test_symmetric(self):
        x = cgl_points(17)
        np.testing.assert_allclose(x, -x[::-1], atol=1e-16)

    def test_invalid_order(self):
        with self.assertRaises(InvalidArgumentError):
            cgl_points(0)


class TestDiffMatrices(unittest.TestCase):
    def setUp(self):
        self.op = reference_operator(16)

    def test_constant_is_annihilated(self):
        ones = np.ones(self.op.zeta.size)
        scale = np.abs(self.op.D).max()
        self.assertLess(np.abs(self.op.D @ ones).max(), 1e-13 * scale)
        self.assertLess(np.abs(self.op.D2 @ ones).max(), 1e-13 * np.abs(self.op.D2).max())

    def test_linear_and_quadratic(self):
        x = self.op.zeta
        np.testing.assert_allclose(self.op.D @ x, np.ones_like(x), atol=1e-10)
        np.testing.assert_allclose(self.op.D2 @ x**2, 2.0 * np.ones_like(x), atol=1e-8)

    def test_arbitrary_nodes(self):
        x = np.array([0.0, 0.3, 0.5, 1.1])
        D, D2 = diff_matrices(x)
        np.testing.assert_allclose(D @ x**3, 3.0 * x**2, atol=1e-10)
        np.testing.assert_allclose(D2 @ x**3, 6.0 * x, atol=1e-9)

    def test_duplicate_nodes(self):
        with self.assertRaises(InvalidArgumentError):
            diff_matrices(np.array([0.0, 0.5, 0.5]))

    def test_too_few_nodes(self):
        with self.assertRaises(InvalidArgumentError):
            diff_matrices(np.array([0.0]))


class TestMapOperator(unittest.TestCase):
    def test_surface_and_bottom(self):
        op = map_operator(reference_operator(8), 0.5)
        self.assertEqual(op.z[0], 0.0)
        self.assertAlmostEqual(op.z[-1], -0.5, places=15)
        self.assertEqual(op.order, 8)

    def test_depth_two_is_unscaled(self):
        ref = reference_operator(8)
        op = map_operator(ref, 2.0)
        np.testing.assert_allclose(op.z, ref.zeta - 1.0, atol=1e-15)
        np.testing.assert_allclose(op.D, ref.D, rtol=1e-14, atol=1e-14)
        np.testing.assert_allclose(op.D2, ref.D2, rtol=1e-14, atol=1e-12)

    def test_mapped_derivative(self):
        op = chebyshev_operator(12, 0.4)
        np.testing.assert_allclose(op.D @ op.z, np.ones(13), atol=1e-10)
        np.testing.assert_allclose(op.D2 @ op.z**2, 2.0 * np.ones(13), atol=1e-7)

    def test_invalid_depth(self):
        with self.assertRaises(InvalidArgumentError):
            map_operator(reference_operator(4), 0.0)

    def test_operator_is_read_only(self):
        op = chebyshev_operator(6)
        with self.assertRaises(ValueError):
            op.D[0, 0] = 1.0

    def test_interior_blocks(self):
        op = chebyshev_operator(6)
        self.assertEqual(op.d_surface.shape, (6,))
        self.assertEqual(op.D2_interior.shape, (5, 6))
        self.assertEqual(op.I_interior.shape, (5, 6))


class TestBarycentric(unittest.TestCase):
    def setUp(self):
        self.x = cgl_points(8)

    def test_node_returns_stored_value(self):
        values = np.cos(3.0 * self.x)
        self.assertEqual(barycentric_eval(self.x, values, self.x[3]), values[3])

    def test_constant(self):
        out = barycentric_eval(self.x, np.full(9, 2.5), np.linspace(-1, 1, 7))
        np.testing.assert_allclose(out, 2.5, rtol=1e-14)

    def test_quadratic_at_midpoints(self):
        mids = 0.5 * (self.x[:-1] + self.x[1:])
        out = barycentric_eval(self.x, self.x**2, mids)
        np.testing.assert_allclose(out, mids**2, atol=1e-14)

    def test_matrix_values(self):
        values = np.column_stack([self.x, self.x**2])
        out = barycentric_eval(self.x, values, [0.1, 0.2])
        np.testing.assert_allclose(out, [[0.1, 0.01], [0.2, 0.04]], atol=1e-14)

    def test_reproduces_polynomials(self):
        rng = np.random.default_rng(2)
        x = cgl_points(16)
        q = rng.uniform(-1.0, 1.0, 100)
        for degree in (0, 5, 16):
            with self.subTest(degree=degree):
                p = np.polynomial.Chebyshev(rng.standard_normal(degree + 1))
                scale = np.abs(p.coef).sum()
                np.testing.assert_allclose(barycentric_eval(x, p(x), q), p(q), rtol=0, atol=1e-12 * scale)

    def test_length_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            barycentric_eval(self.x, np.ones(3), 0.0)


class TestSeriesConvergence(unittest.TestCase):
    def test_chebyshev_coefficients_of_t3(self):
        x = cgl_points(8)
        coeffs = chebyshev_coefficients(4 * x**3 - 3 * x)
        expected = np.zeros(9)
        expected[3] = 1.0
        np.testing.assert_allclose(coeffs, expected, atol=1e-14)

    def test_geometric_decay_with_plateau(self):
        j = np.arange(100)
        coeffs = np.where(j < 53, 2.0 ** -j, 1e-16)
        result = series_convergence(coeffs)
        self.assertTrue(result.converged)
        self.assertEqual(result.required_n, 53)

    def test_no_decay(self):
        result = series_convergence(np.ones(40))
        self.assertFalse(result.converged)
        self.assertIsNone(result.required_n)

    def test_all_zero(self):
        self.assertEqual(tuple(series_convergence(np.zeros(10))), (True, 0))

    def test_empty(self):
        with self.assertRaises(InvalidArgumentError):
            series_convergence(np.array([]))


if __name__ == "__main__":
    log.getLogger().setLevel(log.INFO)
    unittest.main()

import math
import unittest
import logging as log

import numpy as np

from shearwave.dispersion.benchmark import (
    CSV_COLUMNS,
    BenchmarkRow,
    benchmark,
    break_even,
    loglog_slope,
    stability_sweep,
)
from shearwave.dispersion.profiles import builtin_profile
from shearwave.dispersion.spectral import chebyshev_operator
from shearwave.dispersion.utils.consts import ACCURACY_PRESETS
from shearwave.dispersion.utils.errors import InvalidArgumentError


def cl_row(n_q: int, seconds: float, target: float = 1e-7) -> BenchmarkRow:
    return BenchmarkRow("CL-c", n_q, 40, target, "total", seconds, 3, 0.0)


def pf_row(n_q: int, build: float, query: float, target: float = 1e-7) -> BenchmarkRow:
    return BenchmarkRow("PF", n_q, 40, target, "build+query", build + query, 3, 0.0, build, query)


class TestStabilitySweep(unittest.TestCase):
    def setUp(self):
        self.reduced = builtin_profile("UT").project(0.0)
        self.op = chebyshev_operator(32)

    def test_backward_stable(self):
        k = np.geomspace(0.2, 20.0, 6)
        report = stability_sweep(self.reduced, self.op, k)
        np.testing.assert_array_equal(report.k, k)
        self.assertTrue(np.all(report.eta_Q < 1e-10))
        self.assertTrue(np.all(report.eta_L < 1e-12))
        self.assertTrue(np.all(report.kappa_L >= 1.0))
        self.assertTrue(np.all(np.isfinite(report.kappa_Q)))
        agg = report.aggregate()
        self.assertEqual(agg["eta_Q"], float(report.eta_Q.max()))
        self.assertEqual(report.meta["N_z"], 32)

    def test_linear_solve_at_roundoff(self):
        report = stability_sweep(self.reduced, chebyshev_operator(64), np.geomspace(0.5, 10.0, 5))
        self.assertTrue(np.all(report.eta_L < 1e-14), report.eta_L)

    def test_empty_sweep(self):
        with self.assertRaises(InvalidArgumentError):
            stability_sweep(self.reduced, self.op, [])


class TestBenchmark(unittest.TestCase):
    def test_rows(self):
        reduced = builtin_profile("UT").project(0.0)
        rows = benchmark(reduced, methods=("CL-c", "PF"), n_q_list=(2, 4), targets=(1e-4,), reps=1, k_range=(0.5, 2.0))
        self.assertEqual([(r.method, r.N_q) for r in rows], [("CL-c", 2), ("CL-c", 4), ("PF", 2), ("PF", 4)])
        cl, pf = rows[0], rows[2]
        self.assertEqual(cl.phase, "total")
        self.assertTrue(math.isnan(cl.build_seconds))
        self.assertEqual(cl.N_z, ACCURACY_PRESETS[1e-4][0])
        self.assertEqual(pf.phase, "build+query")
        self.assertGreater(pf.build_seconds, 0.0)
        self.assertEqual(rows[2].build_seconds, rows[3].build_seconds)
        self.assertAlmostEqual(pf.median_seconds, pf.build_seconds + pf.query_seconds, places=12)
        self.assertEqual(tuple(cl.to_dict()), CSV_COLUMNS)

    def test_polar_field_rows(self):
        rows = benchmark(
            builtin_profile("UT"),
            methods=("CL-c", "PF-G"),
            n_q_list=(3, 6),
            targets=(1e-4,),
            reps=1,
            k_range=(0.5, 2.0),
            grid=(8, 6),
        )
        self.assertEqual([(r.method, r.N_q) for r in rows], [("CL-c", 3), ("CL-c", 6), ("PF-G", 3), ("PF-G", 6)])
        grid_rows = rows[2:]
        for row in grid_rows:
            self.assertEqual(row.phase, "build+query")
            self.assertGreater(row.build_seconds, 0.0)
            self.assertGreater(row.query_seconds, 0.0)
        self.assertEqual(grid_rows[0].build_seconds, grid_rows[1].build_seconds)
        self.assertIn(1e-4, break_even(rows, "PF-G"))

    def test_polar_field_needs_two_components(self):
        with self.assertRaises(InvalidArgumentError):
            benchmark(builtin_profile("UT").project(0.0), methods=("PF-G",), n_q_list=(2,), targets=(1e-4,), reps=1)

    def test_invalid_arguments(self):
        reduced = builtin_profile("quiescent").project(0.0)
        with self.assertRaises(InvalidArgumentError):
            benchmark(reduced, methods=("DIM",))
        with self.assertRaises(InvalidArgumentError):
            benchmark(reduced, methods=("CL-c",), targets=(1e-5,))
        with self.assertRaises(InvalidArgumentError):
            benchmark(reduced, methods=("CL-c",), reps=0)


class TestCostModel(unittest.TestCase):
    def test_linear_slope(self):
        rows = [cl_row(n, 1e-3 * n) for n in (10, 100, 1000)]
        self.assertAlmostEqual(loglog_slope(rows, "CL-c"), 1.0, places=10)

    def test_slope_of_query_phase(self):
        rows = [pf_row(n, 0.05, 2e-6 * n) for n in (10, 100, 1000)]
        self.assertAlmostEqual(loglog_slope(rows, "PF", column="query_seconds"), 1.0, places=10)

    def test_slope_needs_two_rows(self):
        with self.assertRaises(InvalidArgumentError):
            loglog_slope([cl_row(10, 0.01)], "CL-c")

    def test_break_even(self):
        rows = [cl_row(1000, 1.0), pf_row(1000, 0.05, 1e-3)]
        self.assertAlmostEqual(break_even(rows)[1e-7], 0.05 / (1e-3 - 1e-6), places=9)

    def test_break_even_ordering(self):
        rows = [
            cl_row(1000, 1.0, 1e-7),
            pf_row(1000, 0.1, 1e-3, 1e-7),
            cl_row(1000, 0.5, 1e-4),
            pf_row(1000, 0.6, 1e-3, 1e-4),
        ]
        points = break_even(rows)
        self.assertLess(points[1e-7], points[1e-4])

    def test_break_even_per_path_method(self):
        grid = BenchmarkRow("PF-G", 1000, 40, 1e-7, "build+query", 0.3, 3, 0.0, 0.2, 0.1)
        rows = [cl_row(1000, 1.0), pf_row(1000, 0.05, 1e-3), grid]
        self.assertAlmostEqual(break_even(rows, "PF-G")[1e-7], 0.2 / (1e-3 - 1e-4), places=9)
        self.assertAlmostEqual(break_even(rows, "PF")[1e-7], 0.05 / (1e-3 - 1e-6), places=9)
        with self.assertRaises(InvalidArgumentError):
            break_even(rows, "CL-c")

    def test_never_breaks_even(self):
        rows = [cl_row(1000, 1e-3), pf_row(1000, 0.05, 1e-2)]
        self.assertEqual(break_even(rows)[1e-7], math.inf)


if __name__ == "__main__":
    log.getLogger().setLevel(log.INFO)
    unittest.main()

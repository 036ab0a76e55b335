"""
Measurement harnesses: backward-stability sweeps and query-cost benchmarks
of direct collocation against path-following.
"""
import logging as log
import math
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from .collocation import assemble_forward, solve_forward
from .diagnostics import (
    StabilityReport,
    backward_error_linear,
    backward_error_quadratic,
    condition_linear,
    condition_quadratic,
)
from .pathfollow import assemble_radial, dense_eval, derivative, pf_radial
from .polar import build_field, default_knots, query
from .profiles import ReducedProfile, ShearProfile, project
from .spectral import CollocationOperator, chebyshev_operator
from .utils.consts import ACCURACY_PRESETS, DEFAULT_ANGLES, DEFAULT_DEPTH, DEFAULT_RADII, TWO_PI
from .utils.errors import InvalidArgumentError

METHODS = ("CL-c", "PF", "PF-G")
PATH_METHODS = ("PF", "PF-G")

CSV_COLUMNS = (
    "method",
    "N_q",
    "N_z",
    "target_eps",
    "phase",
    "median_seconds",
    "reps",
    "stdev_seconds",
    "build_seconds",
    "query_seconds",
)


def stability_sweep(profile: ReducedProfile, op: CollocationOperator, k_points: Sequence[float]) -> StabilityReport:
    """
    Backward errors and condition numbers of the CL-c eigensolve and the
    path-following linear solve at every k.
    """
    ks = np.asarray(k_points, dtype=float)
    if ks.size == 0:
        raise InvalidArgumentError("k_points must be nonempty")
    eta_L, eta_Q, kappa_L, kappa_Q = [], [], [], []
    for k in ks:
        sol = solve_forward(profile, op, float(k))
        pencil = assemble_forward(profile, op, float(k))
        eta_Q.append(backward_error_quadratic(pencil.A2, pencil.A1, pencil.A0, sol.c, sol.w))
        kappa_Q.append(condition_quadratic(pencil.A2, pencil.A1, pencil.A0, sol.c, sol.w, sol.w_left))

        system = assemble_radial(profile, op, float(k), sol.c, sol.w)
        d = derivative(system)
        x = np.append(d.wdot, d.cdot)
        eta_L.append(backward_error_linear(system.M, x, system.b))
        kappa_L.append(condition_linear(system.M))

    report = StabilityReport(
        k=ks,
        eta_L=np.array(eta_L),
        eta_Q=np.array(eta_Q),
        kappa_L=np.array(kappa_L),
        kappa_Q=np.array(kappa_Q),
        meta={"profile": profile.name, "N_z": op.order, "depth": op.depth},
    )
    log.info(f"Stability sweep over {ks.size} wavenumbers: {report.aggregate()}")
    return report


@dataclass
class BenchmarkRow:
    method: str
    N_q: int
    N_z: int
    target_eps: float
    phase: str
    median_seconds: float
    reps: int
    stdev_seconds: float
    build_seconds: float = float("nan")
    query_seconds: float = float("nan")

    def to_dict(self):
        return asdict(self)


def _timed(fn: Callable, reps: int) -> Tuple[float, float]:
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    stdev = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return statistics.median(samples), stdev


def _path_row(method, n_q, n_z, target, build, query_timing, reps) -> BenchmarkRow:
    q_median, q_stdev = query_timing
    return BenchmarkRow(
        method,
        int(n_q),
        n_z,
        target,
        "build+query",
        build[0] + q_median,
        reps,
        math.hypot(build[1], q_stdev),
        build_seconds=build[0],
        query_seconds=q_median,
    )


def benchmark(
    profile: Union[ShearProfile, ReducedProfile],
    methods: Sequence[str] = METHODS,
    n_q_list: Sequence[int] = (10, 100, 1000),
    targets: Sequence[float] = (1e-4, 1e-7),
    reps: int = 5,
    k_range: Tuple[float, float] = (0.1, 10.0),
    seed: int = 0,
    depth: float = DEFAULT_DEPTH,
    theta: float = 0.0,
    grid: Tuple[int, int] = (DEFAULT_ANGLES, DEFAULT_RADII),
    jobs: int = 1,
    progress: bool = False,
) -> List[BenchmarkRow]:
    """
    Wall time to answer N_q dispersion queries at random wavenumbers.

    CL-c solves every query directly. PF integrates one path over ``k_range``
    (build phase) and answers queries by dense output (query phase). PF-G
    builds a polar field on a ``grid = (angles, radii)`` knot set (build
    phase) and answers queries at random (k, θ) pairs (query phase). Path rows
    report the sum of both medians with the phases in separate columns.

    A two-component profile is projected onto ``theta`` for CL-c and PF; PF-G
    needs a two-component profile. Emits one row per (target, method, N_q).
    """
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise InvalidArgumentError(f"unknown methods {sorted(unknown)}, expected {METHODS}")
    if reps < 1:
        raise InvalidArgumentError("reps must be >= 1")
    if isinstance(profile, ShearProfile):
        reduced = project(profile, theta)
    else:
        reduced = profile
        if "PF-G" in methods:
            raise InvalidArgumentError("PF-G needs a two-component profile")
    rng = np.random.default_rng(seed)
    rows = []
    total = len(targets) * len(methods) * len(n_q_list)
    with tqdm(total=total, desc="Benchmark", disable=not progress) as pbar:
        for target in targets:
            if target not in ACCURACY_PRESETS:
                raise InvalidArgumentError(f"no preset for accuracy target {target}")
            n_z, tol = ACCURACY_PRESETS[target]
            op = chebyshev_operator(n_z, depth)
            builds = {}
            for method in methods:
                for n_q in n_q_list:
                    queries = rng.uniform(k_range[0], k_range[1], int(n_q))
                    if method == "CL-c":
                        median, stdev = _timed(lambda: [solve_forward(reduced, op, float(k)) for k in queries], reps)
                        rows.append(BenchmarkRow(method, int(n_q), n_z, target, "total", median, reps, stdev))
                    elif method == "PF":
                        if method not in builds:
                            paths = []
                            timing = _timed(lambda: paths.append(pf_radial(reduced, op, k_range, tol=tol)), reps)
                            builds[method] = (timing, paths[-1])
                        timing, path = builds[method]
                        rows.append(
                            _path_row(method, n_q, n_z, target, timing, _timed(lambda: dense_eval(path, queries), reps), reps)
                        )
                    else:
                        if method not in builds:
                            k_knots, theta_knots = default_knots(k_range, angles=grid[0], radii=grid[1])
                            fields = []
                            timing = _timed(
                                lambda: fields.append(build_field(profile, op, k_knots, theta_knots, tol=tol, jobs=jobs)),
                                reps,
                            )
                            builds[method] = (timing, fields[-1])
                        timing, field = builds[method]
                        angles = rng.uniform(0.0, TWO_PI, int(n_q))
                        rows.append(
                            _path_row(
                                method, n_q, n_z, target, timing, _timed(lambda: query(field, queries, angles), reps), reps
                            )
                        )
                    pbar.update(1)
    return rows


def loglog_slope(
    rows: Sequence[BenchmarkRow], method: str, target: Optional[float] = None, column: str = "median_seconds"
) -> float:
    """Least-squares slope of log(time) against log(N_q) for one method."""
    pts = [
        (r.N_q, getattr(r, column))
        for r in rows
        if r.method == method and (target is None or r.target_eps == target) and r.N_q > 0
    ]
    if len(pts) < 2:
        raise InvalidArgumentError(f"need at least two rows for {method} to fit a slope")
    n_q, seconds = np.array(pts, dtype=float).T
    return float(np.polyfit(np.log(n_q), np.log(seconds), 1)[0])


def break_even(rows: Sequence[BenchmarkRow], method: str = "PF") -> Dict[float, float]:
    """
    Per accuracy target, the query count N_q* = σ_build / (σ_CL - σ_query)
    above which the path method ``method`` (PF or PF-G) is cheaper than CL-c.
    ``inf`` when CL-c is never slower per query.
    """
    if method not in PATH_METHODS:
        raise InvalidArgumentError(f"break-even needs a path method, one of {PATH_METHODS}")
    out = {}
    for target in sorted({r.target_eps for r in rows}):
        cl = [r for r in rows if r.method == "CL-c" and r.target_eps == target]
        pf = [r for r in rows if r.method == method and r.target_eps == target]
        if not cl or not pf:
            continue
        cl_big = max(cl, key=lambda r: r.N_q)
        pf_big = max(pf, key=lambda r: r.N_q)
        sigma_cl = cl_big.median_seconds / cl_big.N_q
        sigma_q = pf_big.query_seconds / pf_big.N_q
        sigma_build = pf_big.build_seconds
        out[target] = sigma_build / (sigma_cl - sigma_q) if sigma_cl > sigma_q else math.inf
    return out

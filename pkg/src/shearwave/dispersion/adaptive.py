"""
Adaptive depth for large wavenumbers.

The eigenfunction decays roughly like e^{kz}, so below z = ln(δ)/k it is
negligible at tolerance δ. The wavenumber axis is split into overlapping
subintervals, each solved on a shallower operator, and the per-interval
paths are blended with a smooth partition of unity.
"""
import json
import logging as log
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .collocation import BranchOptions, EigenSolution, solve_forward
from .pathfollow import IntegratorOptions, PathSolution, dense_eval, pf_radial
from .profiles import ReducedProfile
from .spectral import CollocationOperator, barycentric_eval, chebyshev_operator
from .utils.consts import DEFAULT_C_MAX, DEFAULT_C_MIN, DEFAULT_DELTA, DEFAULT_NZ, DEFAULT_TOL
from .utils.errors import InvalidArgumentError, OutOfRangeError

WEIGHT_FUNCTION = "exp-ramp"


def _check_delta(delta: float) -> None:
    if not 0 < delta < 1:
        raise InvalidArgumentError(f"delta must lie in (0, 1), got {delta}")


def h_delta(k: float, delta: float = DEFAULT_DELTA) -> float:
    """Effective depth min{1, -ln(δ)/k}."""
    if not k > 0:
        raise InvalidArgumentError(f"wavenumber must be > 0, got {k}")
    _check_delta(delta)
    return min(1.0, -math.log(delta) / k)


@dataclass(frozen=True)
class DepthPlan:
    """
    Overlapping wavenumber subintervals with their operator depths.

    Attributes
    ----------
    delta : float
        Decay tolerance δ.
    c_min, c_max : float
        Depth sandwich constants, 0 < c_min < c_max < 1.
    intervals : Tuple[Tuple[float, float], ...]
        Subintervals [k_a, k_b], ordered, consecutive ones overlapping.
    depths : Tuple[float, ...]
        Depth h of each subinterval, in (0, 1].
    """

    delta: float
    c_min: float
    c_max: float
    intervals: Tuple[Tuple[float, float], ...]
    depths: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def k_max(self) -> float:
        return self.intervals[-1][1]

    def covering(self, k: float) -> List[int]:
        """Indices of the subintervals containing ``k``."""
        return [j for j, (a, b) in enumerate(self.intervals) if a <= k <= b]

    def overlaps(self) -> List[Tuple[float, float]]:
        return [(self.intervals[j + 1][0], self.intervals[j][1]) for j in range(len(self) - 1)]

    def depth_bounds_attained(self) -> List[bool]:
        """
        Per subinterval, whether some k in it with h_δ(k) < 1 satisfies
        c_min·h ≤ h_δ(k) ≤ c_max·h. Intervals where h_δ ≡ 1 pass trivially.
        """
        L = -math.log(self.delta)
        out = []
        for (a, b), h in zip(self.intervals, self.depths):
            lo = min(1.0, L / b)
            hi = 1.0 if a <= 0 else min(1.0, L / a)
            if lo >= 1.0:
                out.append(True)
                continue
            slack = 1e-12 * h
            out.append(max(lo, self.c_min * h) <= min(hi, self.c_max * h) + slack)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "c_min": self.c_min,
            "c_max": self.c_max,
            "weights": WEIGHT_FUNCTION,
            "intervals": [{"k_a": a, "k_b": b, "depth": h} for (a, b), h in zip(self.intervals, self.depths)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_plan(
    delta: float = DEFAULT_DELTA,
    c_min: float = DEFAULT_C_MIN,
    c_max: float = DEFAULT_C_MAX,
    k_max: float = 250.0,
) -> DepthPlan:
    """
    Subintervals I⁽⁰⁾ = [0, L/C_max] with h = 1, and for j ≥ 1
    I⁽ʲ⁾ = [L/C_min^(j-1), L/(C_min^j C_max)] with h = min{1, ½(C_min^(j-1) + C_min^j C_max)},
    where L = -ln δ, generated until ``k_max`` is covered. The last interval is
    truncated at ``k_max``.
    """
    _check_delta(delta)
    if not 0 < c_min < c_max < 1:
        raise InvalidArgumentError(f"need 0 < C_min < C_max < 1, got C_min={c_min}, C_max={c_max}")
    if not k_max > 0:
        raise InvalidArgumentError(f"k_max must be > 0, got {k_max}")

    L = -math.log(delta)
    intervals = [(0.0, L / c_max)]
    depths = [1.0]
    j = 0
    while intervals[-1][1] < k_max:
        j += 1
        intervals.append((L / c_min ** (j - 1), L / (c_min ** j * c_max)))
        depths.append(min(1.0, 0.5 * (c_min ** (j - 1) + c_min ** j * c_max)))
    a, b = intervals[-1]
    intervals[-1] = (a, min(b, float(k_max)))

    plan = DepthPlan(delta=delta, c_min=c_min, c_max=c_max, intervals=tuple(intervals), depths=tuple(depths))
    log.info(f"Depth plan up to k={k_max}: {len(plan)} subintervals, depths {[round(h, 4) for h in depths]}")
    return plan


def _ramp(s):
    # C-infinity step: 0 for s <= 0, 1 for s >= 1
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        f0 = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        f1 = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return f0 / (f0 + f1)


def pu_weights(plan: DepthPlan, k) -> np.ndarray:
    """
    Partition-of-unity weights of every subinterval at ``k``.

    Returns an array of shape (len(plan),) for scalar ``k``, otherwise
    (len(k), len(plan)). Rows sum to one wherever k is covered.
    """
    kk = np.atleast_1d(np.asarray(k, dtype=float))
    n = len(plan)
    phi = np.zeros((kk.size, n))
    for j, (a, b) in enumerate(plan.intervals):
        inside = (kk >= a) & (kk <= b)
        w = inside.astype(float)
        if j > 0:
            lo, hi = a, plan.intervals[j - 1][1]
            w = w * _ramp((kk - lo) / (hi - lo))
        if j < n - 1:
            lo, hi = plan.intervals[j + 1][0], b
            w = w * _ramp((hi - kk) / (hi - lo))
        phi[:, j] = w
    total = phi.sum(axis=1)
    covered = total > 0
    phi[covered] /= total[covered, None]
    return phi[0] if np.ndim(k) == 0 else phi


def pu_blend(solutions: Sequence[Optional[PathSolution]], plan: DepthPlan, k_query):
    """
    Blend per-subinterval paths at ``k_query`` with the partition of unity.

    ``solutions`` is aligned with ``plan.intervals``; entries may be ``None``
    for subintervals that were not integrated.

    Raises:
        OutOfRangeError: a query is not covered by any integrated subinterval.
    """
    if len(solutions) != len(plan):
        raise InvalidArgumentError(f"expected {len(plan)} solutions, got {len(solutions)}")
    kk = np.atleast_1d(np.asarray(k_query, dtype=float))
    weights = np.atleast_2d(pu_weights(plan, kk))
    out = np.zeros(kk.size)
    for i, k in enumerate(kk):
        row = weights[i]
        active = np.nonzero(row > 0)[0]
        if active.size == 0:
            raise OutOfRangeError(f"k={k} is not covered by the depth plan")
        total = 0.0
        for j in active:
            sol = solutions[j]
            if sol is None:
                raise OutOfRangeError(f"k={k} needs subinterval {j}, which was not integrated")
            total += row[j] * float(np.real(dense_eval(sol, k).c))
        out[i] = total
    return out[0] if np.ndim(k_query) == 0 else out


@dataclass(frozen=True)
class BlendedDispersion:
    """
    Dispersion relation assembled from per-subinterval paths.

    Attributes
    ----------
    plan : DepthPlan
        Subintervals and depths.
    solutions : Tuple[Optional[PathSolution], ...]
        One path per plan interval, ``None`` where the interval misses ``k_interval``.
    k_interval : Tuple[float, float]
        Span the relation was computed on.
    """

    plan: DepthPlan
    solutions: Tuple[Optional[PathSolution], ...]
    k_interval: Tuple[float, float]
    meta: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, k):
        return self.c(k)

    def c(self, k):
        kk = np.asarray(k, dtype=float)
        lo, hi = self.k_interval
        if np.any(kk < lo) or np.any(kk > hi):
            raise OutOfRangeError(f"query outside [{lo}, {hi}]")
        return pu_blend(self.solutions, self.plan, k)

    def weights(self, k) -> np.ndarray:
        return pu_weights(self.plan, k)

    def eigenfunction(self, k: float, z) -> np.ndarray:
        """Eigenfunction of the dominant subinterval at ``k``, remapped onto [-1, 0]."""
        row = self.weights(k)
        j = int(np.argmax(row))
        sol = self.solutions[j]
        if row[j] == 0 or sol is None:
            raise OutOfRangeError(f"k={k} is not covered")
        value = dense_eval(sol, k, eigenvector=True)
        return remap_eigenfunction(EigenSolution(k=k, c=value.c, w=value.w, depth=sol.operator.depth), sol.operator, z)


def _clip(interval, lo, hi) -> Optional[Tuple[float, float]]:
    a, b = max(interval[0], lo), min(interval[1], hi)
    return (a, b) if a <= b else None


def pf_radial_adaptive(
    profile: ReducedProfile,
    k_interval: Tuple[float, float],
    tol: float = DEFAULT_TOL,
    delta: float = DEFAULT_DELTA,
    c_min: float = DEFAULT_C_MIN,
    c_max: float = DEFAULT_C_MAX,
    order: int = DEFAULT_NZ,
    jobs: int = 1,
    log_k: bool = False,
    options: Optional[IntegratorOptions] = None,
) -> BlendedDispersion:
    """
    Path-follow each plan subinterval on an operator mapped to its depth and
    blend the results. Each subinterval is seeded by CL-c at its midpoint.
    """
    k_lo, k_hi = float(k_interval[0]), float(k_interval[1])
    if not 0 < k_lo <= k_hi:
        raise InvalidArgumentError(f"invalid wavenumber interval [{k_lo}, {k_hi}]")
    plan = build_plan(delta, c_min, c_max, k_hi)

    tasks = []
    for j, (interval, h) in enumerate(zip(plan.intervals, plan.depths)):
        clipped = _clip(interval, k_lo, k_hi)
        if clipped is not None:
            tasks.append((j, clipped, h))

    def run(task):
        j, (a, b), h = task
        op = chebyshev_operator(int(order), float(h))
        log.info(f"Subinterval {j}: k=[{a}, {b}] at depth {h}")
        return j, pf_radial(profile, op, (a, b), tol=tol, log_k=log_k, options=options)

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    solutions: List[Optional[PathSolution]] = [None] * len(plan)
    for j, sol in results:
        solutions[j] = sol
    return BlendedDispersion(
        plan=plan,
        solutions=tuple(solutions),
        k_interval=(k_lo, k_hi),
        meta={"weights": WEIGHT_FUNCTION, "order": int(order), "tol": tol},
    )


def solve_forward_adaptive(
    profile: ReducedProfile,
    order: int,
    k: float,
    delta: float = DEFAULT_DELTA,
    options: Optional[BranchOptions] = None,
) -> Tuple[EigenSolution, CollocationOperator]:
    """CL-c at ``k`` on an operator mapped to the effective depth h_δ(k)."""
    op = chebyshev_operator(int(order), h_delta(k, delta))
    return solve_forward(profile, op, k, options=options), op


def remap_eigenfunction(solution: EigenSolution, op: CollocationOperator, z) -> np.ndarray:
    """
    Evaluate an eigenfunction computed on [-h, 0] at points of [-1, 0],
    by barycentric interpolation above -h and zero below it.
    """
    zq = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zq < -1.0) or np.any(zq > 0.0):
        raise OutOfRangeError("remap points must lie in [-1, 0]")
    if solution.w.size != op.order:
        raise InvalidArgumentError("solution and operator orders differ")
    h = 1.0 if op.depth is None else op.depth
    w = np.append(solution.w, 0.0)
    out = np.zeros(zq.size, dtype=w.dtype)
    inside = zq >= -h
    if np.any(inside):
        out[inside] = barycentric_eval(op.z, w, zq[inside])
    return out if np.ndim(z) else out[0]

"""
Path-following of the propagating eigenpair.

Differentiating P(k, c) w = 0 along the dispersion curve, with the tangency
constraint w*ẇ = 0, gives the linear system

    [ P    Q w ] [ ẇ ]   [ R w ]
    [ -w*   0  ] [ ċ ] = [  0  ]

where P is the pencil evaluated at c, Q = ∂P/∂c and R = -∂P/∂t for the path
parameter t (wavenumber k on radial paths, angle θ on angular paths). The
resulting ODE v' = F(t, v), v = [w; c], is integrated with the Dormand–Prince
5(4) pair and dense output from a quartic Hermite interpolant through the
step endpoints and a fifth-order midpoint.
"""
import dataclasses
import logging as log
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, NamedTuple, Optional, Tuple, Union

import mpmath
import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgWarning
from scipy.linalg.lapack import get_lapack_funcs

from .collocation import EigenSolution, assemble_forward, normalise_eigenvector, solve_forward
from .diagnostics import backward_error_quadratic
from .profiles import ReducedProfile, SampledProfile, ShearProfile, project, sample, sample_components
from .spectral import CollocationOperator
from .utils.consts import (
    DEFAULT_MAX_STEPS,
    DEFAULT_TOL,
    INITIAL_STEP_FRACTION,
    MAX_TOL,
    MIN_TOL,
    PATH_TOL_FACTOR,
    PATH_TOL_FLOOR,
    SEED_RESIDUAL_TOL,
    STEP_EXPONENT,
    STEP_MAX_FACTOR,
    STEP_MIN_FACTOR,
    STEP_SAFETY,
    STEP_UNDERFLOW,
)
from .utils.errors import (
    BudgetExceededError,
    ContinuationBreakdownError,
    InvalidArgumentError,
    InvalidSeedError,
    OutOfRangeError,
    StaleSeedError,
)
from .utils.schemas.seed import SeedRecord

# Dormand–Prince RK5(4)7M, FSAL
DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Shampine's fifth-order midpoint: y(t + h/2) ≈ y + h Σ DP_MID_i k_i
DP_MID = np.array([
    6025192743 / 30085553152 / 2,
    0.0,
    51252292925 / 65400821598 / 2,
    -2691868925 / 45128329728 / 2,
    187940372067 / 1594534317056 / 2,
    -1776094331 / 19743644256 / 2,
    11237099 / 235043384 / 2,
])


@dataclass
class IntegratorOptions:
    safety: float = STEP_SAFETY
    exponent: float = STEP_EXPONENT
    min_factor: float = STEP_MIN_FACTOR
    max_factor: float = STEP_MAX_FACTOR
    max_steps: int = DEFAULT_MAX_STEPS
    underflow: float = STEP_UNDERFLOW
    initial_fraction: float = INITIAL_STEP_FRACTION


@dataclass(frozen=True)
class BlockSystem:
    """
    Bordered linear system M [ẇ; ċ] = b at one point of a path.

    Attributes
    ----------
    M : np.ndarray
        (N_z + 1) × (N_z + 1) matrix [[P, Q w], [-w*, 0]].
    b : np.ndarray
        Right-hand side [R w; 0].
    P, Q, R : np.ndarray
        The N_z × N_z blocks.
    t : float
        Path parameter the system was assembled at.
    """

    M: np.ndarray
    b: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    t: float = float("nan")


class Derivative(NamedTuple):
    wdot: np.ndarray
    cdot: complex


def _pq_blocks(s: SampledProfile, op: CollocationOperator, F2: float, k: float, c) -> Tuple[np.ndarray, np.ndarray]:
    df = op.d_surface
    D2i, Ii = op.D2_interior, op.I_interior
    uc = s.u - c
    du0 = s.du[0]

    p_top = uc[0] ** 2 * df
    p_top[0] -= du0 * uc[0] + 1.0 / F2
    p_int = uc[1:-1, None] * D2i - s.U2_int - (k * k) * (uc[1:-1, None] * Ii)

    q_top = -2.0 * uc[0] * df
    q_top[0] += du0
    q_int = -D2i + (k * k) * Ii
    return np.vstack([p_top, p_int]), np.vstack([q_top, q_int])


def _bordered(P, Q, R, w, t) -> BlockSystem:
    n = w.size
    dtype = np.result_type(P, w)
    M = np.zeros((n + 1, n + 1), dtype=dtype)
    M[:n, :n] = P
    M[:n, n] = Q @ w
    M[n, :n] = -np.conj(w)
    b = np.append(R @ w, 0.0).astype(np.result_type(R, w))
    return BlockSystem(M=M, b=b, P=P, Q=Q, R=R, t=float(t))


def assemble_radial(
    profile: ReducedProfile,
    op: CollocationOperator,
    k: float,
    c,
    w: np.ndarray,
    sampled: Optional[SampledProfile] = None,
) -> BlockSystem:
    """Bordered system for dv/dk at (k, c, w)."""
    w = np.asarray(w)
    if not k > 0:
        raise InvalidArgumentError(f"wavenumber must be > 0, got {k}")
    if not np.linalg.norm(w) > 0:
        raise InvalidArgumentError("eigenvector must be nonzero")
    s = sample(profile, op) if sampled is None else sampled
    P, Q = _pq_blocks(s, op, profile.F2, k, c)
    n = op.order
    R = np.vstack([np.zeros((1, n)), (2.0 * k) * ((s.u[1:-1, None] - c) * op.I_interior)])
    return _bordered(P, Q, R, w, k)


def assemble_angular(
    profile2d: ShearProfile,
    op: CollocationOperator,
    theta: float,
    k0: float,
    c,
    w: np.ndarray,
    sampled: Optional[Tuple[SampledProfile, SampledProfile]] = None,
) -> BlockSystem:
    """Bordered system for dv/dθ at fixed wavenumber ``k0``."""
    w = np.asarray(w)
    if not k0 > 0:
        raise InvalidArgumentError(f"wavenumber must be > 0, got {k0}")
    if not np.linalg.norm(w) > 0:
        raise InvalidArgumentError("eigenvector must be nonzero")
    sx, sy = sample_components(profile2d, op) if sampled is None else sampled
    ct, st = math.cos(theta), math.sin(theta)
    s = sx.combine(ct, sy, st)
    sd = sx.combine(-st, sy, ct)
    P, Q = _pq_blocks(s, op, profile2d.F2, k0, c)

    df = op.d_surface
    uc0 = s.u[0] - c
    r_top = -2.0 * uc0 * sd.u[0] * df
    r_top[0] += sd.u[0] * s.du[0] + sd.du[0] * uc0
    r_int = -sd.u[1:-1, None] * op.D2_interior + sd.U2_int + (k0 * k0) * sd.U_int
    return _bordered(P, Q, np.vstack([r_top, r_int]), w, theta)


def derivative(system: BlockSystem) -> Derivative:
    """
    Solve M [ẇ; ċ] = b by LU with a LAPACK reciprocal-condition estimate.

    Raises:
        ContinuationBreakdownError: M singular or rcond below machine epsilon.
    """
    M = system.M
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    (gecon,) = get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, np.linalg.norm(M, 1), norm="1")
    eps = np.finfo(float).eps
    if info != 0 or not np.isfinite(rcond) or rcond < eps:
        raise ContinuationBreakdownError(
            f"bordered system is numerically singular at t={system.t} (rcond={rcond:.3e})",
            t=system.t,
            rcond=float(rcond),
        )
    x = scipy.linalg.lu_solve((lu, piv), system.b, check_finite=False)
    return Derivative(wdot=x[:-1], cdot=x[-1])


class DopriStep(NamedTuple):
    y_next: np.ndarray
    error: np.ndarray
    y_mid: np.ndarray
    f_start: np.ndarray
    f_end: np.ndarray


def dopri_step(f: Callable, t: float, y: np.ndarray, h: float, f_start: Optional[np.ndarray] = None) -> DopriStep:
    """
    One Dormand–Prince RK5(4)7M step.

    Args:
        f (Callable): Right-hand side f(t, y).
        t (float): Current parameter.
        y (np.ndarray): Current state.
        h (float): Step, nonzero (may be negative).
        f_start (np.ndarray): f(t, y) when already known (FSAL).

    Returns:
        DopriStep: fifth-order solution, embedded error estimate, Shampine
        midpoint, and f at both ends.
    """
    if h == 0:
        raise InvalidArgumentError("step must be nonzero")
    y = np.asarray(y)
    K = [f(t, y) if f_start is None else f_start]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(DP_A[i], K) if a != 0.0)
        K.append(np.asarray(f(t + DP_C[i] * h, yi)))
        if i == 6:
            y_next = yi
    K = np.array(K)
    err = h * np.tensordot(DP_E, K, axes=1)
    y_mid = y + h * np.tensordot(DP_MID, K, axes=1)
    return DopriStep(y_next=y_next, error=err, y_mid=y_mid, f_start=K[0], f_end=K[6])


PARAMETERS = ("k", "log_k", "theta")


@dataclass(frozen=True)
class PathSolution:
    """
    Control points of an integrated path with data for dense output.

    Attributes
    ----------
    t : np.ndarray
        Integration variable at accepted points, strictly increasing
        (k, ln k or θ depending on ``parameter``).
    v : np.ndarray
        States [w; c] at the points, one row per point.
    vdot : np.ndarray
        dv/dt at the points.
    t_mid, v_mid : Optional[np.ndarray]
        Interval midpoints and fifth-order states there; ``None`` for
        re-anchored paths, which interpolate with cubic Hermite.
    tol : float
        Integration tolerance.
    direction : str
        ``both``, ``forward``, ``backward`` or ``none`` (single point).
    parameter : str
        One of ``k``, ``log_k``, ``theta``.
    profile, operator
        The profile (reduced or two-component) and operator used.
    accepted, rejected : int
        Step statistics.
    """

    t: np.ndarray
    v: np.ndarray
    vdot: np.ndarray
    t_mid: Optional[np.ndarray]
    v_mid: Optional[np.ndarray]
    tol: float
    direction: str = "forward"
    parameter: str = "k"
    profile: Any = None
    operator: Optional[CollocationOperator] = None
    accepted: int = 0
    rejected: int = 0
    meta: Dict[str, Any] = field(default_factory=dict)

    def to_internal(self, q):
        q = np.asarray(q, dtype=float)
        return np.log(q) if self.parameter == "log_k" else q

    def to_natural(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(t) if self.parameter == "log_k" else t

    @property
    def points(self) -> np.ndarray:
        """Control points in the natural parameter (k or θ)."""
        return self.to_natural(self.t)

    @property
    def c(self) -> np.ndarray:
        return self.v[:, -1]

    @property
    def span(self) -> Tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])


def _error_norm(err, y0, y1, tol) -> float:
    scale = tol + tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.max(np.abs(err) / scale))


def _rms(x) -> float:
    return float(np.sqrt(np.mean(np.abs(x) ** 2)))


def _initial_step(f, t0, y0, f0, tol, span, opts: IntegratorOptions, direction) -> float:
    cap = opts.initial_fraction * span
    scale = tol + tol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, cap)
    f1 = f(t0 + direction * h0, y0 + direction * h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** opts.exponent
    return min(100.0 * h0, h1, cap)


def _assemble_solution(ts, ys, fs, tm, ym, tol, direction, meta, **extra) -> PathSolution:
    t = np.array(ts, dtype=float)
    v = np.array(ys)
    vdot = np.array(fs)
    t_mid = np.array(tm, dtype=float) if tm else np.empty(0)
    v_mid = np.array(ym) if ym else np.empty((0, v.shape[1]), dtype=v.dtype)
    if t.size > 1 and t[-1] < t[0]:
        t, v, vdot = t[::-1].copy(), v[::-1].copy(), vdot[::-1].copy()
        t_mid, v_mid = t_mid[::-1].copy(), v_mid[::-1].copy()
    return PathSolution(t=t, v=v, vdot=vdot, t_mid=t_mid, v_mid=v_mid, tol=tol, direction=direction, meta=meta, **extra)


def adaptive_integrate(
    f: Callable,
    t_span: Tuple[float, float],
    v0: np.ndarray,
    tol: float,
    renormalise: Optional[Callable] = None,
    options: Optional[IntegratorOptions] = None,
    f0: Optional[np.ndarray] = None,
    **extra,
) -> PathSolution:
    """
    Integrate v' = f(t, v) over ``t_span`` with error-per-step control.

    Steps are controlled at ``max(PATH_TOL_FACTOR * tol, PATH_TOL_FLOOR)`` so
    that dense output over the whole span agrees with the exact path to
    within 10 x tol.

    Accepted steps store v, v' and the Shampine midpoint. ``renormalise(y, fy)``
    may rescale an accepted state (and its derivative) before it is stored.

    Raises:
        ContinuationBreakdownError: step underflow, or f broke down; carries the
            partial solution.
        BudgetExceededError: more than ``max_steps`` attempted steps.
    """
    opts = options or IntegratorOptions()
    if not (MIN_TOL <= tol <= MAX_TOL):
        raise InvalidArgumentError(f"tol must lie in [{MIN_TOL}, {MAX_TOL}], got {tol}")
    step_tol = max(PATH_TOL_FACTOR * tol, PATH_TOL_FLOOR)
    t0, t1 = float(t_span[0]), float(t_span[1])
    span = t1 - t0
    y = np.array(v0)
    fy = np.asarray(f(t0, y) if f0 is None else f0)
    ts, ys, fs, tm, ym = [t0], [y], [fy], [], []
    direction = "forward" if span > 0 else "backward"
    if span == 0:
        return _assemble_solution(ts, ys, fs, tm, ym, tol, "none", {}, **extra)

    sign = math.copysign(1.0, span)
    h = sign * _initial_step(f, t0, y, fy, step_tol, abs(span), opts, sign)
    h_min = opts.underflow * abs(span)
    t = t0
    attempts = rejected = 0
    last_rejected = False

    def partial():
        return _assemble_solution(ts, ys, fs, tm, ym, tol, direction, {"partial": True}, **extra)

    while sign * (t1 - t) > 0:
        if attempts >= opts.max_steps:
            raise BudgetExceededError(f"step budget of {opts.max_steps} exhausted at t={t}", opts.max_steps, partial())
        if abs(h) < h_min:
            raise ContinuationBreakdownError(f"step size underflow at t={t} (h={h:.3e})", t=t, partial=partial())
        last = sign * (t + h - t1) >= 0
        h_try = t1 - t if last else h
        try:
            step = dopri_step(f, t, y, h_try, fy)
        except ContinuationBreakdownError as e:
            raise ContinuationBreakdownError(str(e), t=e.t, rcond=e.rcond, partial=partial())
        attempts += 1
        err = _error_norm(step.error, y, step.y_next, step_tol)

        if err <= 1.0:
            y_new, f_new = step.y_next, step.f_end
            if renormalise is not None:
                y_new, f_new = renormalise(y_new, f_new)
            tm.append(t + 0.5 * h_try)
            ym.append(step.y_mid)
            t = t1 if last else t + h_try
            y, fy = y_new, f_new
            ts.append(t)
            ys.append(y)
            fs.append(fy)
            fac = opts.max_factor if err == 0 else opts.safety * err ** -opts.exponent
            fac = min(opts.max_factor, max(opts.min_factor, fac))
            if last_rejected:
                fac = min(fac, 1.0)
            h = h_try * fac
            last_rejected = False
        else:
            fac = max(opts.min_factor, opts.safety * err ** -opts.exponent)
            h = h_try * fac
            rejected += 1
            last_rejected = True
            log.debug(f"step rejected at t={t} (err={err:.3e}), retrying with h={h:.3e}")

    sol = _assemble_solution(ts, ys, fs, tm, ym, tol, direction, {}, **extra)
    return dataclasses.replace(sol, accepted=len(ts) - 1, rejected=rejected)


class DenseValue(NamedTuple):
    c: Union[complex, np.ndarray]
    w: Optional[np.ndarray] = None


def dense_eval(solution: PathSolution, t_query, eigenvector: bool = False) -> DenseValue:
    """
    Evaluate a path at natural parameter values (k or θ).

    Uses the quartic Hermite interpolant through both endpoint states and
    derivatives and the stored midpoint; falls back to cubic Hermite on
    re-anchored paths. Queries equal to a stored point or midpoint return the
    stored state.

    Raises:
        OutOfRangeError: a query lies outside the path's span.
    """
    scalar = np.ndim(t_query) == 0
    s = np.atleast_1d(solution.to_internal(t_query)).astype(float)
    t = solution.t
    slack = 1e-13 * (abs(t[-1] - t[0]) + abs(t[-1]) + abs(t[0]))
    if np.any(~np.isfinite(s)) or np.any(s < t[0] - slack) or np.any(s > t[-1] + slack):
        raise OutOfRangeError(f"query outside path span {solution.span}")
    s = np.clip(s, t[0], t[-1])

    cols = slice(None) if eigenvector else slice(-1, None)
    V, F = solution.v[:, cols], solution.vdot[:, cols]
    if t.size == 1:
        out = np.repeat(V[:1], s.size, axis=0)
    else:
        j = np.clip(np.searchsorted(t, s, side="right") - 1, 0, t.size - 2)
        h = (t[j + 1] - t[j])[:, None]
        x = ((s - t[j]) / (t[j + 1] - t[j]))[:, None]
        y0, y1 = V[j], V[j + 1]
        f0, f1 = F[j] * h, F[j + 1] * h
        has_mid = solution.v_mid is not None and solution.v_mid.shape[0] == t.size - 1
        if has_mid:
            ym = solution.v_mid[:, cols][j]
            a = 2.0 * (f1 - f0) - 8.0 * (y1 + y0) + 16.0 * ym
            b = 5.0 * f0 - 3.0 * f1 + 18.0 * y0 + 14.0 * y1 - 32.0 * ym
            c = f1 - 4.0 * f0 - 11.0 * y0 - 5.0 * y1 + 16.0 * ym
            out = (((a * x + b) * x + c) * x + f0) * x + y0
        else:
            x2, x3 = x * x, x * x * x
            out = (2 * x3 - 3 * x2 + 1) * y0 + (x3 - 2 * x2 + x) * f0 + (3 * x2 - 2 * x3) * y1 + (x3 - x2) * f1

        at_left, at_right = s == t[j], s == t[j + 1]
        out[at_left] = y0[at_left]
        out[at_right] = y1[at_right]
        if has_mid:
            at_mid = s == solution.t_mid[j]
            out[at_mid] = ym[at_mid]

    c_out = out[:, -1]
    w_out = out[:, :-1] if eigenvector else None
    if scalar:
        return DenseValue(c=c_out[0], w=None if w_out is None else w_out[0])
    return DenseValue(c=c_out, w=w_out)


def _renormalise(y: np.ndarray, fy: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # the ODE is homogeneous of degree one in w, so ẇ scales with w and ċ is unchanged
    scale = 1.0 / np.linalg.norm(y[:-1])
    y, fy = y.copy(), fy.copy()
    y[:-1] *= scale
    fy[:-1] *= scale
    return y, fy


class RadialField:
    """Right-hand side dv/dk (or dv/d ln k) of a radial path."""

    def __init__(self, profile: ReducedProfile, op: CollocationOperator, log_k: bool = False):
        self.profile = profile
        self.op = op
        self.log_k = log_k
        self.sampled = sample(profile, op)

    def system(self, k: float, v: np.ndarray) -> BlockSystem:
        return assemble_radial(self.profile, self.op, k, v[-1], v[:-1], sampled=self.sampled)

    def __call__(self, t: float, v: np.ndarray) -> np.ndarray:
        k = math.exp(t) if self.log_k else t
        d = derivative(self.system(k, v))
        out = np.append(d.wdot, d.cdot)
        return out * k if self.log_k else out


class AngularField:
    """Right-hand side dv/dθ of an angular path at fixed wavenumber."""

    def __init__(self, profile2d: ShearProfile, op: CollocationOperator, k0: float):
        self.profile = profile2d
        self.op = op
        self.k0 = float(k0)
        self.sampled = sample_components(profile2d, op)

    def system(self, theta: float, v: np.ndarray) -> BlockSystem:
        return assemble_angular(self.profile, self.op, theta, self.k0, v[-1], v[:-1], sampled=self.sampled)

    def __call__(self, t: float, v: np.ndarray) -> np.ndarray:
        d = derivative(self.system(t, v))
        return np.append(d.wdot, d.cdot)


def _merge(left: PathSolution, right: PathSolution, **extra) -> PathSolution:
    # the seed is the last point of the (ascending) left half and the first of the right half
    t = np.concatenate([left.t[:-1], right.t])
    v = np.concatenate([left.v[:-1], right.v])
    vdot = np.concatenate([left.vdot[:-1], right.vdot])
    t_mid = np.concatenate([left.t_mid, right.t_mid])
    v_mid = np.concatenate([left.v_mid, right.v_mid])
    return PathSolution(
        t=t,
        v=v,
        vdot=vdot,
        t_mid=t_mid,
        v_mid=v_mid,
        tol=right.tol,
        direction="both",
        accepted=left.accepted + right.accepted,
        rejected=left.rejected + right.rejected,
        **extra,
    )


def _follow(rhs, t_seed, t_lo, t_hi, v0, tol, options, **extra) -> PathSolution:
    f0 = rhs(t_seed, v0)
    if t_lo == t_hi:
        return _assemble_solution([t_seed], [v0], [f0], [], [], tol, "none", {}, **extra)
    right = adaptive_integrate(rhs, (t_seed, t_hi), v0, tol, _renormalise, options, f0=f0, **extra)
    left = adaptive_integrate(rhs, (t_seed, t_lo), v0, tol, _renormalise, options, f0=f0, **extra)
    if left.t.size == 1:
        return right
    if right.t.size == 1:
        return left
    return _merge(left, right, **extra)


def pf_radial(
    profile: ReducedProfile,
    op: CollocationOperator,
    k_interval: Tuple[float, float],
    k_seed: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    seed: Optional[EigenSolution] = None,
    log_k: bool = False,
    options: Optional[IntegratorOptions] = None,
) -> PathSolution:
    """
    PF-R-r-c: follow c(k) across ``k_interval`` from a seed eigenpair.

    The seed comes from CL-c at ``k_seed`` (default: interval midpoint, geometric
    when ``log_k``) unless given. Integration runs from the seed to both ends and
    the halves are merged.
    """
    k_a, k_b = float(k_interval[0]), float(k_interval[1])
    if not 0 < k_a <= k_b:
        raise InvalidArgumentError(f"invalid wavenumber interval [{k_a}, {k_b}]")
    if seed is not None:
        k_seed = seed.k
    elif k_seed is None:
        k_seed = math.sqrt(k_a * k_b) if log_k else 0.5 * (k_a + k_b)
    if not k_a <= k_seed <= k_b:
        raise InvalidArgumentError(f"seed wavenumber {k_seed} outside [{k_a}, {k_b}]")
    if seed is None:
        seed = solve_forward(profile, op, k_seed)

    rhs = RadialField(profile, op, log_k=log_k)
    to_t = math.log if log_k else float
    path = _follow(
        rhs,
        to_t(k_seed),
        to_t(k_a),
        to_t(k_b),
        seed.v,
        tol,
        options,
        parameter="log_k" if log_k else "k",
        profile=profile,
        operator=op,
    )
    log.info(
        f"Radial path over k=[{k_a}, {k_b}] ({profile.name}, theta={profile.theta}): "
        f"{path.accepted} steps accepted, {path.rejected} rejected"
    )
    return path


def pf_angular(
    profile2d: ShearProfile,
    op: CollocationOperator,
    k0: float,
    theta_interval: Tuple[float, float],
    theta_seed: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    seed: Optional[EigenSolution] = None,
    options: Optional[IntegratorOptions] = None,
) -> PathSolution:
    """PF-R-a-c: follow c(θ) at fixed wavenumber ``k0`` across ``theta_interval``."""
    th_a, th_b = float(theta_interval[0]), float(theta_interval[1])
    if not th_a <= th_b:
        raise InvalidArgumentError(f"invalid angle interval [{th_a}, {th_b}]")
    if theta_seed is None:
        theta_seed = th_a
    if not th_a <= theta_seed <= th_b:
        raise InvalidArgumentError(f"seed angle {theta_seed} outside [{th_a}, {th_b}]")
    if seed is None:
        seed = solve_forward(project(profile2d, theta_seed), op, k0)

    rhs = AngularField(profile2d, op, k0)
    path = _follow(
        rhs, float(theta_seed), th_a, th_b, seed.v, tol, options,
        parameter="theta", profile=profile2d, operator=op,
    )
    log.info(
        f"Angular path over theta=[{th_a}, {th_b}] at k={k0} ({profile2d.name}): "
        f"{path.accepted} steps accepted, {path.rejected} rejected"
    )
    return path


def _as_record(source) -> SeedRecord:
    if isinstance(source, SeedRecord):
        return source
    try:
        return SeedRecord.parse_obj(source)
    except Exception as e:
        raise InvalidSeedError(f"malformed seed record: {e}")


def import_seed(source, profile: ReducedProfile, op: CollocationOperator) -> EigenSolution:
    """
    Parse a decimal-string seed into working precision and validate it against
    the target operator and profile.

    Raises:
        InvalidSeedError: metadata mismatch or malformed record.
        StaleSeedError: pencil backward error above 1e-12.
    """
    rec = _as_record(source)
    if rec.N_z != op.order:
        raise InvalidSeedError(f"seed N_z={rec.N_z} does not match operator N_z={op.order}")
    if len(rec.w) != op.order:
        raise InvalidSeedError(f"seed eigenvector has {len(rec.w)} entries, expected {op.order}")
    depth = 2.0 if op.depth is None else op.depth
    if not math.isclose(float(rec.h), depth, rel_tol=1e-12):
        raise InvalidSeedError(f"seed depth h={rec.h} does not match operator depth {depth}")
    if not math.isclose(float(rec.F2), profile.F2, rel_tol=1e-12):
        raise InvalidSeedError(f"seed F2={rec.F2} does not match profile F2={profile.F2}")
    if rec.profile_name != profile.name:
        raise InvalidSeedError(f"seed belongs to profile '{rec.profile_name}', not '{profile.name}'")

    k, c = float(rec.k), float(rec.c)
    w = np.array([float(x) for x in rec.w])
    norm = np.linalg.norm(w)
    if not norm > 0:
        raise InvalidSeedError("seed eigenvector is zero")
    if abs(norm - 1.0) > 1e-12 or w[0] < 0:
        w = normalise_eigenvector(w)

    pencil = assemble_forward(profile, op, k)
    residual = backward_error_quadratic(pencil.A2, pencil.A1, pencil.A0, c, w)
    if residual > SEED_RESIDUAL_TOL:
        raise StaleSeedError(f"seed pencil backward error {residual:.3e} exceeds {SEED_RESIDUAL_TOL}", residual)
    log.info(f"Imported seed k={k}, c={c} (backward error {residual:.3e})")
    return EigenSolution(k=k, c=c, w=w, depth=op.depth)


def export_seed(solution: EigenSolution, profile: ReducedProfile, op: CollocationOperator) -> SeedRecord:
    """Seed record of a double-precision solution, written with 21 significant digits."""
    if np.iscomplexobj(solution.w) or isinstance(solution.c, complex):
        raise InvalidArgumentError("only real eigenpairs can be exported as seeds")

    def fmt(x):
        return format(float(x), ".20e")

    return SeedRecord(
        k=fmt(solution.k),
        c=fmt(solution.c),
        w=[fmt(x) for x in solution.w],
        N_z=op.order,
        h=fmt(2.0 if op.depth is None else op.depth),
        profile_name=profile.name,
        F2=fmt(profile.F2),
    )


def quiescent_seed_record(
    k: float,
    F2: float,
    op: CollocationOperator,
    digits: int = 30,
    profile_name: str = "quiescent",
) -> SeedRecord:
    """
    Seed for still water from the closed form c² = tanh(kh)/(F²k),
    w(z) = sinh(k(z + h)), evaluated in extended precision.
    """
    with mpmath.workdps(digits + 10):
        h = mpmath.mpf(2.0 if op.depth is None else op.depth)
        kk, f2 = mpmath.mpf(k), mpmath.mpf(F2)
        n = op.order
        c = mpmath.sqrt(mpmath.tanh(kk * h) / (f2 * kk))
        z = [h / 2 * (mpmath.cos(j * mpmath.pi / n) - 1) for j in range(n)]
        w = [mpmath.sinh(kk * (zj + h)) for zj in z]
        norm = mpmath.sqrt(mpmath.fsum(x * x for x in w))

        def fmt(x):
            return mpmath.nstr(x, digits, strip_zeros=False)

        return SeedRecord(
            k=fmt(kk),
            c=fmt(c),
            w=[fmt(x / norm) for x in w],
            N_z=n,
            h=fmt(h),
            profile_name=profile_name,
            F2=fmt(f2),
        )

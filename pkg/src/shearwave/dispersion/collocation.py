"""
Direct collocation eigensolvers.

CL-k (backward): given c, the Rayleigh equation with the free-surface row is a
generalised eigenproblem A w = k² B w.

CL-c (forward): given k, the same discretisation is quadratic in c,
(c² A₂ + c A₁ + A₀) w = 0, solved through a companion linearisation and QZ.

Row replacement: row 1 carries the free-surface condition, the bottom row and
the bottom column are dropped (w = 0 at z = -h).
"""
import logging as log
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .profiles import (
    RHO,
    EssentialRange,
    ReducedProfile,
    SampledProfile,
    ShearProfile,
    essential_range,
    sample,
)
from .spectral import CollocationOperator
from .utils.consts import DEFAULT_GAP_WARNING, DEFAULT_IMAG_TOL, DEFAULT_MAGNITUDE_CUTOFF
from .utils.errors import (
    CriticalLayerError,
    InvalidArgumentError,
    NoPropagatingModeError,
    SolverError,
)


@dataclass
class BranchOptions:
    magnitude_cutoff: float = DEFAULT_MAGNITUDE_CUTOFF
    imag_tol: float = DEFAULT_IMAG_TOL
    gap_warning: float = DEFAULT_GAP_WARNING


@dataclass(frozen=True)
class QuadraticPencil:
    """
    Quadratic pencil c²A₂ + cA₁ + A₀ after row replacement.

    Attributes
    ----------
    A2, A1, A0 : np.ndarray
        N_z × N_z coefficient matrices; row 1 holds the free-surface
        coefficients f₂, f₁, f₀.
    k : Optional[float]
        Wavenumber the pencil was assembled at.
    """

    A2: np.ndarray
    A1: np.ndarray
    A0: np.ndarray
    k: Optional[float] = None

    def evaluate(self, c: complex) -> np.ndarray:
        return c * c * self.A2 + c * self.A1 + self.A0


@dataclass(frozen=True)
class GeneralizedPencil:
    """A w = μ B w with μ = k² and B = diag(0, 1, …, 1)."""

    A: np.ndarray
    B: np.ndarray
    c: float


@dataclass(frozen=True)
class EigenSolution:
    """
    A (k, c, w) triplet.

    Attributes
    ----------
    k : float
        Wavenumber.
    c : complex
        Phase velocity (a Python float when real).
    w : np.ndarray
        Eigenvector on nodes 1..N_z (surface first, bottom node excluded).
    normalised : bool
        True when ‖w‖₂ = 1 and w[0] is real and nonnegative.
    warnings : Tuple[str, ...]
        Non-fatal diagnostics (critical-layer proximity).
    w_left : Optional[np.ndarray]
        Left eigenvector of the quadratic pencil, when available.
    depth : Optional[float]
        Depth of the operator the solution was computed on.
    """

    k: float
    c: complex
    w: np.ndarray
    normalised: bool = True
    warnings: Tuple[str, ...] = field(default_factory=tuple)
    w_left: Optional[np.ndarray] = None
    depth: Optional[float] = None

    @property
    def v(self) -> np.ndarray:
        """Augmented vector [w; c] used by path-following."""
        return np.append(self.w, self.c)


class EigenPair(NamedTuple):
    c: complex
    w: np.ndarray
    w_left: Optional[np.ndarray] = None


def _critical_node(s: SampledProfile, c: float) -> int:
    return int(np.argmin(np.abs(s.u - c)))


def assemble_backward(
    profile: ReducedProfile,
    op: CollocationOperator,
    c: float,
    sampled: Optional[SampledProfile] = None,
) -> GeneralizedPencil:
    """
    Assemble the CL-k pencil A w = k² B w at phase velocity ``c``.

    Raises:
        CriticalLayerError: c lies in the essential range [U_min, U_max].
    """
    s = sample(profile, op) if sampled is None else sampled
    ess = essential_range(profile)
    if ess.contains(c):
        idx = _critical_node(s, c)
        raise CriticalLayerError(
            f"c={c} lies in the essential range [{ess.lo}, {ess.hi}]", c=c, z=float(op.z[idx]), index=idx
        )

    n = op.order
    u0, du0 = s.u[0], s.du[0]
    f = (u0 - c) ** 2 * op.d_surface
    f[0] -= (u0 - c) * du0 + 1.0 / profile.F2

    q = s.d2u / (s.u - c)
    A = np.vstack([f, op.D2_interior - s.interior(q)])
    B = np.diag(np.r_[0.0, np.ones(n - 1)])
    return GeneralizedPencil(A=A, B=B, c=float(c))


def normalise_eigenvector(w: np.ndarray, imag_tol: float = 1e-8) -> np.ndarray:
    """Unit 2-norm with the surface component rotated to the nonnegative real axis."""
    w = np.asarray(w, dtype=complex)
    w = w / np.linalg.norm(w)
    anchor = w[0] if abs(w[0]) > 0 else w[np.argmax(np.abs(w))]
    w = w * (np.conj(anchor) / abs(anchor))
    if np.max(np.abs(w.imag)) <= imag_tol:
        w = w.real.copy()
        w /= np.linalg.norm(w)
    return w


def solve_backward(
    profile: ReducedProfile,
    op: CollocationOperator,
    c: float,
    options: Optional[BranchOptions] = None,
) -> EigenSolution:
    """
    CL-k: the wavenumber k at which a wave of phase velocity ``c`` propagates.

    Raises:
        CriticalLayerError: c inside the essential range.
        NoPropagatingModeError: no positive real eigenvalue.
        SolverError: eigensolver failure.
    """
    opts = options or BranchOptions()
    pencil = assemble_backward(profile, op, c)
    try:
        mu, vecs = scipy.linalg.eig(pencil.A, pencil.B)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SolverError(f"generalised eigensolver failed at c={c}: {e}")

    keep = np.isfinite(mu) & (np.abs(mu) < opts.magnitude_cutoff)
    keep &= np.abs(mu.imag) <= opts.imag_tol * np.abs(mu)
    keep &= mu.real > 0
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        raise NoPropagatingModeError(f"no positive eigenvalue k^2 at c={c}")
    if idx.size > 1:
        log.warning(f"{idx.size} positive eigenvalues at c={c}; keeping the largest")
    best = idx[np.argmax(mu.real[idx])]
    k = math.sqrt(mu.real[best])
    w = normalise_eigenvector(vecs[:, best])
    return EigenSolution(k=k, c=float(c), w=w, depth=op.depth)


def assemble_forward(
    profile: ReducedProfile,
    op: CollocationOperator,
    k: float,
    sampled: Optional[SampledProfile] = None,
) -> QuadraticPencil:
    """Assemble the CL-c pencil c²A₂ + cA₁ + A₀ at wavenumber ``k``."""
    if not k > 0:
        raise InvalidArgumentError(f"wavenumber must be > 0, got {k}")
    s = sample(profile, op) if sampled is None else sampled
    n = op.order
    u0, du0 = s.u[0], s.du[0]
    df = op.d_surface
    L = op.D2_interior - k * k * op.I_interior

    f2 = df.copy()
    f1 = -2.0 * u0 * df
    f1[0] += du0
    f0 = u0 * u0 * df
    f0[0] -= du0 * u0 + 1.0 / profile.F2

    A2 = np.vstack([f2, np.zeros((n - 1, n))])
    A1 = np.vstack([f1, -L])
    A0 = np.vstack([f0, s.u[1:-1, None] * L - s.U2_int])
    return QuadraticPencil(A2=A2, A1=A1, A0=A0, k=float(k))


def _pick_block(pencil: QuadraticPencil, lam: complex, top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    # either block of the companion vector carries w; keep the better residual
    candidates = [bottom]
    if lam != 0:
        candidates.append(top / lam)
    Q = pencil.evaluate(lam)
    res = [np.linalg.norm(Q @ x) / max(np.linalg.norm(x), np.finfo(float).tiny) for x in candidates]
    return candidates[int(np.argmin(res))]


def solve_quadratic(pencil: QuadraticPencil) -> List[EigenPair]:
    """
    All finite eigenpairs of a quadratic pencil via the first companion form
    [A₁ A₀; -I 0] + c[A₂ 0; 0 I] and a dense QZ solve.

    Raises:
        SolverError: backend failure.
    """
    A2, A1, A0 = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (pencil.A2, pencil.A1, pencil.A0))
    pencil = QuadraticPencil(A2=A2, A1=A1, A0=A0, k=pencil.k)
    n = A2.shape[0]
    I, Z = np.eye(n), np.zeros((n, n))
    L = np.block([[-A1, -A0], [I, Z]])
    M = np.block([[A2, Z], [Z, I]])
    try:
        vals, vl, vr = scipy.linalg.eig(L, M, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SolverError(f"QZ failed: {e}")

    pairs = []
    for i in np.nonzero(np.isfinite(vals))[0]:
        lam = vals[i]
        w = _pick_block(pencil, lam, vr[:n, i], vr[n:, i])
        pairs.append(EigenPair(c=complex(lam), w=w, w_left=vl[:n, i]))
    return pairs


def select_branch(
    pairs: Sequence[EigenPair],
    essential: EssentialRange,
    k: Optional[float] = None,
    options: Optional[BranchOptions] = None,
    depth: Optional[float] = None,
) -> EigenSolution:
    """
    Pick the propagating (greatest real c) eigenpair after discarding
    non-finite, very large and genuinely complex eigenvalues.

    Raises:
        NoPropagatingModeError: nothing survives the filters.
    """
    opts = options or BranchOptions()
    survivors = []
    for p in pairs:
        c = complex(p.c)
        if not (np.isfinite(c.real) and np.isfinite(c.imag)):
            continue
        if abs(c) >= opts.magnitude_cutoff:
            continue
        if abs(c.imag) > opts.imag_tol * abs(c):
            continue
        survivors.append(p)
    if not survivors:
        raise NoPropagatingModeError(f"no propagating eigenvalue survives filtering (k={k})")

    best = max(survivors, key=lambda p: complex(p.c).real)
    c = complex(best.c).real
    warnings = []
    if essential.contains(c):
        warnings.append(f"critical layer: c={c} lies in the essential range [{essential.lo}, {essential.hi}]")
    elif c - essential.hi < opts.gap_warning:
        warnings.append(f"c={c} is within {opts.gap_warning} of U_max={essential.hi}")
    for msg in warnings:
        log.warning(msg)

    w = normalise_eigenvector(best.w)
    return EigenSolution(
        k=float("nan") if k is None else float(k),
        c=c,
        w=w,
        warnings=tuple(warnings),
        w_left=best.w_left,
        depth=depth,
    )


def solve_forward(
    profile: ReducedProfile,
    op: CollocationOperator,
    k: float,
    options: Optional[BranchOptions] = None,
) -> EigenSolution:
    """CL-c: the propagating phase velocity at wavenumber ``k``."""
    pencil = assemble_forward(profile, op, k)
    pairs = solve_quadratic(pencil)
    sol = select_branch(pairs, essential_range(profile), k=k, options=options, depth=op.depth)
    log.debug(f"CL-c k={k}: c={sol.c}")
    return sol


class FlowField(NamedTuple):
    z: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray


def reconstruct_flow(
    profile: ShearProfile,
    k_vector: Tuple[float, float],
    solution: EigenSolution,
    op: CollocationOperator,
) -> FlowField:
    """
    Horizontal velocity and pressure amplitudes from a (k, c, w) triplet.

    Uses, with ω = |k|c and ρ = 1,
        (k·U - ω) w' - (k·U') w = i |k|² p / ρ
        i k_x [(k·U') w - (k·U - ω) w'] - i |k|² U_x' w = |k|² (ω - k·U) u
    and the same with (k_y, U_y') for v.

    Raises:
        CriticalLayerError: ω = k·U at some node.
    """
    kx, ky = (float(q) for q in k_vector)
    k = math.hypot(kx, ky)
    if not math.isclose(k, solution.k, rel_tol=1e-10):
        raise InvalidArgumentError(f"|k_vector|={k} does not match solution k={solution.k}")
    if solution.w.size != op.order:
        raise InvalidArgumentError("solution and operator orders differ")

    z = op.z
    w = np.append(solution.w, 0.0)
    dw = op.D @ w
    omega = k * solution.c
    kU = kx * profile.x.value(z) + ky * profile.y.value(z)
    dUx, dUy = profile.x.d1(z), profile.y.d1(z)
    kdU = kx * dUx + ky * dUy

    gap = omega - kU
    if np.any(gap == 0.0):
        idx = int(np.nonzero(gap == 0.0)[0][0])
        raise CriticalLayerError("omega = k.U at a collocation node", c=solution.c, z=float(z[idx]), index=idx)

    k2 = k * k
    p = RHO * (-gap * dw - kdU * w) / (1j * k2)
    common = kdU * w + gap * dw
    u = (1j * kx * common - 1j * k2 * dUx * w) / (k2 * gap)
    v = (1j * ky * common - 1j * k2 * dUy * w) / (k2 * gap)
    return FlowField(z=z.copy(), u=u, v=v, w=w, p=p)

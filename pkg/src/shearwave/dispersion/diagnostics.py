"""
Accuracy metrics, backward errors and condition numbers.

All norms are spectral (2-norm) and computed from singular values.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np
import scipy.linalg

from .utils.errors import DegenerateEigenvalueError, InvalidArgumentError


def spectral_norm(A) -> float:
    A = np.atleast_2d(np.asarray(A))
    if A.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(A, check_finite=False)[0])


def normwise_error(candidate, reference) -> float:
    """ε = ‖c_cand - c_ref‖∞ / ‖c_ref‖∞."""
    cand = np.atleast_1d(np.asarray(candidate))
    ref = np.atleast_1d(np.asarray(reference))
    if cand.shape != ref.shape:
        raise InvalidArgumentError(f"candidate has shape {cand.shape}, reference has shape {ref.shape}")
    scale = np.max(np.abs(ref)) if ref.size else 0.0
    if not scale > 0:
        raise InvalidArgumentError("reference values are all zero")
    return float(np.max(np.abs(cand - ref)) / scale)


def pointwise_errors(candidate, reference) -> np.ndarray:
    cand = np.atleast_1d(np.asarray(candidate))
    ref = np.atleast_1d(np.asarray(reference))
    if cand.shape != ref.shape:
        raise InvalidArgumentError(f"candidate has shape {cand.shape}, reference has shape {ref.shape}")
    return np.abs(cand - ref) / np.maximum(np.abs(ref), np.finfo(float).tiny)


def backward_error_linear(M, v, b) -> float:
    """η_L = ‖b - Mv‖₂ / (‖M‖₂‖v‖₂ + ‖b‖₂), and 0 when the denominator vanishes."""
    M = np.atleast_2d(np.asarray(M))
    v = np.atleast_1d(np.asarray(v))
    b = np.atleast_1d(np.asarray(b))
    if M.shape[1] != v.size or M.shape[0] != b.size:
        raise InvalidArgumentError(f"inconsistent shapes M{M.shape}, v{v.shape}, b{b.shape}")
    denom = spectral_norm(M) * np.linalg.norm(v) + np.linalg.norm(b)
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(b - M @ v) / denom)


def _weighted_norm(A2, A1, A0, c) -> float:
    ac = abs(c)
    return spectral_norm(A2) * ac * ac + spectral_norm(A1) * ac + spectral_norm(A0)


def backward_error_quadratic(A2, A1, A0, c, w) -> float:
    """η_Q = ‖(A₂c² + A₁c + A₀)w‖₂ / ((‖A₂‖|c|² + ‖A₁‖|c| + ‖A₀‖)‖w‖₂)."""
    A2, A1, A0 = (np.atleast_2d(np.asarray(a)) for a in (A2, A1, A0))
    w = np.atleast_1d(np.asarray(w))
    norm_w = np.linalg.norm(w)
    if not norm_w > 0:
        raise InvalidArgumentError("eigenvector must be nonzero")
    residual = np.linalg.norm((c * c * A2 + c * A1 + A0) @ w)
    denom = _weighted_norm(A2, A1, A0, c) * norm_w
    if denom == 0:
        return 0.0 if residual == 0 else math.inf
    return float(residual / denom)


def condition_quadratic(A2, A1, A0, c, w, w_left) -> float:
    """
    κ_Q = (‖A₂‖|c|² + ‖A₁‖|c| + ‖A₀‖)‖w_l‖₂‖w‖₂ / (|c| |w_l*(2A₂c + A₁)w|).

    Raises:
        DegenerateEigenvalueError: the denominator vanishes (c = 0 or a
            defective eigenvalue).
    """
    A2, A1, A0 = (np.atleast_2d(np.asarray(a)) for a in (A2, A1, A0))
    w = np.atleast_1d(np.asarray(w))
    w_left = np.atleast_1d(np.asarray(w_left))
    if not (np.linalg.norm(w) > 0 and np.linalg.norm(w_left) > 0):
        raise InvalidArgumentError("left and right eigenvectors must be nonzero")
    denom = abs(c) * abs(np.vdot(w_left, (2.0 * c * A2 + A1) @ w))
    if denom == 0:
        raise DegenerateEigenvalueError(f"condition number undefined at c={c}")
    return float(_weighted_norm(A2, A1, A0, c) * np.linalg.norm(w_left) * np.linalg.norm(w) / denom)


def condition_linear(M) -> float:
    """κ_L = ‖M⁻¹‖₂‖M‖₂ = σ_max/σ_min, ``inf`` when M is singular."""
    s = scipy.linalg.svdvals(np.atleast_2d(np.asarray(M)))
    if s[-1] == 0:
        return math.inf
    return float(s[0] / s[-1])


@dataclass(frozen=True)
class AccuracyReport:
    """
    Accuracy of a candidate dispersion relation against a reference.

    Attributes
    ----------
    epsilon : float
        Relative ∞-norm error.
    errors : np.ndarray
        Per-point relative errors.
    n_z : int
        Collocation order of the candidate.
    method : str
        Label of the method that produced the candidate.
    """

    epsilon: float
    errors: np.ndarray
    n_z: int
    method: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "N_z": self.n_z,
            "epsilon": self.epsilon,
            "max_pointwise": float(np.max(self.errors)) if self.errors.size else 0.0,
        }


def accuracy_report(candidate, reference, n_z: int, method: str) -> AccuracyReport:
    return AccuracyReport(
        epsilon=normwise_error(candidate, reference),
        errors=pointwise_errors(candidate, reference),
        n_z=int(n_z),
        method=method,
    )


def _inf_norm(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if x.size else 0.0


@dataclass(frozen=True)
class StabilityReport:
    """
    Backward errors and condition numbers over a wavenumber sweep.

    Attributes
    ----------
    k : np.ndarray
        Wavenumbers of the sweep.
    eta_L, eta_Q : np.ndarray
        Backward errors of the path-following linear solve and the
        quadratic eigenproblem, per k.
    kappa_L, kappa_Q : np.ndarray
        Matching condition numbers, per k.
    """

    k: np.ndarray
    eta_L: np.ndarray
    eta_Q: np.ndarray
    kappa_L: np.ndarray
    kappa_Q: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def bound_L(self) -> np.ndarray:
        return self.kappa_L * self.eta_L

    @property
    def bound_Q(self) -> np.ndarray:
        return self.kappa_Q * self.eta_Q

    def aggregate(self) -> Dict[str, float]:
        """∞-norm aggregates and medians of every quantity."""
        out = {}
        for name in ("eta_L", "eta_Q", "kappa_L", "kappa_Q", "bound_L", "bound_Q"):
            values = np.asarray(getattr(self, name), dtype=float)
            out[name] = _inf_norm(values)
            out[f"median_{name}"] = float(np.median(values)) if values.size else 0.0
        return out


def forward_error_bounded(forward_error: float, kappa: float, eta: float, slack: float = 1.0) -> bool:
    """Check forward error ≤ κ·η (times ``slack``)."""
    return forward_error <= slack * kappa * eta


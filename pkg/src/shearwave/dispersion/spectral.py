"""
Chebyshev–Gauss–Lobatto collocation: nodes, differentiation matrices,
barycentric interpolation and Chebyshev-series convergence detection.

Nodes are ordered surface first (ζ = 1) down to the bottom (ζ = -1).
"""
import functools
import logging as log
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.fft

from .utils.consts import DEFAULT_HISTOGRAM_BINS, DEFAULT_PLATEAU_MARGIN
from .utils.errors import InvalidArgumentError


@dataclass(frozen=True)
class CollocationOperator:
    """
    CGL collocation operator on the physical interval [-h, 0].

    Attributes
    ----------
    zeta : np.ndarray
        Reference nodes on [-1, 1], strictly decreasing, length N_z + 1.
    z : np.ndarray
        Mapped nodes z = (h/2)(ζ - 1). For an unmapped operator z equals ζ.
    depth : Optional[float]
        Depth h of the mapped interval, ``None`` for the reference interval.
    D : np.ndarray
        First-derivative matrix with respect to z.
    D2 : np.ndarray
        Second-derivative matrix with respect to z.
    """

    zeta: np.ndarray
    z: np.ndarray
    depth: Optional[float]
    D: np.ndarray
    D2: np.ndarray

    def __post_init__(self):
        for arr in (self.zeta, self.z, self.D, self.D2):
            arr.setflags(write=False)

    @property
    def order(self) -> int:
        return self.zeta.size - 1

    @property
    def d_surface(self) -> np.ndarray:
        """First row of D without the bottom column (the free-surface derivative row d_f)."""
        return self.D[0, :-1]

    @property
    def D2_interior(self) -> np.ndarray:
        """Rows 2..N_z and columns 1..N_z of D²."""
        return self.D2[1:-1, :-1]

    @property
    def I_interior(self) -> np.ndarray:
        """Interior restriction of the identity, shape (N_z - 1, N_z)."""
        n = self.order
        return np.eye(n + 1)[1:-1, :-1]

    def _scale(self) -> float:
        return 1.0 if self.depth is None else 2.0 / self.depth


def cgl_points(n: int) -> np.ndarray:
    """
    Chebyshev–Gauss–Lobatto nodes cos(jπ/n), j = 0..n.

    Computed as sin(π(n - 2j)/(2n)) so that the grid is exactly symmetric.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"CGL order must be an integer >= 1, got {n}")
    n = int(n)
    return np.sin(math.pi * np.arange(n, -n - 1, -2) / (2.0 * n))


def _cgl_differences(n: int) -> np.ndarray:
    # x_i - x_j from the trig identity, flipped for accuracy near ζ = -1
    theta = np.arange(n + 1) * math.pi / n
    half_sum = (theta[:, None] + theta[None, :]) / 2.0
    half_diff = (theta[None, :] - theta[:, None]) / 2.0
    dx = 2.0 * np.sin(half_sum) * np.sin(half_diff)
    n1, n2 = (n + 1) // 2, int(math.ceil((n + 1) / 2.0))
    dx[n1:, :] = -np.flipud(np.fliplr(dx[:n2, :]))
    return dx


def _cgl_weights(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Barycentric weights 1/Π(x_j - x_k), scaled so that max |w| = 1."""
    x = np.asarray(nodes, dtype=float)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0.0):
        raise InvalidArgumentError("nodes must be distinct")
    # log-domain product avoids under/overflow on short intervals
    log_w = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    return sign * np.exp(log_w - log_w.max())


def _negative_sum_diagonal(mat: np.ndarray) -> None:
    off = mat.copy()
    np.fill_diagonal(off, 0.0)
    order = np.argsort(np.abs(off), axis=1, kind="stable")
    ordered = np.take_along_axis(off, order, axis=1)
    np.fill_diagonal(mat, -np.cumsum(ordered, axis=1)[:, -1])


def diff_matrices(
    nodes: np.ndarray,
    differences: Optional[np.ndarray] = None,
    weights: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    First and second spectral differentiation matrices on arbitrary distinct nodes.

    Args:
        nodes (np.ndarray): Distinct collocation nodes, length >= 2.
        differences (np.ndarray): Optional precomputed x_i - x_j (more accurate
            than direct subtraction for CGL nodes).
        weights (np.ndarray): Optional precomputed barycentric weights.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (D, D²) with diagonals set by the
        negative sum trick.

    Raises:
        InvalidArgumentError: fewer than two nodes, or duplicate nodes.
    """
    x = np.asarray(nodes, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidArgumentError("at least two nodes are required")
    dx = (x[:, None] - x[None, :]) if differences is None else np.array(differences, dtype=float)
    np.fill_diagonal(dx, 1.0)
    if np.any(dx == 0.0):
        raise InvalidArgumentError("nodes must be distinct")
    w = barycentric_weights(x) if weights is None else np.asarray(weights, dtype=float)

    D = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    _negative_sum_diagonal(D)

    D2 = 2.0 * D * (np.diag(D)[:, None] - 1.0 / dx)
    np.fill_diagonal(D2, 0.0)
    _negative_sum_diagonal(D2)
    return D, D2


def reference_operator(n: int) -> CollocationOperator:
    """Unmapped CGL operator on [-1, 1]."""
    zeta = cgl_points(n)
    D, D2 = diff_matrices(zeta, differences=_cgl_differences(int(n)), weights=_cgl_weights(int(n)))
    return CollocationOperator(zeta=zeta, z=zeta.copy(), depth=None, D=D, D2=D2)


def map_operator(op: CollocationOperator, h: float) -> CollocationOperator:
    """Map an operator onto [-h, 0] with z = (h/2)(ζ - 1) and chain-rule scaling."""
    if not h > 0:
        raise InvalidArgumentError(f"depth must be > 0, got {h}")
    h = float(h)
    back = 1.0 / op._scale()
    s = 2.0 / h
    D = (op.D * back) * s
    D2 = (op.D2 * back**2) * s**2
    return CollocationOperator(
        zeta=op.zeta.copy(), z=(h / 2.0) * (op.zeta - 1.0), depth=h, D=D, D2=D2
    )


@functools.lru_cache(maxsize=64)
def chebyshev_operator(n: int, depth: float = 1.0) -> CollocationOperator:
    """Cached CGL operator of order ``n`` mapped onto [-depth, 0]."""
    log.debug(f"Building CGL operator N_z={n}, h={depth}")
    return map_operator(reference_operator(n), depth)


def barycentric_eval(
    nodes: np.ndarray,
    values: np.ndarray,
    query_points,
    weights: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Evaluate the interpolating polynomial through (nodes, values) at query points.

    ``values`` may be a vector or a matrix whose rows correspond to nodes.
    Queries that coincide with a node return the stored value exactly.
    """
    x = np.asarray(nodes, dtype=float)
    f = np.asarray(values)
    if f.shape[0] != x.size:
        raise InvalidArgumentError("values must have one entry per node")
    w = barycentric_weights(x) if weights is None else np.asarray(weights, dtype=float)
    q = np.atleast_1d(np.asarray(query_points, dtype=float))

    diff = q[:, None] - x[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    kernel = w[None, :] / diff
    out = (kernel @ f.reshape(x.size, -1)) / kernel.sum(axis=1)[:, None]

    rows, cols = np.nonzero(exact)
    out[rows] = f.reshape(x.size, -1)[cols]
    out = out.reshape((q.size,) + f.shape[1:])
    return out if np.ndim(query_points) else out[0]


def chebyshev_coefficients(values: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of samples on CGL nodes (surface first), via a type-I DCT."""
    f = np.asarray(values)
    n = f.shape[0] - 1
    if n < 1:
        raise InvalidArgumentError("need at least two samples")
    coeffs = scipy.fft.dct(f, type=1, axis=0) / n
    coeffs[0] /= 2.0
    coeffs[-1] /= 2.0
    return coeffs


class SeriesConvergence(NamedTuple):
    converged: bool
    required_n: Optional[int]


def series_convergence(
    coefficients: np.ndarray,
    bins: int = DEFAULT_HISTOGRAM_BINS,
    plateau_margin: float = DEFAULT_PLATEAU_MARGIN,
) -> SeriesConvergence:
    """
    Decide whether a Chebyshev series has reached its roundoff plateau.

    A monotone envelope (running maximum from the tail) of the coefficient
    magnitudes is histogrammed in log10. The plateau is the fullest bin whose
    centre lies below the median log-magnitude; its level is the median of the
    envelope values inside that bin. The series has converged at the first
    index where the envelope is within ``plateau_margin`` of that level.

    Args:
        coefficients (np.ndarray): Chebyshev coefficients, nonempty.
        bins (int): Histogram bin count.
        plateau_margin (float): Multiplicative slack above the plateau level.

    Returns:
        SeriesConvergence: (converged, required_n); required_n is None when no
        plateau is found.
    """
    mags = np.abs(np.asarray(coefficients))
    if mags.ndim > 1:
        mags = mags.max(axis=tuple(range(1, mags.ndim)))
    if mags.size == 0:
        raise InvalidArgumentError("coefficient vector must be nonempty")
    if not np.any(mags > 0):
        return SeriesConvergence(True, 0)

    envelope = np.maximum.accumulate(mags[::-1])[::-1]
    tiny = np.finfo(float).tiny
    logs = np.log10(np.maximum(envelope, tiny))
    counts, edges = np.histogram(logs, bins=bins)
    centres = 0.5 * (edges[:-1] + edges[1:])
    median = np.median(logs)

    below = np.nonzero((centres < median) & (counts > 1))[0]
    if below.size == 0:
        return SeriesConvergence(False, None)
    best = below[np.argmax(counts[below])]

    in_bin = (logs >= edges[best]) & (logs <= edges[best + 1])
    level = np.median(logs[in_bin])
    entered = np.nonzero(logs <= level + math.log10(plateau_margin))[0]
    return SeriesConvergence(True, int(entered[0]))

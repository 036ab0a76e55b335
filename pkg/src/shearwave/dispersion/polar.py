"""
Polar field of path solutions for scattered (k, θ) queries.

Construction: an angular path at the seed radius k⁰ provides seeds for
radial paths at every angle knot; each radial path is re-anchored at the
fixed radius knots. Queries dense-evaluate the two bracketing radial slices
and interpolate in θ with cubic Hermite, taking ∂c/∂θ from the angular
bordered system.
"""
import json
import logging as log
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from shearwave.consts import PACKAGE_NAME
from .collocation import EigenSolution
from .pathfollow import (
    AngularField,
    IntegratorOptions,
    PathSolution,
    RadialField,
    dense_eval,
    pf_angular,
    pf_radial,
)
from .profiles import ShearProfile, profile_from_spec, project
from .spectral import CollocationOperator, chebyshev_operator
from .utils.common import resolve_version, utc_timestamp
from .utils.consts import DEFAULT_TOL, FIELD_FORMAT_VERSION, TWO_PI
from .utils.errors import (
    BudgetExceededError,
    ContinuationBreakdownError,
    InvalidArgumentError,
    OutOfRangeError,
    PartialFieldError,
    SchemaError,
)
from .utils.file_sha256 import spec_sha256


@dataclass(frozen=True, eq=False)
class PolarField:
    """
    Radial path slices on a polar grid.

    Attributes
    ----------
    theta : np.ndarray
        Angle knots (J,), strictly increasing; within [0, 2π) when periodic.
    k : np.ndarray
        Radius knots (I,), strictly increasing.
    V : np.ndarray
        States [w; c] at every (θ_j, k_i), shape (J, I, N_z + 1).
    Vdot : np.ndarray
        Radial derivatives dv/dk at the same points.
    k0 : float
        Radius of the angular seed path.
    profile : ShearProfile
        Two-component profile.
    operator : CollocationOperator
        Operator all slices were computed on.
    tol : float
        Integration tolerance.
    periodic : bool
        Whether angles wrap modulo 2π.
    """

    theta: np.ndarray
    k: np.ndarray
    V: np.ndarray
    Vdot: np.ndarray
    k0: float
    profile: ShearProfile
    operator: CollocationOperator
    tol: float
    periodic: bool = True
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.theta, self.k, self.V, self.Vdot):
            arr.setflags(write=False)

    @property
    def c(self) -> np.ndarray:
        """Node values c(k_i, θ_j), shape (J, I)."""
        return self.V[:, :, -1]

    def radial_slice(self, j: int) -> PathSolution:
        """Slice j as a re-anchored path (cubic Hermite between radius knots)."""
        return PathSolution(
            t=self.k,
            v=self.V[j],
            vdot=self.Vdot[j],
            t_mid=None,
            v_mid=None,
            tol=self.tol,
            direction="forward",
            parameter="k",
            profile=project(self.profile, float(self.theta[j])),
            operator=self.operator,
        )

    def query(self, k_q, theta_q, eigenvector: bool = False):
        return query(self, k_q, theta_q, eigenvector=eigenvector)


def _strictly_increasing(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 1 or np.any(~np.isfinite(x)):
        raise InvalidArgumentError(f"{name} knots must be a nonempty finite vector")
    if np.any(np.diff(x) <= 0):
        raise InvalidArgumentError(f"{name} knots must be strictly increasing")
    return x


def default_knots(
    k_range: Tuple[float, float], angles: int, radii: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Log-spaced radius knots and equispaced angle knots over [0, 2π)."""
    k_lo, k_hi = k_range
    if not 0 < k_lo < k_hi:
        raise InvalidArgumentError(f"invalid wavenumber range [{k_lo}, {k_hi}]")
    k = np.geomspace(k_lo, k_hi, int(radii))
    theta = TWO_PI * np.arange(int(angles)) / int(angles)
    return k, theta


def _reanchor(path: PathSolution, rhs: RadialField, k_knots: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    value = dense_eval(path, k_knots, eigenvector=True)
    V = np.column_stack([value.w, value.c])
    Vdot = np.array([rhs(k, v) for k, v in zip(k_knots, V)])
    return V, Vdot


def build_field(
    profile2d: ShearProfile,
    op: CollocationOperator,
    k_knots: Sequence[float],
    theta_knots: Sequence[float],
    k0: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    periodic: bool = True,
    jobs: int = 1,
    options: Optional[IntegratorOptions] = None,
    progress: bool = False,
) -> PolarField:
    """
    PF-G-c field construction.

    Args:
        profile2d (ShearProfile): Two-component profile.
        op (CollocationOperator): Operator shared by every slice.
        k_knots (Sequence[float]): Radius knots, strictly increasing, > 0.
        theta_knots (Sequence[float]): Angle knots, strictly increasing.
        k0 (float): Seed radius; defaults to the geometric mean of the radius span.
        tol (float): Integration tolerance of every path.
        periodic (bool): Angles wrap modulo 2π; knots must lie in [0, 2π).
        jobs (int): Worker threads for the radial slices.
        options (IntegratorOptions): Step control overrides.
        progress (bool): Show a progress bar over slices.

    Raises:
        PartialFieldError: some radial slices broke down or ran out of steps.
    """
    k = _strictly_increasing(k_knots, "radius")
    theta = _strictly_increasing(theta_knots, "angle")
    if not k[0] > 0:
        raise InvalidArgumentError("radius knots must be > 0")
    if periodic and (theta[0] < 0 or theta[-1] >= TWO_PI):
        raise InvalidArgumentError("periodic angle knots must lie in [0, 2*pi)")
    k0 = math.sqrt(k[0] * k[-1]) if k0 is None else float(k0)
    if not k[0] <= k0 <= k[-1]:
        raise InvalidArgumentError(f"seed radius {k0} outside [{k[0]}, {k[-1]}]")

    angular = pf_angular(profile2d, op, k0, (theta[0], theta[-1]), theta_seed=theta[0], tol=tol, options=options)
    seeds = dense_eval(angular, theta, eigenvector=True)

    def run(j: int):
        reduced = project(profile2d, float(theta[j]))
        w = seeds.w[j] / np.linalg.norm(seeds.w[j])
        seed = EigenSolution(k=k0, c=seeds.c[j], w=w, depth=op.depth)
        path = pf_radial(reduced, op, (k[0], k[-1]), tol=tol, seed=seed, options=options)
        return _reanchor(path, RadialField(reduced, op), k)

    V: List[Optional[np.ndarray]] = [None] * theta.size
    Vdot: List[Optional[np.ndarray]] = [None] * theta.size
    failed = []
    with tqdm(total=theta.size, desc="Radial slices", disable=not progress) as pbar:

        def collect(j, future_or_call):
            try:
                V[j], Vdot[j] = future_or_call()
            except (ContinuationBreakdownError, BudgetExceededError) as e:
                log.error(f"Radial slice at theta={theta[j]} failed: {e}")
                failed.append(float(theta[j]))
            pbar.update(1)

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(run, j) for j in range(theta.size)]
                for j, fut in enumerate(futures):
                    collect(j, fut.result)
        else:
            for j in range(theta.size):
                collect(j, lambda j=j: run(j))

    if failed:
        raise PartialFieldError(f"{len(failed)} of {theta.size} radial slices failed", failed_angles=sorted(failed))

    log.info(f"Built polar field: {theta.size} angles x {k.size} radii, seed radius k0={k0}")
    return PolarField(
        theta=theta,
        k=k,
        V=np.array(V),
        Vdot=np.array(Vdot),
        k0=k0,
        profile=profile2d,
        operator=op,
        tol=tol,
        periodic=periodic,
        meta={"created": utc_timestamp()},
    )


def _bracket(field: PolarField, theta_q: float) -> Tuple[int, int, float, float, float]:
    theta = field.theta
    if field.periodic:
        t = math.fmod(theta_q, TWO_PI)
        if t < 0:
            t += TWO_PI
        if t >= TWO_PI:
            t = 0.0
        knots = np.append(theta, theta[0] + TWO_PI)
    else:
        t = float(theta_q)
        if t < theta[0] or t > theta[-1]:
            raise OutOfRangeError(f"angle {theta_q} outside [{theta[0]}, {theta[-1]}]")
        knots = theta
    if t < knots[0]:
        # before the first knot on a periodic grid: bracket with the last knot, shifted back
        return theta.size - 1, 0, knots[-2] - TWO_PI, knots[0], t
    if knots.size == 1:
        return 0, 0, knots[0], knots[0], t
    l = int(np.clip(np.searchsorted(knots, t, side="right") - 1, 0, knots.size - 2))
    r = (l + 1) % theta.size
    return l, r, knots[l], knots[l + 1], t


def _angular_state(field: PolarField, j: int, k_q: float, theta_j: float):
    value = dense_eval(field.radial_slice(j), k_q, eigenvector=True)
    v = np.append(value.w, value.c)
    rate = AngularField(field.profile, field.operator, k_q)(theta_j, v)
    return v, rate


def query(field: PolarField, k_q, theta_q, eigenvector: bool = False):
    """
    c(k_q, θ_q) from the field (and the interpolated eigenvector if requested).

    Queries may be scalars or equal-length arrays.

    Raises:
        OutOfRangeError: k_q outside the radius span or θ_q outside a
            non-periodic angle span.
    """
    kq = np.atleast_1d(np.asarray(k_q, dtype=float))
    tq = np.atleast_1d(np.asarray(theta_q, dtype=float))
    if kq.shape != tq.shape:
        raise InvalidArgumentError("k and theta queries must have equal lengths")
    if np.any(kq < field.k[0]) or np.any(kq > field.k[-1]):
        raise OutOfRangeError(f"radius query outside [{field.k[0]}, {field.k[-1]}]")

    cs, ws = [], []
    for k, t in zip(kq, tq):
        l, r, t_l, t_r, t = _bracket(field, float(t))
        if t == t_l or t_l == t_r:
            value = dense_eval(field.radial_slice(l), k, eigenvector=True)
            cs.append(value.c)
            ws.append(value.w)
            continue
        if t == t_r:
            value = dense_eval(field.radial_slice(r), k, eigenvector=True)
            cs.append(value.c)
            ws.append(value.w)
            continue
        v0, f0 = _angular_state(field, l, k, t_l)
        v1, f1 = _angular_state(field, r, k, t_r)
        h = t_r - t_l
        x = (t - t_l) / h
        x2, x3 = x * x, x * x * x
        v = (2 * x3 - 3 * x2 + 1) * v0 + (x3 - 2 * x2 + x) * h * f0 + (3 * x2 - 2 * x3) * v1 + (x3 - x2) * h * f1
        cs.append(v[-1])
        ws.append(v[:-1])

    c = np.array(cs)
    if np.ndim(k_q) == 0 and np.ndim(theta_q) == 0:
        return (c[0], ws[0]) if eigenvector else c[0]
    return (c, np.array(ws)) if eigenvector else c


def field_provenance(field: PolarField) -> Dict[str, Any]:
    spec = field.profile.to_spec()
    return {
        "format_version": FIELD_FORMAT_VERSION,
        "profile": spec,
        "profile_sha256": spec_sha256(spec),
        "N_z": field.operator.order,
        "depth": field.operator.depth,
        "tol": field.tol,
        "k0": field.k0,
        "periodic": field.periodic,
        "created": field.meta.get("created"),
        "version": resolve_version(PACKAGE_NAME),
    }


def save_field(field: PolarField, path: str) -> str:
    """Write a field to a versioned ``.npz`` container with JSON provenance; returns the path written."""
    if not path.endswith(".npz"):
        path += ".npz"
    np.savez(
        path,
        theta=field.theta,
        k=field.k,
        V=field.V,
        Vdot=field.Vdot,
        provenance=np.array(json.dumps(field_provenance(field))),
    )
    log.info(f"Saved polar field to {path}")
    return path


def load_field(path: str) -> PolarField:
    """
    Read a field written by ``save_field``.

    Raises:
        SchemaError: unknown format version or a provenance hash mismatch.
    """
    with np.load(path, allow_pickle=False) as data:
        try:
            meta = json.loads(str(data["provenance"]))
            arrays = {name: data[name].copy() for name in ("theta", "k", "V", "Vdot")}
        except KeyError as e:
            raise SchemaError(f"field container is missing {e}", field=str(e).strip("'"))
    if meta.get("format_version") != FIELD_FORMAT_VERSION:
        raise SchemaError(f"unsupported field format version {meta.get('format_version')}", field="format_version")
    if spec_sha256(meta["profile"]) != meta.get("profile_sha256"):
        raise SchemaError("profile hash does not match the stored profile", field="profile_sha256")
    op = chebyshev_operator(int(meta["N_z"]), float(meta["depth"]))
    return PolarField(
        **arrays,
        k0=float(meta["k0"]),
        profile=profile_from_spec(meta["profile"]),
        operator=op,
        tol=float(meta["tol"]),
        periodic=bool(meta["periodic"]),
        meta={"created": meta.get("created")},
    )

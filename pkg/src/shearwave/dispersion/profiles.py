"""
Shear profiles U(z) on z ∈ [-1, 0] with analytic first and second derivatives.

A ``ShearProfile`` holds two horizontal components (U_x, U_y) and the Froude
number squared. Solvers work on a ``ReducedProfile``: the projection of the
current onto a wave direction θ.
"""
import functools
import logging as log
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, NamedTuple, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize_scalar

from .spectral import CollocationOperator
from .utils.consts import DEFAULT_RANGE_SAMPLES, RANGE_REFINE_XTOL
from .utils.errors import InvalidArgumentError
from .utils.schemas.profile import ComponentSpec, ProfileSpec

# fluid density in the nondimensional formulation
RHO = 1.0

_DOMAIN_SLACK = 1e-14


class Component(ABC):
    """A scalar velocity function of depth with its first two derivatives."""

    @abstractmethod
    def value(self, z):
        ...

    @abstractmethod
    def d1(self, z):
        ...

    @abstractmethod
    def d2(self, z):
        ...

    def to_spec(self) -> Dict[str, Any]:
        raise InvalidArgumentError(f"{type(self).__name__} has no file representation")

    def __call__(self, z):
        return self.value(z)


class PolynomialComponent(Component):
    """U(z) = Σ a_p z^p with ascending coefficients."""

    def __init__(self, coefficients: Sequence[float], name: str = "polynomial"):
        coeffs = [float(c) for c in coefficients]
        if not coeffs:
            raise InvalidArgumentError("polynomial profile needs at least one coefficient")
        self.coefficients = tuple(coeffs)
        self.name = name
        self._p = Polynomial(coeffs)
        self._dp = self._p.deriv(1)
        self._d2p = self._p.deriv(2)

    def value(self, z):
        return self._p(np.asarray(z, dtype=float))

    def d1(self, z):
        return self._dp(np.asarray(z, dtype=float))

    def d2(self, z):
        return self._d2p(np.asarray(z, dtype=float))

    def to_spec(self) -> Dict[str, Any]:
        return {"name": "polynomial", "coefficients": list(self.coefficients)}


class QuiescentComponent(PolynomialComponent):
    def __init__(self):
        super().__init__([0.0], name="quiescent")

    def to_spec(self) -> Dict[str, Any]:
        return {"name": "quiescent"}


class LinearComponent(PolynomialComponent):
    """Constant-vorticity current U(z) = a(z + 1) + b."""

    def __init__(self, a: float = 1.0, b: float = 0.0):
        self.a, self.b = float(a), float(b)
        super().__init__([self.a + self.b, self.a], name="linear")

    def to_spec(self) -> Dict[str, Any]:
        return {"name": "linear", "parameters": {"a": self.a, "b": self.b}}


class UTComponent(Component):
    """
    U(z) = (γ/2)(1 + δz) cos(β(-z)^α) + 1/2.

    Strongly sheared near the surface with an oscillating deep part; the
    default parameters give U(0) = 1 and U(-1) = 0.75.
    """

    def __init__(self, alpha: float = 2.0, beta: float = 4.0 * math.pi, gamma: float = 1.0, delta: float = 0.5):
        if alpha < 1.0:
            raise InvalidArgumentError("alpha must be >= 1 for a twice differentiable profile")
        self.alpha, self.beta, self.gamma, self.delta = float(alpha), float(beta), float(gamma), float(delta)

    def _phase(self, z):
        s = -np.asarray(z, dtype=float)
        return s, self.beta * s**self.alpha

    def _g(self, z):
        s, ph = self._phase(z)
        a, b = self.alpha, self.beta
        g = np.cos(ph)
        g1 = b * a * s ** (a - 1.0) * np.sin(ph)
        with np.errstate(divide="ignore", invalid="ignore"):
            low = np.where(s > 0, (a - 1.0) * s ** (a - 2.0) * np.sin(ph), 0.0)
        g2 = -b * a * (low + b * a * s ** (2.0 * a - 2.0) * np.cos(ph))
        return g, g1, g2

    def value(self, z):
        z = np.asarray(z, dtype=float)
        g, _, _ = self._g(z)
        return 0.5 * self.gamma * (1.0 + self.delta * z) * g + 0.5

    def d1(self, z):
        z = np.asarray(z, dtype=float)
        g, g1, _ = self._g(z)
        return 0.5 * self.gamma * (self.delta * g + (1.0 + self.delta * z) * g1)

    def d2(self, z):
        z = np.asarray(z, dtype=float)
        _, g1, g2 = self._g(z)
        return 0.5 * self.gamma * (2.0 * self.delta * g1 + (1.0 + self.delta * z) * g2)

    def to_spec(self) -> Dict[str, Any]:
        return {
            "name": "UT",
            "parameters": {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "delta": self.delta},
        }


# Illustrative river-like profile: monotone, U(0) = 0.5, U(-1) = 0.13.
# Not fitted to any measurement.
CR_COEFFICIENTS = (0.5, 0.9, 1.2, 1.35, 1.05, 0.45, 0.08)
CR_F2 = 0.01


class RiverComponent(PolynomialComponent):
    def __init__(self):
        super().__init__(CR_COEFFICIENTS, name="CR")

    def to_spec(self) -> Dict[str, Any]:
        return {"name": "CR"}


class LinearCombination(Component):
    """Σ weight_i · component_i, with zero weights dropped."""

    def __init__(self, terms: Sequence[Tuple[float, Component]]):
        self.terms = [(float(w), c) for w, c in terms if w != 0.0]

    def _combine(self, attr, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for w, c in self.terms:
            out = out + w * getattr(c, attr)(z)
        return out

    def value(self, z):
        return self._combine("value", z)

    def d1(self, z):
        return self._combine("d1", z)

    def d2(self, z):
        return self._combine("d2", z)


@dataclass(frozen=True, eq=False)
class ReducedProfile:
    """
    Scalar profile U_θ(z) = cos θ U_x(z) + sin θ U_y(z) seen by a wave travelling at angle θ.

    Attributes
    ----------
    component : Component
        The projected velocity function.
    theta : float
        Angle (radians) of projection.
    F2 : float
        Froude number squared.
    name : str
        Label of the parent profile.
    """

    component: Component
    theta: float
    F2: float
    name: str

    def value(self, z):
        return self.component.value(z)

    def d1(self, z):
        return self.component.d1(z)

    def d2(self, z):
        return self.component.d2(z)


@dataclass(frozen=True, eq=False)
class ShearProfile:
    """
    Two-component shear current.

    Attributes
    ----------
    x : Component
        Streamwise component U_x.
    y : Component
        Cross-stream component U_y.
    F2 : float
        Froude number squared, > 0.
    name : str
        Metadata label.
    """

    x: Component
    y: Component
    F2: float
    name: str = "custom"

    def __post_init__(self):
        if not self.F2 > 0:
            raise InvalidArgumentError(f"F2 must be > 0, got {self.F2}")

    def project(self, theta: float) -> ReducedProfile:
        return project(self, theta)

    def angular_derivative(self, theta: float) -> ReducedProfile:
        return angular_derivative(self, theta)

    def to_spec(self) -> Dict[str, Any]:
        return ProfileSpec(name=self.name, F2=self.F2, x=self.x.to_spec(), y=self.y.to_spec()).dict()


def _component(name: str, coefficients=None, **params) -> Component:
    if name == "UT":
        return UTComponent(**params)
    if name == "quiescent":
        return QuiescentComponent()
    if name == "linear":
        return LinearComponent(**params)
    if name == "polynomial":
        if coefficients is None:
            raise InvalidArgumentError("polynomial profile requires coefficients")
        return PolynomialComponent(coefficients)
    if name == "CR":
        return RiverComponent()
    raise InvalidArgumentError(f"unknown profile '{name}'")


BUILTIN_PROFILES = ("UT", "quiescent", "linear", "polynomial", "CR")

_DEFAULT_F2 = {"CR": CR_F2}


def builtin_profile(name: str, F2: float = None, coefficients: Sequence[float] = None, **params) -> ShearProfile:
    """
    Build one of the built-in profiles as the U_x component, with U_y quiescent.

    Args:
        name (str): One of ``UT``, ``quiescent``, ``linear``, ``polynomial``, ``CR``.
        F2 (float): Froude number squared; defaults to 0.05 (0.01 for ``CR``).
        coefficients (Sequence[float]): Ascending coefficients for ``polynomial``.
        **params: Shape overrides (alpha, beta, gamma, delta for UT; a, b for linear).

    Raises:
        InvalidArgumentError: unknown name or invalid parameters.
    """
    if name not in BUILTIN_PROFILES:
        raise InvalidArgumentError(f"unknown profile '{name}', expected one of {', '.join(BUILTIN_PROFILES)}")
    try:
        comp = _component(name, coefficients=coefficients, **params)
    except TypeError as e:
        raise InvalidArgumentError(f"invalid parameters for profile '{name}': {e}")
    F2 = _DEFAULT_F2.get(name, 0.05) if F2 is None else F2
    return ShearProfile(x=comp, y=QuiescentComponent(), F2=F2, name=name)


def combine_profiles(x: ShearProfile, y: ShearProfile, F2: float = None, name: str = None) -> ShearProfile:
    """Two-component profile with U_x taken from ``x`` and U_y from ``y``'s streamwise component."""
    return ShearProfile(
        x=x.x, y=y.x, F2=x.F2 if F2 is None else F2, name=name or f"{x.name}/{y.name}"
    )


def profile_from_spec(spec: Union[ProfileSpec, Dict[str, Any]]) -> ShearProfile:
    if not isinstance(spec, ProfileSpec):
        spec = ProfileSpec.parse_obj(spec)

    def build(c: ComponentSpec) -> Component:
        return _component(c.name, coefficients=c.coefficients, **c.parameters)

    return ShearProfile(x=build(spec.x), y=build(spec.y), F2=spec.F2, name=spec.name)


def project(profile: ShearProfile, theta: float) -> ReducedProfile:
    ct, st = math.cos(theta), math.sin(theta)
    comp = LinearCombination([(ct, profile.x), (st, profile.y)])
    return ReducedProfile(component=comp, theta=float(theta), F2=profile.F2, name=profile.name)


def angular_derivative(profile: ShearProfile, theta: float) -> ReducedProfile:
    ct, st = math.cos(theta), math.sin(theta)
    comp = LinearCombination([(-st, profile.x), (ct, profile.y)])
    return ReducedProfile(component=comp, theta=float(theta), F2=profile.F2, name=profile.name)


@dataclass(frozen=True)
class SampledProfile:
    """
    A profile evaluated on collocation nodes.

    Interior restrictions keep rows 2..N_z and columns 1..N_z of the
    corresponding diagonal matrix, matching the row-replaced discretisation.
    """

    u: np.ndarray
    du: np.ndarray
    d2u: np.ndarray

    @property
    def U2(self) -> np.ndarray:
        return np.diag(self.d2u)

    @staticmethod
    def interior(vec: np.ndarray) -> np.ndarray:
        return np.diag(vec)[1:-1, :-1]

    @property
    def U_int(self) -> np.ndarray:
        return self.interior(self.u)

    @property
    def U2_int(self) -> np.ndarray:
        return self.interior(self.d2u)

    def combine(self, weight: float, other: "SampledProfile", other_weight: float) -> "SampledProfile":
        return SampledProfile(
            u=weight * self.u + other_weight * other.u,
            du=weight * self.du + other_weight * other.du,
            d2u=weight * self.d2u + other_weight * other.d2u,
        )


def _sample_component(comp, op: CollocationOperator) -> SampledProfile:
    z = op.z
    if z.min() < -1.0 - _DOMAIN_SLACK or z.max() > _DOMAIN_SLACK:
        raise InvalidArgumentError("operator nodes must lie in [-1, 0]")
    return SampledProfile(u=np.asarray(comp.value(z), float), du=np.asarray(comp.d1(z), float), d2u=np.asarray(comp.d2(z), float))


def sample(profile: Union[ReducedProfile, Component], op: CollocationOperator) -> SampledProfile:
    """Evaluate U, U' and U'' of a reduced profile on the operator nodes."""
    comp = profile.component if isinstance(profile, ReducedProfile) else profile
    return _sample_component(comp, op)


def sample_components(profile: ShearProfile, op: CollocationOperator) -> Tuple[SampledProfile, SampledProfile]:
    """Sample U_x and U_y once so projections can be formed by linear combination."""
    return _sample_component(profile.x, op), _sample_component(profile.y, op)


class EssentialRange(NamedTuple):
    lo: float
    hi: float

    def contains(self, c: float) -> bool:
        return self.lo <= c <= self.hi


def _refine(fun, z, i, sign):
    lo, hi = z[max(i - 1, 0)], z[min(i + 1, z.size - 1)]
    res = minimize_scalar(
        lambda t: sign * float(fun(t)), bounds=(lo, hi), method="bounded", options={"xatol": RANGE_REFINE_XTOL}
    )
    return sign * res.fun if res.success else sign * np.inf


@functools.lru_cache(maxsize=256)
def essential_range(profile: ReducedProfile, samples: int = DEFAULT_RANGE_SAMPLES) -> EssentialRange:
    """
    Infimum and supremum of U_θ over [-1, 0]: dense sampling refined by bounded
    scalar minimisation around the extreme samples.
    """
    z = np.linspace(-1.0, 0.0, int(samples))
    u = profile.value(z)
    i_lo, i_hi = int(np.argmin(u)), int(np.argmax(u))
    lo = min(u[i_lo], _refine(profile.value, z, i_lo, 1.0))
    hi = max(u[i_hi], _refine(profile.value, z, i_hi, -1.0))
    log.debug(f"Essential range of {profile.name} at theta={profile.theta}: [{lo}, {hi}]")
    return EssentialRange(float(lo), float(hi))


def derivative_mismatch(comp, points: np.ndarray, step: float = 1e-6) -> Tuple[float, float]:
    """
    Relative mismatch between supplied derivatives and centred finite differences.

    Returns (first derivative mismatch, second derivative mismatch), each scaled
    by max(1, |exact|).
    """
    z = np.clip(np.asarray(points, float), -1.0 + step, -step)
    fd1 = (comp.value(z + step) - comp.value(z - step)) / (2.0 * step)
    fd2 = (comp.d1(z + step) - comp.d1(z - step)) / (2.0 * step)
    e1 = np.max(np.abs(fd1 - comp.d1(z)) / np.maximum(1.0, np.abs(comp.d1(z))))
    e2 = np.max(np.abs(fd2 - comp.d2(z)) / np.maximum(1.0, np.abs(comp.d2(z))))
    return float(e1), float(e2)

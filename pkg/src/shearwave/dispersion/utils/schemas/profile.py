from typing import Dict, List, Literal, Optional
from pydantic import BaseModel, validator, root_validator

# parameters each built-in component accepts as overrides
COMPONENT_PARAMETERS = {
    "UT": {"alpha", "beta", "gamma", "delta"},
    "quiescent": set(),
    "linear": {"a", "b"},
    "polynomial": set(),
    "CR": set(),
}


class ComponentSpec(BaseModel):
    """
    One velocity component of a shear profile.

    Attributes
    ----------
    name : Literal["UT", "quiescent", "linear", "polynomial", "CR"]
        Built-in shape of the component.
    coefficients : Optional[List[float]]
        Ascending power-series coefficients in z. Required for (and only
        allowed with) ``polynomial``.
    parameters : Dict[str, float]
        Overrides of the built-in shape parameters, e.g. ``{"beta": 6.28}``
        for ``UT`` or ``{"a": 0.2, "b": 0.0}`` for ``linear``.
    """

    name: Literal["UT", "quiescent", "linear", "polynomial", "CR"] = "quiescent"
    coefficients: Optional[List[float]] = None
    parameters: Dict[str, float] = {}

    class Config:
        extra = "forbid"

    @root_validator(skip_on_failure=True)
    def _check_shape(cls, values):
        name = values.get("name")
        coeffs = values.get("coefficients")
        if name == "polynomial":
            if not coeffs:
                raise ValueError("coefficients: required for a polynomial component")
        elif coeffs is not None:
            raise ValueError(f"coefficients: not allowed for a {name} component")

        unknown = set(values.get("parameters", {})) - COMPONENT_PARAMETERS[name]
        if unknown:
            raise ValueError(f"parameters: unknown for {name}: {sorted(unknown)}")
        return values


class ProfileSpec(BaseModel):
    """
    Declarative description of a two-component shear profile.

    Attributes
    ----------
    name : str
        Label carried into outputs and seed records.
    F2 : float
        Froude number squared, strictly positive.
    x : ComponentSpec
        Streamwise component U_x.
    y : ComponentSpec
        Cross-stream component U_y. Defaults to quiescent.
    """

    name: str = "custom"
    F2: float
    x: ComponentSpec
    y: ComponentSpec = ComponentSpec()

    class Config:
        extra = "forbid"

    @validator("F2")
    def _positive_froude(cls, v):
        if not v > 0:
            raise ValueError("F2 must be > 0")
        return v

import math
from typing import List, Literal, Optional
from pydantic import BaseModel, root_validator, validator

from ..consts import (
    DEFAULT_ANGLES,
    DEFAULT_C_MAX,
    DEFAULT_C_MIN,
    DEFAULT_DELTA,
    DEFAULT_DEPTH,
    DEFAULT_NZ,
    DEFAULT_RADII,
    DEFAULT_TOL,
    MAX_TOL,
    MIN_TOL,
)
from .profile import ProfileSpec

COMMANDS = (
    "solve-forward",
    "solve-backward",
    "path",
    "path-angular",
    "grid-build",
    "grid-query",
    "adaptive-path",
    "convergence",
    "stability",
    "bench",
    "flow-field",
)


class RunConfig(BaseModel):
    """
    Validated configuration of one CLI run.

    Attributes
    ----------
    command : str
        Subcommand to run.
    profile : Optional[ProfileSpec]
        Shear profile; not needed by ``grid-query``, which reads it from the field.
    theta : float
        Wave direction (radians) the profile is projected onto.
    n_z : int
        Collocation order N_z.
    depth : float
        Operator depth h in (0, 1].
    k, c : List[float]
        Wavenumbers / phase velocities for point solves and queries.
    k_min, k_max : Optional[float]
        Wavenumber span of paths and fields.
    k_seed : Optional[float]
        Seed wavenumber of a radial path, or seed radius of a polar field.
    theta_min, theta_max : float
        Angular span of angular paths.
    tol : float
        Integrator tolerance.
    log_k : bool
        Integrate radial paths in ln k.
    query : int
        Number of dense-output query points (0 writes the control points).
    delta, c_min, c_max : float
        Depth plan constants.
    adaptive : bool
        Map point solves onto the effective depth h_δ(k).
    angles, radii : int
        Polar field grid sizes.
    jobs : int
        Worker threads for independent paths.
    output : Optional[str]
        Output path, ``None`` for standard output.
    format : str
        ``csv`` or ``json``.
    eigenvectors : bool
        Include eigenvectors in JSON output.
    seed_in, seed_out : Optional[str]
        Seed record to start a radial path from / to write after a point solve.
    field_path : Optional[str]
        Polar field container (written by ``grid-build``, read by ``grid-query``).
    plan_out : Optional[str]
        Where ``adaptive-path`` dumps its depth plan.
    random : int
        Number of random queries drawn with ``rng_seed``.
    rng_seed : int
        Seed of the query generator.
    methods : List[str]
        Benchmarked methods.
    n_q : List[int]
        Benchmarked query counts.
    targets : List[float]
        Benchmarked accuracy targets.
    reps : int
        Benchmark repetitions.
    """

    command: Literal[COMMANDS]
    profile: Optional[ProfileSpec] = None
    theta: float = 0.0
    n_z: int = DEFAULT_NZ
    depth: float = DEFAULT_DEPTH
    k: List[float] = []
    c: List[float] = []
    k_min: Optional[float] = None
    k_max: Optional[float] = None
    k_seed: Optional[float] = None
    theta_min: float = 0.0
    theta_max: float = math.pi
    tol: float = DEFAULT_TOL
    log_k: bool = False
    query: int = 0
    delta: float = DEFAULT_DELTA
    c_min: float = DEFAULT_C_MIN
    c_max: float = DEFAULT_C_MAX
    adaptive: bool = False
    angles: int = DEFAULT_ANGLES
    radii: int = DEFAULT_RADII
    jobs: int = 1
    output: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    eigenvectors: bool = False
    seed_in: Optional[str] = None
    seed_out: Optional[str] = None
    field_path: Optional[str] = None
    plan_out: Optional[str] = None
    random: int = 0
    rng_seed: int = 0
    methods: List[Literal["CL-c", "PF", "PF-G"]] = ["CL-c", "PF", "PF-G"]
    n_q: List[int] = [10, 100, 1000]
    targets: List[float] = [1e-4, 1e-7]
    reps: int = 5

    class Config:
        extra = "forbid"

    @validator("n_z")
    def _order(cls, v):
        if v < 2:
            raise ValueError("N_z must be >= 2")
        return v

    @validator("depth")
    def _depth(cls, v):
        if not 0 < v <= 1:
            raise ValueError("depth must lie in (0, 1]")
        return v

    @validator("tol")
    def _tol(cls, v):
        if not MIN_TOL <= v <= MAX_TOL:
            raise ValueError(f"tol must lie in [{MIN_TOL}, {MAX_TOL}]")
        return v

    @validator("k", each_item=True)
    def _positive_k(cls, v):
        if not v > 0:
            raise ValueError("wavenumbers must be > 0")
        return v

    @validator("delta")
    def _delta(cls, v):
        if not 0 < v < 1:
            raise ValueError("delta must lie in (0, 1)")
        return v

    @validator("query", "random", "jobs", "angles", "radii", "reps")
    def _counts(cls, v, field):
        low = 0 if field.name in ("query", "random") else 1
        if v < low:
            raise ValueError(f"{field.name} must be >= {low}")
        return v

    @root_validator(skip_on_failure=True)
    def _check_ranges(cls, values):
        if not 0 < values["c_min"] < values["c_max"] < 1:
            raise ValueError("c_min: need 0 < c_min < c_max < 1")
        k_min, k_max = values.get("k_min"), values.get("k_max")
        if k_min is not None and k_max is not None and not 0 < k_min <= k_max:
            raise ValueError("k_min: need 0 < k_min <= k_max")
        if values["theta_min"] > values["theta_max"]:
            raise ValueError("theta_min: need theta_min <= theta_max")
        if values["command"] != "grid-query" and values.get("profile") is None:
            raise ValueError("profile: required")
        return values

import argparse
import json
import logging as log
import math
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from shearwave.consts import PRODUCT_NAME
from shearwave.dispersion import __version__
from .adaptive import h_delta, pf_radial_adaptive, solve_forward_adaptive
from .benchmark import CSV_COLUMNS, METHODS, PATH_METHODS, benchmark, break_even, stability_sweep
from .collocation import reconstruct_flow, solve_backward, solve_forward
from .io import load_json, offending_field, parse_profile_spec, read_seed, write_results, write_seed
from .pathfollow import PathSolution, dense_eval, export_seed, import_seed, pf_angular, pf_radial
from .polar import build_field, default_knots, load_field, query, save_field
from .profiles import BUILTIN_PROFILES, builtin_profile, combine_profiles, profile_from_spec, project
from .spectral import chebyshev_coefficients, chebyshev_operator, series_convergence
from .utils.consts import (
    DEFAULT_ANGLES,
    DEFAULT_C_MAX,
    DEFAULT_C_MIN,
    DEFAULT_DELTA,
    DEFAULT_DEPTH,
    DEFAULT_NZ,
    DEFAULT_RADII,
    DEFAULT_TOL,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    JOBS_ENV_VAR,
    TWO_PI,
)
from .utils.errors import (
    BudgetExceededError,
    ContinuationBreakdownError,
    DispersionError,
    InvalidArgumentError,
    InvalidSeedError,
    SchemaError,
    StaleSeedError,
)
from .utils.file_sha256 import file_sha256
from .utils.schemas.config import RunConfig
from .utils.schemas.profile import ProfileSpec

# errors reported as usage problems (exit 2); every other DispersionError is numerical (exit 3)
USAGE_ERRORS = (InvalidArgumentError, SchemaError, InvalidSeedError, StaleSeedError)

Records = List[Dict[str, Any]]


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV_VAR, "1")))
    except ValueError:
        log.warning(f"Ignoring non-integer {JOBS_ENV_VAR}={os.environ[JOBS_ENV_VAR]}")
        return 1


def resolve_profile(name: str, F2: Optional[float] = None) -> ProfileSpec:
    """A profile spec from a built-in name or a JSON file path."""
    if os.path.isfile(name):
        data = load_json(name)
        if F2 is not None:
            data = {**data, "F2": F2}
        return parse_profile_spec(data)
    if name not in BUILTIN_PROFILES:
        raise InvalidArgumentError(
            f"unknown profile '{name}': expected a spec file or one of {', '.join(BUILTIN_PROFILES)}"
        )
    return ProfileSpec.parse_obj(builtin_profile(name, F2=F2).to_spec())


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", default="UT", help="Built-in profile name or profile-spec JSON path.")
    common.add_argument("--profile-y", default=None, help="Built-in profile used as the cross-stream component U_y.")
    common.add_argument("--F2", type=float, default=None, help="Froude number squared (overrides the profile).")
    common.add_argument("--theta", type=float, default=0.0, help="Wave direction in radians.")
    common.add_argument("--Nz", dest="n_z", type=int, default=DEFAULT_NZ, help="Collocation order N_z.")
    common.add_argument("--depth", type=float, default=DEFAULT_DEPTH, help="Operator depth h.")
    common.add_argument("-o", "--output", default=None, help="Output file (default: standard output).")
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="Output format.")
    common.add_argument("--eigenvectors", action="store_true", help="Include eigenvectors in JSON output.")
    common.add_argument("--verbose", "-v", action="count", default=0, help="Verbosity level: -v, -vv")

    span = argparse.ArgumentParser(add_help=False)
    span.add_argument("--k-min", type=float, default=None, help="Lower end of the wavenumber span.")
    span.add_argument("--k-max", type=float, default=None, help="Upper end of the wavenumber span.")
    span.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Integrator tolerance.")
    span.add_argument("--query", type=int, default=0, help="Log-spaced query points (0: control points).")
    span.add_argument("--jobs", type=int, default=_default_jobs(), help=f"Worker threads (env {JOBS_ENV_VAR}).")

    plan = argparse.ArgumentParser(add_help=False)
    plan.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="Decay tolerance of the depth plan.")
    plan.add_argument("--c-min", type=float, default=DEFAULT_C_MIN, help="Depth plan constant C_min.")
    plan.add_argument("--c-max", type=float, default=DEFAULT_C_MAX, help="Depth plan constant C_max.")

    parser = argparse.ArgumentParser(
        prog="shearwave", description="Dispersion relations of water waves on shear currents.", formatter_class=fmt
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("solve-forward", parents=[common, plan], formatter_class=fmt, help="CL-c: c at given k.")
    p.add_argument("--k", type=_float_list, required=True, help="Comma-separated wavenumbers.")
    p.add_argument("--adaptive-depth", dest="adaptive", action="store_true", help="Solve at depth h_delta(k).")
    p.add_argument("--seed-out", default=None, help="Write a seed record of the first solution.")

    p = sub.add_parser("solve-backward", parents=[common], formatter_class=fmt, help="CL-k: k at given c.")
    p.add_argument("--c", type=_float_list, required=True, help="Comma-separated phase velocities.")

    p = sub.add_parser("path", parents=[common, span], formatter_class=fmt, help="Radial path-following.")
    p.add_argument("--k-seed", type=float, default=None, help="Seed wavenumber (default: midpoint).")
    p.add_argument("--k", type=_float_list, default=[], help="Explicit query wavenumbers.")
    p.add_argument("--log-k", action="store_true", help="Integrate in ln k.")
    p.add_argument("--seed-in", default=None, help="Seed record to start from.")

    p = sub.add_parser("path-angular", parents=[common, span], formatter_class=fmt, help="Angular path-following.")
    p.add_argument("--k", type=_float_list, required=True, help="Fixed wavenumber k0.")
    p.add_argument("--theta-min", type=float, default=0.0, help="Start angle (radians).")
    p.add_argument("--theta-max", type=float, default=math.pi, help="End angle (radians).")

    p = sub.add_parser("grid-build", parents=[common, span], formatter_class=fmt, help="Build a polar field.")
    p.add_argument("--field", dest="field_path", required=True, help="Field container to write (.npz).")
    p.add_argument("--k-seed", type=float, default=None, help="Seed radius k0 (default: geometric mean).")
    p.add_argument("--angles", type=int, default=DEFAULT_ANGLES, help="Number of angle knots J.")
    p.add_argument("--radii", type=int, default=DEFAULT_RADII, help="Number of radius knots I.")

    p = sub.add_parser("grid-query", parents=[common], formatter_class=fmt, help="Query a polar field.")
    p.add_argument("--field", dest="field_path", required=True, help="Field container to read.")
    p.add_argument("--k", type=_float_list, default=[], help="Query wavenumbers (at --theta).")
    p.add_argument("--random", type=int, default=0, help="Number of random (k, theta) queries.")
    p.add_argument("--rng-seed", type=int, default=0, help="Seed of the query generator.")

    p = sub.add_parser("adaptive-path", parents=[common, span, plan], formatter_class=fmt, help="Adaptive-depth path.")
    p.add_argument("--k", type=_float_list, default=[], help="Explicit query wavenumbers.")
    p.add_argument("--log-k", action="store_true", help="Integrate in ln k.")
    p.add_argument("--plan-out", default=None, help="Write the depth plan as JSON.")

    p = sub.add_parser("convergence", parents=[common, plan], formatter_class=fmt, help="Eigenvector convergence.")
    p.add_argument("--k", type=_float_list, required=True, help="Comma-separated wavenumbers.")

    p = sub.add_parser("stability", parents=[common, span], formatter_class=fmt, help="Backward errors and conditions.")
    p.add_argument("--k", type=_float_list, default=[], help="Explicit wavenumbers (else --query log-spaced).")

    p = sub.add_parser("bench", parents=[common], formatter_class=fmt, help="Timing benchmark.")
    p.add_argument("--methods", type=lambda s: s.split(","), default=list(METHODS), help="Methods to time.")
    p.add_argument("--nq", dest="n_q", type=_int_list, default=[10, 100, 1000], help="Query counts.")
    p.add_argument("--targets", type=_float_list, default=[1e-4, 1e-7], help="Accuracy targets.")
    p.add_argument("--reps", type=int, default=5, help="Repetitions per measurement.")
    p.add_argument("--k-min", type=float, default=0.1, help="Lower end of the query span.")
    p.add_argument("--k-max", type=float, default=10.0, help="Upper end of the query span.")
    p.add_argument("--rng-seed", type=int, default=0, help="Seed of the query generator.")
    p.add_argument("--angles", type=int, default=DEFAULT_ANGLES, help="PF-G angle knots J.")
    p.add_argument("--radii", type=int, default=DEFAULT_RADII, help="PF-G radius knots I.")
    p.add_argument("--jobs", type=int, default=_default_jobs(), help=f"Worker threads (env {JOBS_ENV_VAR}).")

    p = sub.add_parser("flow-field", parents=[common], formatter_class=fmt, help="Velocity and pressure amplitudes.")
    p.add_argument("--k", type=_float_list, required=True, help="Wavenumber magnitude |k|.")

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {
        name: value for name, value in vars(args).items() if name in RunConfig.__fields__ and name != "profile"
    }
    if args.command != "grid-query":
        spec = resolve_profile(args.profile, args.F2)
        if args.profile_y:
            x = profile_from_spec(spec)
            y = builtin_profile(args.profile_y)
            spec = ProfileSpec.parse_obj(combine_profiles(x, y).to_spec())
        values["profile"] = spec
    try:
        return RunConfig.parse_obj(values)
    except ValidationError as e:
        field = offending_field(e)
        raise SchemaError(f"invalid configuration in field '{field}': {e}", field=field)


def _operator(cfg: RunConfig):
    return chebyshev_operator(cfg.n_z, cfg.depth)


def _real(c) -> float:
    return float(np.real(c))


def _need_span(cfg: RunConfig) -> Tuple[float, float]:
    if cfg.k_min is None or cfg.k_max is None:
        raise InvalidArgumentError("--k-min and --k-max are required")
    return cfg.k_min, cfg.k_max


def _vector(w) -> List[float]:
    return [float(x) for x in np.real(w)]


def _path_records(path: PathSolution, queries: Optional[np.ndarray], cfg: RunConfig) -> Records:
    if queries is None:
        points, cs, ws = path.points, path.c, path.v[:, :-1]
    else:
        value = dense_eval(path, queries, eigenvector=cfg.eigenvectors)
        points, cs, ws = queries, value.c, value.w
    rows = []
    for i, (k, c) in enumerate(zip(points, cs)):
        row = {"k": float(k), "c": _real(c)}
        if cfg.eigenvectors and cfg.format == "json":
            row["w"] = _vector(ws[i])
        rows.append(row)
    return rows


def run_solve_forward(cfg: RunConfig) -> Tuple[Records, str]:
    reduced = project(profile_from_spec(cfg.profile), cfg.theta)
    rows = []
    first = None
    for k in cfg.k:
        if cfg.adaptive:
            sol, op = solve_forward_adaptive(reduced, cfg.n_z, k, cfg.delta)
        else:
            op = _operator(cfg)
            sol = solve_forward(reduced, op, k)
        first = first or (sol, op)
        row = {"k": k, "c": _real(sol.c), "theta": cfg.theta, "depth": op.depth}
        if cfg.eigenvectors and cfg.format == "json":
            row["w"] = _vector(sol.w)
        if sol.warnings:
            row["warnings"] = "; ".join(sol.warnings)
        rows.append(row)
    if cfg.seed_out:
        write_seed(export_seed(first[0], reduced, first[1]), cfg.seed_out)
    return rows, f"solve-forward: {len(rows)} wavenumbers on {cfg.profile.name}"


def run_solve_backward(cfg: RunConfig) -> Tuple[Records, str]:
    reduced = project(profile_from_spec(cfg.profile), cfg.theta)
    op = _operator(cfg)
    rows = []
    for c in cfg.c:
        sol = solve_backward(reduced, op, c)
        row = {"c": c, "k": sol.k, "theta": cfg.theta}
        if cfg.eigenvectors and cfg.format == "json":
            row["w"] = _vector(sol.w)
        rows.append(row)
    return rows, f"solve-backward: {len(rows)} phase velocities on {cfg.profile.name}"


def _queries(cfg: RunConfig, lo: float, hi: float) -> Optional[np.ndarray]:
    if cfg.k:
        return np.asarray(cfg.k, dtype=float)
    if cfg.query > 0:
        return np.geomspace(lo, hi, cfg.query)
    return None


def _write_partial(e, cfg: RunConfig) -> None:
    if e.partial is not None and cfg.output and len(e.partial.t) > 0:
        write_results(cfg.output, _path_records(e.partial, None, cfg), cfg.format)
        log.error(f"Wrote {len(e.partial.t)} accepted points to {cfg.output} before the failure")


def run_path(cfg: RunConfig) -> Tuple[Records, str]:
    k_min, k_max = _need_span(cfg)
    reduced = project(profile_from_spec(cfg.profile), cfg.theta)
    op = _operator(cfg)
    seed = import_seed(read_seed(cfg.seed_in), reduced, op) if cfg.seed_in else None
    try:
        path = pf_radial(reduced, op, (k_min, k_max), k_seed=cfg.k_seed, tol=cfg.tol, seed=seed, log_k=cfg.log_k)
    except (ContinuationBreakdownError, BudgetExceededError) as e:
        _write_partial(e, cfg)
        raise
    rows = _path_records(path, _queries(cfg, k_min, k_max), cfg)
    return rows, f"path: {path.accepted} steps accepted, {path.rejected} rejected, {len(rows)} rows"


def run_path_angular(cfg: RunConfig) -> Tuple[Records, str]:
    if len(cfg.k) != 1:
        raise InvalidArgumentError("path-angular takes exactly one wavenumber")
    k0 = cfg.k[0]
    op = _operator(cfg)
    path = pf_angular(profile_from_spec(cfg.profile), op, k0, (cfg.theta_min, cfg.theta_max), tol=cfg.tol)
    thetas = np.linspace(cfg.theta_min, cfg.theta_max, cfg.query) if cfg.query > 0 else path.points
    value = dense_eval(path, thetas)
    rows = [{"theta": float(t), "k": k0, "c": _real(c)} for t, c in zip(thetas, np.atleast_1d(value.c))]
    return rows, f"path-angular: {path.accepted} steps accepted, {path.rejected} rejected, {len(rows)} rows"


def run_grid_build(cfg: RunConfig) -> Tuple[Records, str]:
    k_min, k_max = _need_span(cfg)
    k_knots, theta_knots = default_knots((k_min, k_max), cfg.angles, cfg.radii)
    field = build_field(
        profile_from_spec(cfg.profile),
        _operator(cfg),
        k_knots,
        theta_knots,
        k0=cfg.k_seed,
        tol=cfg.tol,
        jobs=cfg.jobs,
        progress=log.getLogger().isEnabledFor(log.INFO),
    )
    path = save_field(field, cfg.field_path)
    rows = [
        {"k": float(k), "theta": float(t), "c": _real(field.c[j, i])}
        for j, t in enumerate(field.theta)
        for i, k in enumerate(field.k)
    ]
    return rows, f"grid-build: {field.theta.size} x {field.k.size} field written to {path} (sha256 {file_sha256(path)})"


def run_grid_query(cfg: RunConfig) -> Tuple[Records, str]:
    field = load_field(cfg.field_path)
    if cfg.random > 0:
        rng = np.random.default_rng(cfg.rng_seed)
        ks = rng.uniform(field.k[0], field.k[-1], cfg.random)
        lo, hi = (0.0, TWO_PI) if field.periodic else (field.theta[0], field.theta[-1])
        thetas = rng.uniform(lo, hi, cfg.random)
    elif cfg.k:
        ks = np.asarray(cfg.k, dtype=float)
        thetas = np.full(ks.size, cfg.theta)
    else:
        raise InvalidArgumentError("grid-query needs --k or --random")
    cs = query(field, ks, thetas)
    rows = [{"k": float(k), "theta": float(t), "c": _real(c)} for k, t, c in zip(ks, thetas, cs)]
    return rows, f"grid-query: {len(rows)} queries"


def run_adaptive_path(cfg: RunConfig) -> Tuple[Records, str]:
    k_min, k_max = _need_span(cfg)
    reduced = project(profile_from_spec(cfg.profile), cfg.theta)
    blended = pf_radial_adaptive(
        reduced,
        (k_min, k_max),
        tol=cfg.tol,
        delta=cfg.delta,
        c_min=cfg.c_min,
        c_max=cfg.c_max,
        order=cfg.n_z,
        jobs=cfg.jobs,
        log_k=cfg.log_k,
    )
    if cfg.plan_out:
        with open(cfg.plan_out, "w") as f:
            f.write(blended.plan.to_json())
    queries = _queries(cfg, k_min, k_max)
    if queries is None:
        queries = np.unique(np.concatenate([s.points for s in blended.solutions if s is not None]))
    cs = np.atleast_1d(blended(queries))
    rows = [{"k": float(k), "c": float(c)} for k, c in zip(queries, cs)]
    return rows, f"adaptive-path: {len(blended.plan)} subintervals, {len(rows)} rows"


def _required(conv) -> Any:
    return "" if conv.required_n is None else conv.required_n


def run_convergence(cfg: RunConfig) -> Tuple[Records, str]:
    reduced = project(profile_from_spec(cfg.profile), cfg.theta)
    op = _operator(cfg)
    rows = []
    for k in cfg.k:
        sol = solve_forward(reduced, op, k)
        conv = series_convergence(chebyshev_coefficients(np.append(sol.w, 0.0)))
        sol_a, _ = solve_forward_adaptive(reduced, cfg.n_z, k, cfg.delta)
        conv_a = series_convergence(chebyshev_coefficients(np.append(sol_a.w, 0.0)))
        rows.append(
            {
                "k": k,
                "c": _real(sol.c),
                "converged": conv.converged,
                "required_n": _required(conv),
                "h_delta": h_delta(k, cfg.delta),
                "converged_adaptive": conv_a.converged,
                "required_n_adaptive": _required(conv_a),
            }
        )
    return rows, f"convergence: {len(rows)} wavenumbers at N_z={cfg.n_z}"


def run_stability(cfg: RunConfig) -> Tuple[Records, str]:
    reduced = project(profile_from_spec(cfg.profile), cfg.theta)
    if cfg.k:
        ks = np.asarray(cfg.k, dtype=float)
    else:
        k_min, k_max = _need_span(cfg)
        ks = np.geomspace(k_min, k_max, cfg.query or 20)
    report = stability_sweep(reduced, _operator(cfg), ks)
    rows = [
        {
            "k": float(report.k[i]),
            "eta_L": float(report.eta_L[i]),
            "eta_Q": float(report.eta_Q[i]),
            "kappa_L": float(report.kappa_L[i]),
            "kappa_Q": float(report.kappa_Q[i]),
        }
        for i in range(report.k.size)
    ]
    agg = report.aggregate()
    return rows, (
        f"stability: median eta_L={agg['median_eta_L']:.3e}, median eta_Q={agg['median_eta_Q']:.3e}, "
        f"max kappa_L={agg['kappa_L']:.3e}, max kappa_Q={agg['kappa_Q']:.3e}"
    )


def run_bench(cfg: RunConfig) -> Tuple[Records, str]:
    rows = benchmark(
        profile_from_spec(cfg.profile),
        methods=cfg.methods,
        n_q_list=cfg.n_q,
        targets=cfg.targets,
        reps=cfg.reps,
        k_range=(cfg.k_min, cfg.k_max),
        seed=cfg.rng_seed,
        depth=cfg.depth,
        theta=cfg.theta,
        grid=(cfg.angles, cfg.radii),
        jobs=cfg.jobs,
        progress=log.getLogger().isEnabledFor(log.INFO),
    )
    summary = "bench: " + ", ".join(
        f"{method} break-even at {t:g}: {n:.1f}"
        for method in PATH_METHODS
        if method in cfg.methods
        for t, n in break_even(rows, method).items()
    )
    return [r.to_dict() for r in rows], summary


def run_flow_field(cfg: RunConfig) -> Tuple[Records, str]:
    if len(cfg.k) != 1:
        raise InvalidArgumentError("flow-field takes exactly one wavenumber")
    k = cfg.k[0]
    profile2d = profile_from_spec(cfg.profile)
    op = _operator(cfg)
    sol = solve_forward(project(profile2d, cfg.theta), op, k)
    flow = reconstruct_flow(profile2d, (k * math.cos(cfg.theta), k * math.sin(cfg.theta)), sol, op)
    rows = []
    for i, z in enumerate(flow.z):
        row = {"z": float(z)}
        for name in ("u", "v", "w", "p"):
            value = complex(getattr(flow, name)[i])
            row[f"{name}_re"] = value.real
            row[f"{name}_im"] = value.imag
        rows.append(row)
    return rows, f"flow-field: k={k}, theta={cfg.theta}, c={_real(sol.c)}"


HANDLERS: Dict[str, Callable[[RunConfig], Tuple[Records, str]]] = {
    "solve-forward": run_solve_forward,
    "solve-backward": run_solve_backward,
    "path": run_path,
    "path-angular": run_path_angular,
    "grid-build": run_grid_build,
    "grid-query": run_grid_query,
    "adaptive-path": run_adaptive_path,
    "convergence": run_convergence,
    "stability": run_stability,
    "bench": run_bench,
    "flow-field": run_flow_field,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = log.WARNING if not args.verbose else (log.INFO if args.verbose == 1 else log.DEBUG)
    log.basicConfig(format="%(levelname)s: %(message)s", level=level)
    if args.verbose:
        print(f"{PRODUCT_NAME} (v{__version__}) - dispersion relations".center(100), file=sys.stderr)
        print(f"Running {args.command} with args: {args}.", file=sys.stderr)

    try:
        cfg = config_from_args(args)
        records, summary = HANDLERS[cfg.command](cfg)
        columns = CSV_COLUMNS if cfg.command == "bench" else None
        write_results(cfg.output, records, cfg.format, columns=columns)
        print(summary, file=sys.stderr)
        return EXIT_OK
    except USAGE_ERRORS as e:
        parser.print_usage(sys.stderr)
        print(json.dumps(e.payload()), file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        log.error(f"{args.command} failed: {e}")
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return EXIT_USAGE
    except DispersionError as e:
        log.error(f"{args.command} failed: {e}")
        print(json.dumps(e.payload()), file=sys.stderr)
        return EXIT_NUMERICAL


def dispersion_cli():
    sys.exit(run())


if __name__ == "__main__":
    dispersion_cli()

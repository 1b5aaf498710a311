"""Command-line front end.

Every command reads one JSON input file, writes deterministic artifacts
(results JSON plus plot-ready CSV curves) into an output directory, and
exits 0 on success, 2 on validation/input failure, 3 on solver failure.
All error paths print a machine-readable {"error": ..., "detail": ...}
object to stderr.  The SLGAP_THREADS environment variable caps BLAS
worker parallelism; it is applied before numpy is imported.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys


def _apply_thread_cap() -> None:
    cap = os.environ.get("SLGAP_THREADS")
    if cap:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS",
        ):
            os.environ.setdefault(var, cap)


_apply_thread_cap()

import numpy as np  # noqa: E402

from .coefficients import (  # noqa: E402
    Interval,
    PiecewiseFn,
    single_barrier_violations,
    single_well_violations,
)
from .crossing import CrossingError, find_crossings  # noqa: E402
from .liouville import (  # noqa: E402
    convexity_report,
    lavine_bound,
    liouville_potential,
)
from .optimizer import (  # noqa: E402
    SearchSpace,
    corroborate_monotone_pwc,
    minimize_step_family,
)
from .solver import (  # noqa: E402
    DEFAULT_MESH_N,
    Mesh,
    Problem,
    SolverError,
    solve,
)
from .step_spectrum import (  # noqa: E402
    StepProblem,
    secular_residual,
    step_spectrum_full,
)

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

COMMANDS = (
    "solve",
    "analyze",
    "secular",
    "optimize",
    "liouville",
    "bounds",
    "validate",
)


class InputError(ValueError):
    """Malformed or infeasible input (exit status 2)."""


def _fail(kind: str, detail: str, status: int) -> int:
    json.dump({"error": kind, "detail": detail}, sys.stderr)
    sys.stderr.write("\n")
    return status


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(data, dict):
        raise InputError("top-level JSON value must be an object")
    return data


def _problem_from_json(data: dict) -> Problem:
    for key in ("interval", "V", "w"):
        if key not in data:
            raise InputError(f"missing required field {key!r}")
    try:
        iv = Interval(*map(float, data["interval"]))
        coeffs = {}
        for key in ("V", "w", "V0"):
            if data.get(key) is None:
                continue
            spec = data[key]
            if isinstance(spec, (int, float)):
                coeffs[key] = PiecewiseFn.constant(float(spec), iv)
            else:
                coeffs[key] = PiecewiseFn.from_dict(spec)
        return Problem(iv, coeffs["V"], coeffs["w"], coeffs.get("V0"))
    except InputError:
        raise
    except (TypeError, ValueError, KeyError, SolverError) as exc:
        raise InputError(f"invalid problem description: {exc}")


def _step_problem_from_json(data: dict) -> StepProblem:
    for key in ("interval", "x_minus", "Vmax", "xhat_minus", "N_big", "w_low"):
        if key not in data:
            raise InputError(f"missing required field {key!r}")
    try:
        return StepProblem(
            Interval(*map(float, data["interval"])),
            float(data["x_minus"]),
            float(data["Vmax"]),
            float(data["xhat_minus"]),
            float(data["N_big"]),
            float(data["w_low"]),
            bool(data.get("reflected", False)),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid step problem: {exc}")


def _search_space_from_json(data: dict) -> SearchSpace:
    for key in ("interval", "M", "N_less", "N_big"):
        if key not in data:
            raise InputError(f"missing required field {key!r}")
    try:
        return SearchSpace.from_dict(data)
    except (TypeError, ValueError, KeyError) as exc:
        raise InputError(f"invalid search space: {exc}")


def _write_json(out_dir: str, name: str, payload: dict) -> None:
    with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_curve(path: str, header: list[str], columns: list) -> None:
    """RFC-4180 CSV with a header row; columns must be equal length."""
    columns = [np.asarray(c) for c in columns]
    if len({c.size for c in columns}) > 1:
        raise ValueError("curve columns must have equal length")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _eigenfunction_csv(out_dir: str, res) -> None:
    x = res.mesh.full_nodes
    u1 = np.concatenate([[0.0], res.vectors[:, 0], [0.0]])
    u2 = np.concatenate([[0.0], res.vectors[:, 1], [0.0]])
    emit_curve(os.path.join(out_dir, "eigenfunctions.csv"), ["x", "u1", "u2"], [x, u1, u2])


# -- commands ---------------------------------------------------------------


def _cmd_solve(args) -> int:
    problem = _problem_from_json(_load_json(args.input))
    res = solve(problem, Mesh(problem.interval, args.mesh_n), k=max(args.k, 2))
    _write_json(
        args.out,
        "results.json",
        {
            "lambda": [float(v) for v in res.lambdas[: args.k]],
            "gap": float(res.lambdas[1] - res.lambdas[0]),
            "mesh_n": args.mesh_n,
        },
    )
    _eigenfunction_csv(args.out, res)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    problem = _problem_from_json(_load_json(args.input))
    mesh = Mesh(problem.interval, args.mesh_n)
    res = solve(problem, mesh, k=2)
    from .solver import spectral_pair

    pair = spectral_pair(problem, mesh)
    try:
        crossings = find_crossings(pair).to_dict()
    except CrossingError as exc:
        crossings = {"error": str(exc)}
    _write_json(
        args.out,
        "analysis.json",
        {
            "lambda1": pair.lambda1,
            "lambda2": pair.lambda2,
            "gap": pair.gap,
            "crossings": crossings,
            "mesh_n": args.mesh_n,
        },
    )
    _eigenfunction_csv(args.out, res)
    return EXIT_OK


def _cmd_secular(args) -> int:
    sp = _step_problem_from_json(_load_json(args.input))
    roots = step_spectrum_full(sp, k=args.k, mesh_n=args.mesh_n)
    th = sp.threshold
    lam_lo = max(th * (1 + 1e-9), 1e-6) if th > 0 else 1e-6
    lam_hi = float(roots[-1]) * 1.15 + 1.0
    lam_hi = max(lam_hi, lam_lo * 1.5)
    lam = np.linspace(lam_lo, lam_hi, 2001)
    F = np.array([secular_residual(sp, v) for v in lam])
    _write_json(
        args.out,
        "results.json",
        {
            "roots": [float(v) for v in roots],
            "gap": float(roots[1] - roots[0]) if roots.size >= 2 else None,
            "threshold": th,
            "mesh_n": args.mesh_n,
        },
    )
    emit_curve(os.path.join(args.out, "secular.csv"), ["lambda", "F"], [lam, F])
    return EXIT_OK


def _cmd_optimize(args) -> int:
    space = _search_space_from_json(_load_json(args.input))
    if space.family == "monotone_pwc":
        opt = corroborate_monotone_pwc(space)
    else:
        opt = minimize_step_family(space)
    _write_json(args.out, "optimum.json", opt.to_dict())
    trace = np.asarray(opt.trace, dtype=float).reshape(-1, 2)
    emit_curve(
        os.path.join(args.out, "trace.csv"),
        ["iter", "gamma"],
        [trace[:, 0].astype(int), trace[:, 1]],
    )
    return EXIT_OK


def _bounds_payload(problem: Problem, mesh_n: int) -> tuple[dict, "LiouvilleDataType"]:
    data = liouville_potential(problem)
    report = convexity_report(data)
    from .solver import gap as solver_gap

    g = solver_gap(problem, Mesh(problem.interval, mesh_n))
    payload = {
        "L": data.L,
        "bound": lavine_bound(problem),
        "convex": bool(report["convex"]),
        "min_d2psi": report["min_d2psi"],
        "gap": g,
    }
    return payload, data


def _cmd_liouville(args) -> int:
    problem = _problem_from_json(_load_json(args.input))
    payload, data = _bounds_payload(problem, args.mesh_n)
    _write_json(args.out, "bounds.json", payload)
    emit_curve(
        os.path.join(args.out, "liouville.csv"),
        ["xi", "psi", "dpsi", "d2psi"],
        [data.xi, data.psi, data.dpsi, data.d2psi],
    )
    return EXIT_OK


def _cmd_bounds(args) -> int:
    problem = _problem_from_json(_load_json(args.input))
    payload, _ = _bounds_payload(problem, args.mesh_n)
    _write_json(args.out, "bounds.json", payload)
    return EXIT_OK


def _cmd_validate(args) -> int:
    data = _load_json(args.input)
    problem = _problem_from_json(data)
    spec = data.get("classes", {})
    violations = []
    if "M" in spec:
        try:
            violations += single_well_violations(
                problem.V,
                float(spec.get("V_transition", 0.5 * (problem.interval.a + problem.interval.b))),
                float(spec["M"]),
            )
        except ValueError as exc:
            raise InputError(f"invalid single-well constraint: {exc}")
    if "N_big" in spec:
        try:
            violations += single_barrier_violations(
                problem.w,
                float(spec.get("w_transition", 0.5 * (problem.interval.a + problem.interval.b))),
                float(spec.get("N_less", spec["N_big"])),
                float(spec["N_big"]),
            )
        except ValueError as exc:
            raise InputError(f"invalid single-barrier constraint: {exc}")
    payload = {
        "valid": not violations,
        "violations": [{"x": v.x, "message": v.message} for v in violations],
    }
    _write_json(args.out, "validation.json", payload)
    if violations:
        raise InputError(
            f"{len(violations)} class constraint violation(s); see validation.json"
        )
    return EXIT_OK


_HANDLERS = {
    "solve": _cmd_solve,
    "analyze": _cmd_analyze,
    "secular": _cmd_secular,
    "optimize": _cmd_optimize,
    "liouville": _cmd_liouville,
    "bounds": _cmd_bounds,
    "validate": _cmd_validate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slgap",
        description="Spectral gap of Dirichlet Sturm-Liouville problems: "
        "solve, analyze crossings, step-family secular roots, gap "
        "minimization, and Liouville-transform bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="input JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--mesh-n", dest="mesh_n", type=int, default=DEFAULT_MESH_N)
        p.add_argument("--k", type=int, default=2, help="number of eigenvalues")
        p.add_argument(
            "--seed",
            type=int,
            default=0,
            help="recorded for reproducibility; all searches are deterministic",
        )
    return parser


def run(args: argparse.Namespace) -> int:
    """Dispatch a parsed command; returns the process exit status."""
    if args.mesh_n < 64:
        return _fail("invalid-config", "--mesh-n must be at least 64", EXIT_INVALID)
    if args.k < 1 or args.k > 10:
        return _fail("invalid-config", "--k must be between 1 and 10", EXIT_INVALID)
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        return _fail("output-dir", str(exc), EXIT_INVALID)
    try:
        return _HANDLERS[args.command](args)
    except InputError as exc:
        return _fail("invalid-input", str(exc), EXIT_INVALID)
    except (SolverError, CrossingError) as exc:
        return _fail("solver-failure", str(exc), EXIT_SOLVER)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return _fail("solver-failure", str(exc), EXIT_SOLVER)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())

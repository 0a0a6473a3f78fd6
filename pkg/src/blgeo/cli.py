"""``blgeo`` command line.

Exit codes: 0 success, 1 bad input, 2 infeasibility witnessed, 3 not
converged (or methods disagree), 4 diverged, 5 operator-scaling instance
too large.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import opscale, solvers, verify
from .datum import Verdict, datum_from_json, feasibility_screen, validate_datum
from .errors import (
    BLGeoError,
    DimensionCapExceeded,
    Diverged,
    NotConverged,
    RankDeficient,
    ScalingViolation,
    SingularOperator,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_NOT_CONVERGED = 3
EXIT_DIVERGED = 4
EXIT_DIM_CAP = 5


class InputError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    datum_path: str = None
    overrides: dict = field(default_factory=dict)
    output_path: str = None
    seed: int = 0


def dumps(obj):
    """Deterministic single-line JSON; floats carry 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        if not any(ch in text for ch in ".en"):
            text += ".0"
        return text
    return json.dumps(str(obj))


def _load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None


def _load_datum(path):
    try:
        return datum_from_json(_load_json(path))
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _parse_x0(value):
    if value is None:
        return None
    obj = _load_json(value) if os.path.exists(value) else None
    if obj is None:
        try:
            obj = json.loads(value)
        except json.JSONDecodeError as exc:
            raise InputError(f"--x0: not a file and not inline JSON ({exc.msg})") from None
    return np.asarray(obj, dtype=float)


def _emit(manifest, payload):
    text = dumps(payload) + "\n"
    sys.stdout.write(text)
    if manifest.output_path:
        with open(manifest.output_path, "w") as fh:
            fh.write(text)


def _solver_config(manifest, default_tol=None):
    kw = {"seed": manifest.seed}
    tol = manifest.overrides.get("tol", default_tol)
    if tol is not None:
        kw["tol"] = tol
    if manifest.overrides.get("max_iter") is not None:
        kw["max_iter"] = manifest.overrides["max_iter"]
    return solvers.SolverConfig(**kw)


def run_validate(manifest):
    d = _load_datum(manifest.datum_path)
    report = feasibility_screen(
        d,
        random_subspaces=manifest.overrides.get("random_subspaces", 8),
        seed=manifest.seed,
    )
    _emit(manifest, report.to_json())
    if report.verdict is Verdict.CONSISTENT_WITH_FEASIBLE:
        return EXIT_OK
    if report.verdict is Verdict.RANK_DEFICIENT:
        return EXIT_INPUT
    return EXIT_INFEASIBLE


def _solve_one(d, method, manifest, x0=None):
    """Run one method; returns ``(payload, exit_code)``."""
    try:
        if method == "capacity":
            k = opscale.build_scaling_operator(d, opscale.dim_cap_from_env())
            cfg = _solver_config(manifest, opscale.DEFAULT_CAPACITY_TOL)
            r = opscale.capacity(k, cfg)
            payload = r.to_json()
            payload.update(method="capacity", log_bl=opscale.log_bl_from_capacity(r))
        else:
            fn = {
                "fixed-point": solvers.solve_fixed_point,
                "geodesic": solvers.solve_geodesic_ascent,
            }[method]
            payload = fn(d, _solver_config(manifest), x0=x0).to_json()
        payload["status"] = "converged"
        return payload, EXIT_OK
    except DimensionCapExceeded as exc:
        return {"method": method, "status": "dimension_cap", "error": str(exc)}, EXIT_DIM_CAP
    except SingularOperator as exc:
        # no finite constant: the scaling instance has a common kernel
        return {"method": method, "status": "singular_operator", "error": str(exc)}, EXIT_DIVERGED
    except Diverged as exc:
        payload = exc.result.to_json() if exc.result is not None else {"method": method}
        payload.update(status="diverged", error=str(exc), evidence=exc.evidence)
        return payload, EXIT_DIVERGED
    except NotConverged as exc:
        payload = exc.result.to_json() if exc.result is not None else {"method": method}
        payload.update(method=method, status="not_converged", error=str(exc))
        return payload, EXIT_NOT_CONVERGED


def _validated(manifest):
    d = _load_datum(manifest.datum_path)
    try:
        return validate_datum(d)
    except (RankDeficient, ScalingViolation, ValueError) as exc:
        raise InputError(f"{manifest.datum_path}: {exc}") from None


def run_solve(manifest):
    d = _validated(manifest)
    method = manifest.overrides.get("method", "fixed-point")
    x0 = _parse_x0(manifest.overrides.get("x0"))
    payload, code = _solve_one(d, method, manifest, x0)
    _emit(manifest, payload)
    return code


METHODS = ("fixed-point", "geodesic", "capacity")


def run_compare(manifest):
    d = _validated(manifest)
    agree_tol = manifest.overrides.get("agree_tol", 1e-4)
    cells = {}
    for method in METHODS:
        payload, code = _solve_one(d, method, manifest)
        cells[method] = {
            "status": payload["status"],
            "log_bl": payload.get("log_bl") if code == EXIT_OK else None,
            "residual": payload.get("residual", payload.get("ds_residual")),
            "iterations": payload.get("iterations"),
            "error": payload.get("error"),
        }
    ok = [m for m in METHODS if cells[m]["status"] == "converged"]
    gaps = {}
    for i, a in enumerate(ok):
        for b in ok[i + 1:]:
            gaps[f"{a}/{b}"] = abs(cells[a]["log_bl"] - cells[b]["log_bl"])
    agree = len(ok) == len(METHODS) and all(g <= agree_tol for g in gaps.values())
    _emit(manifest, {"methods": cells, "gaps": gaps, "agree_tol": agree_tol, "agree": agree})
    return EXIT_OK if agree else EXIT_NOT_CONVERGED


def run_properties(manifest):
    d = _validated(manifest) if manifest.datum_path else None
    try:
        reports = verify.run_suite(
            d,
            samples=manifest.overrides.get("samples", 1000),
            seed=manifest.seed,
            profile=manifest.overrides.get("profile", "default"),
            workers=manifest.overrides.get("workers", 1),
            dim_cap=opscale.dim_cap_from_env(),
        )
    except DimensionCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIM_CAP
    _emit(manifest, [r.to_json() for r in reports])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NOT_CONVERGED


def run_reduce(manifest):
    d = _validated(manifest)
    try:
        k = opscale.build_scaling_operator(d, opscale.dim_cap_from_env())
    except DimensionCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIM_CAP
    _emit(manifest, k.to_json())
    return EXIT_OK


COMMANDS = {
    "validate": run_validate,
    "solve": run_solve,
    "compare": run_compare,
    "properties": run_properties,
    "reduce": run_reduce,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", help="also write the JSON result to this path")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int)

    parser = argparse.ArgumentParser(
        prog="blgeo", description="Brascamp-Lieb constants by geodesically convex optimization."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="validate and screen a datum")
    p.add_argument("datum")
    p.add_argument("--random-subspaces", type=int, default=8)

    p = sub.add_parser("solve", parents=[common], help="compute log BL with one method")
    p.add_argument("datum")
    p.add_argument("--method", choices=METHODS, default="fixed-point")
    p.add_argument("--x0", help="initial X as a JSON file or inline JSON matrix")

    p = sub.add_parser("compare", parents=[common], help="run all methods and compare")
    p.add_argument("datum")
    p.add_argument("--agree-tol", type=float, default=1e-4)

    p = sub.add_parser("properties", parents=[common], help="run the property suite")
    p.add_argument("datum", nargs="?")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--profile", choices=sorted(verify.PROFILES), default="default")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("reduce", parents=[common], help="dump the operator-scaling instance")
    p.add_argument("datum")
    return parser


def manifest_from_args(args):
    skip = {"command", "datum", "output", "seed"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    return RunManifest(
        command=args.command,
        datum_path=args.datum,
        overrides=overrides,
        output_path=args.output,
        seed=args.seed,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    manifest = manifest_from_args(args)
    try:
        return COMMANDS[manifest.command](manifest)
    except (InputError, BLGeoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry():
    sys.exit(main())

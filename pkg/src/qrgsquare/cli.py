"""Command-line front end: ``qrgsquare {check,solve,scan,integrate}``.

Exit codes: 0 success, 1 invariant failure, 2 bad input (schema, signature,
grid), 3 non-symmetric metric, 4 solver failure, 5 quadrature failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import jsonschema
import numpy as np

from . import integral, scans
from .geometry import (
    DegenerateMetric,
    Metric,
    connection_reality,
    is_qlc,
    make_metric,
    qlc_residuals,
)
from .model import (
    EUCLIDEAN,
    MINKOWSKI,
    AdmissibilityError,
    ModelParams,
    SignatureError,
    _check_signature,
    eh_action,
    params_from_metric,
    qlc_family,
    sigma_spectrum,
    sigma_spectrum_expected,
    spectra_match,
)
from .scalars import EXACT, FLOAT, RESIDUAL_TOL, make_phase
from .solver import NonSymmetricMetric, SolverFailure, qlc_solve

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT, EXIT_NONSYMMETRIC, EXIT_SOLVER, EXIT_CONVERGENCE = range(6)

_NONZERO = {"type": "number", "not": {"const": 0}}
_SITE_LIST = {"type": "array", "items": _NONZERO, "minItems": 4, "maxItems": 4}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["group", "metric"],
    "additionalProperties": False,
    "properties": {
        "group": {"const": "Z2xZ2"},
        "metric": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["a00", "a01", "b00", "b10"],
                    "additionalProperties": False,
                    "properties": {k: _NONZERO for k in ("a00", "a01", "b00", "b10")},
                },
                {
                    # site lists in order 00, 01, 10, 11; may be non-symmetric
                    "type": "object",
                    "required": ["a", "b"],
                    "additionalProperties": False,
                    "properties": {"a": _SITE_LIST, "b": _SITE_LIST},
                },
            ]
        },
        "q": {
            "type": "object",
            "required": ["theta"],
            "additionalProperties": False,
            "properties": {"theta": {"type": "number"}},
        },
        "signature": {"enum": [EUCLIDEAN, MINKOWSKI]},
    },
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _path(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def load_model(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise CliError(EXIT_INPUT, f"cannot read model file: {err}") from err
    except json.JSONDecodeError as err:
        raise CliError(EXIT_INPUT, f"model file is not JSON: {err}") from err
    validator = jsonschema.Draft202012Validator(MODEL_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        # oneOf failures report at "metric"; the nested cause names the field
        err = errors[0]
        if err.context:
            err = max(err.context, key=lambda e: len(e.absolute_path))
        raise CliError(EXIT_INPUT, f"schema error at {_path(err)}: {err.message}")
    return data


def _scalar(value, exact: bool):
    # JSON floats go through their decimal text so 0.1 stays 1/10 when exact
    return Fraction(repr(value)) if exact and isinstance(value, float) else value


def model_metric(data: dict, exact: bool) -> Metric:
    regime = EXACT if exact else FLOAT
    m = data["metric"]
    if "a" in m:
        a, b = m["a"], m["b"]
    else:
        a = [m["a00"], m["a01"], m["a00"], m["a01"]]
        b = [m["b00"], m["b00"], m["b10"], m["b10"]]
    try:
        return make_metric([_scalar(v, exact) for v in a], [_scalar(v, exact) for v in b], regime)
    except DegenerateMetric as err:
        raise CliError(EXIT_INPUT, f"schema error at metric: {err}") from err


def model_params(data: dict, exact: bool) -> ModelParams:
    metric = model_metric(data, exact)
    if not metric.symmetric:
        raise CliError(EXIT_NONSYMMETRIC,
                       "the QLC family and solver cover only the symmetric case, where the "
                       "metric weight of an edge does not depend on the arrow direction "
                       "(d^1 a = d^2 b = 0)")
    theta = data.get("q", {}).get("theta", 0.0)
    phase = make_phase(theta, EXACT if exact else FLOAT)
    if exact and not phase.exact:
        raise CliError(EXIT_INPUT, "schema error at q.theta: the exact regime needs q = +1 or -1 "
                                   "(theta a multiple of pi)")
    p = params_from_metric(metric, phase)
    try:
        _check_signature(p, data.get("signature", EUCLIDEAN))
    except SignatureError as err:
        raise CliError(EXIT_INPUT, f"schema error at signature: {err}") from err
    return p


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num(x):
    """JSON form of a residual or scalar: exact values as strings."""
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


# -- subcommands ---------------------------------------------------------------

def cmd_check(args) -> int:
    data = load_model(args.model)
    p = model_params(data, args.exact)
    g = p.metric()
    conn = qlc_family(p)
    tol = args.tol if args.tol is not None else RESIDUAL_TOL
    checks = {
        "metric_central": g.is_central(),
        "metric_quantum_symmetric": g.is_quantum_symmetric(),
        "metric_real": g.is_real(),
        "family_is_qlc": is_qlc(conn, g, tol),
        "connection_real": connection_reality(conn, None if args.exact else tol),
    }
    expected = sigma_spectrum_expected(p)
    spectra = sigma_spectrum(p)
    checks["sigma_spectrum"] = all(spectra_match(s, e, 1e-9) for s, e in zip(spectra, expected))
    report = {
        "regime": "exact" if args.exact else "float",
        "signature": data.get("signature", EUCLIDEAN),
        "checks": checks,
        "residuals": qlc_residuals(conn, g),
        "sigma_spectrum": {site: [[complex(v).real, complex(v).imag] for v in s]
                           for site, s in zip(("00", "01", "10", "11"), spectra)},
        "action": _num(eh_action(p)),
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK if all(checks.values()) else EXIT_INVARIANT


def cmd_solve(args) -> int:
    data = load_model(args.model)
    if args.exact:
        return _solve_exact(data, args)
    metric = model_metric(data, False)
    tol = args.tol if args.tol is not None else RESIDUAL_TOL
    try:
        report = qlc_solve(metric, seeds=args.seeds, tol=tol, rng=args.seed)
    except NonSymmetricMetric as err:
        raise CliError(EXIT_NONSYMMETRIC, str(err)) from err
    except SolverFailure as err:
        sys.stdout.write(json.dumps({"error": "solver failure", "message": str(err),
                                     "best_residual": err.best_residual}) + "\n")
        return EXIT_SOLVER
    out = {
        "seeds": report.seeds,
        "converged": report.converged,
        "best_residual": report.best_residual,
        "solutions": [s.to_dict() for s in report.solutions],
        "findings": report.findings,
    }
    _emit(json.dumps(out, indent=1) + "\n", args.out)
    for line in report.findings:
        print(f"FINDING: {line}", file=sys.stderr)
    return EXIT_OK


def _solve_exact(data: dict, args) -> int:
    """Exact arithmetic cannot run Newton; verify the family members at q = +-1."""
    metric = model_metric(data, True)
    if not metric.symmetric:
        raise CliError(EXIT_NONSYMMETRIC, "the QLC family covers only the symmetric case "
                                          "(d^1 a = d^2 b = 0)")
    solutions = []
    for q in (1, -1):
        conn = qlc_family(params_from_metric(metric, q))
        if not is_qlc(conn, metric):
            return EXIT_INVARIANT
        entry = conn.to_dict()
        entry["residuals"] = {"torsion": "0", "nabla_g": "0", "sigma": "0"}
        solutions.append(entry)
    _emit(json.dumps({"regime": "exact", "solutions": solutions}, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    try:
        values = scans.Grid.parse(args.grid).values()
        if args.quantity == "action":
            other = scans.Grid.parse(args.grid2).values() if args.grid2 else values
            rows = scans.action_scan(values, other, args.k0, args.l0, args.signature)
            columns = scans.ACTION_COLUMNS
            meta = {"quantity": "action", "k0": args.k0, "l0": args.l0,
                    "signature": args.signature}
        else:
            q = make_phase(args.theta).value
            rows = scans.spectrum_scan(values, args.k0, args.l0, q, args.fixed,
                                       args.axis, args.signature)
            columns = scans.spectrum_columns(args.axis)
            other_axis = "k" if args.axis == "l" else "l"
            meta = {"quantity": "spectrum", "k0": args.k0, "l0": args.l0,
                    "theta": args.theta, other_axis: args.fixed, "signature": args.signature}
    except (AdmissibilityError, ValueError) as err:
        raise CliError(EXIT_INPUT, f"admissibility error: {err}") from err
    _emit(scans.to_csv(columns, rows, meta), args.out)
    return EXIT_OK


def cmd_integrate(args) -> int:
    spec = integral.QuadratureSpec(rule=args.rule, points=args.points,
                                   max_refinements=args.refinements,
                                   target_rel_error=args.target,
                                   deterministic=args.deterministic)
    try:
        result = integral.partition_integral(spec, args.k0, args.l0, args.signature)
        out = {"partition": result.to_dict(), "expectations": {}}
        for name in args.observable or []:
            obs = integral.named_observable(name, args.k0, args.l0, args.signature)
            out["expectations"][name] = integral.expectation(
                obs, spec, args.k0, args.l0, args.signature).to_dict()
    except integral.ConvergenceError as err:
        sys.stdout.write(json.dumps({"error": "convergence failure", "message": str(err),
                                     "trace": err.trace}) + "\n")
        return EXIT_CONVERGENCE
    except integral.IllConditionedNormalization as err:
        sys.stdout.write(json.dumps({"error": "ill-conditioned normalization",
                                     "message": str(err)}) + "\n")
        return EXIT_CONVERGENCE
    except (SignatureError, ValueError) as err:
        raise CliError(EXIT_INPUT, str(err)) from err
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def _finite(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrgsquare",
                                     description="Quantum Riemannian geometry on the square graph.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="verify metric invariants and the QLC family")
    check.add_argument("--model", required=True)
    check.add_argument("--tol", type=float)
    check.add_argument("--exact", action="store_true")
    check.add_argument("--out")
    check.set_defaults(func=cmd_check)

    solve = sub.add_parser("solve", help="search for quantum Levi-Civita connections")
    solve.add_argument("--model", required=True)
    solve.add_argument("--seeds", type=int, default=32)
    solve.add_argument("--seed", type=int, default=0, help="random generator seed")
    solve.add_argument("--tol", type=float)
    solve.add_argument("--exact", action="store_true")
    solve.add_argument("--out")
    solve.set_defaults(func=cmd_solve)

    scan = sub.add_parser("scan", help="action or Laplacian spectrum on a grid")
    scan.add_argument("quantity", choices=["action", "spectrum"])
    scan.add_argument("--grid", required=True, help="start:stop:step, inside (-1, 1)")
    scan.add_argument("--grid2", help="second axis for action scans (default: same as --grid)")
    scan.add_argument("--axis", choices=["k", "l"], default="l")
    scan.add_argument("--fixed", type=_finite, default=0.5, help="the other amplitude")
    scan.add_argument("--theta", type=_finite, default=0.0)
    scan.add_argument("--k0", type=_finite, default=1.0)
    scan.add_argument("--l0", type=_finite, default=1.0)
    scan.add_argument("--signature", choices=[EUCLIDEAN, MINKOWSKI], default=EUCLIDEAN)
    scan.add_argument("--deterministic", action="store_true",
                      help="sequential evaluation (scans are always sequential)")
    scan.add_argument("--out")
    scan.set_defaults(func=cmd_scan)

    integ = sub.add_parser("integrate", help="functional integral over (k, l)")
    integ.add_argument("--k0", type=_finite, default=1.0)
    integ.add_argument("--l0", type=_finite, default=1.0)
    integ.add_argument("--signature", choices=[EUCLIDEAN, MINKOWSKI], default=EUCLIDEAN)
    integ.add_argument("--rule", choices=list(integral.RULES), default="contour")
    integ.add_argument("--points", type=int, default=51)
    integ.add_argument("--refinements", type=int, default=2)
    integ.add_argument("--target", type=float, default=1e-4)
    integ.add_argument("--observable", action="append",
                       choices=["1", "k", "l", "k2", "l2", "action"])
    integ.add_argument("--deterministic", action="store_true")
    integ.add_argument("--out")
    integ.set_defaults(func=cmd_integrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())

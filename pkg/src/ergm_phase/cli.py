"""Command-line front end.

Every subcommand emits a table as CSV (default) or JSON.  CSV uses a fixed
column order, floats with 17 significant digits and LF line endings; JSON
is an array of objects with the same snake_case keys.  Exit codes: 0 on
success, 1 when ``verify`` finds a failing check, 2 for bad arguments, 3
for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

from . import checks
from .asymptotics import limiting_values
from .curve import NEAR_CRITICAL, classify_point, feasible_start, trace_curve
from .errors import DomainError, ErgmPhaseError
from .exact import psi_n
from .model import DEFAULT_CURVE_TOL, DEFAULT_TOL, ModelParams, Regime, critical_point
from .sampler import DEFAULT_N_GRID, DEFAULT_SEED, loglog_slope, scaling_study

log = logging.getLogger("ergm_phase")

SEED_ENV = "ERGM_PHASE_SEED"
BOUND_CONST = 5.0

EXIT_OK, EXIT_VERIFY, EXIT_ARGS, EXIT_NUMERIC = 0, 1, 2, 3

FREE_ENERGY_COLUMNS = ["n", "psi_n", "psi_limit", "gap", "bound"]
CLASSIFY_COLUMNS = ["beta1", "beta2", "p", "regime", "x_star", "x1_star", "x2_star", "ell_value",
                    "psi_limit", "var_edge_limit", "var_star_limit", "cov_limit",
                    "scale_exponent", "edge_prob_limit", "alpha_mix"]
CURVE_COLUMNS = ["beta1", "beta2", "x1_star", "x2_star", "q_prime", "residual"]
SCALING_COLUMNS = ["n", "exact", "mc", "mc_se", "predicted"]
VERIFY_COLUMNS = ["check", "passed", "detail"]

_NUM = {"type": "number"}
_OPT_NUM = {"type": ["number", "null"]}
_INT = {"type": "integer"}
_FIELD_TYPES = {
    "n": _INT, "p": _INT, "regime": {"enum": ["off-curve", "on-curve", "critical"]},
    "x_star": _OPT_NUM, "x1_star": _OPT_NUM, "x2_star": _OPT_NUM, "alpha_mix": _OPT_NUM,
    "mc": _OPT_NUM, "mc_se": _OPT_NUM,
    "check": {"type": "string"}, "passed": {"type": "boolean"}, "detail": {"type": "string"},
}


def json_schema(columns: list[str]) -> dict:
    """JSON Schema for the array of records emitted with ``--format json``."""
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "array",
        "items": {
            "type": "object",
            "properties": {c: _FIELD_TYPES.get(c, _NUM) for c in columns},
            "required": list(columns),
            "additionalProperties": False,
        },
    }


class UsageError(Exception):
    pass


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def render(records: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        for rec in records:
            for k, v in rec.items():
                if isinstance(v, float) and not math.isfinite(v):
                    raise ErgmPhaseError(f"non-finite value in field {k}")
        return json.dumps([{c: rec.get(c) for c in columns} for rec in records], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_fmt(rec.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, records, columns) -> None:
    text = render(records, columns, args.format)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def parse_int(text: str, minimum: int = 1) -> int:
    """Integer argument; scientific notation such as 1e5 is accepted."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v.is_integer() or v < minimum:
        raise argparse.ArgumentTypeError(f"expected an integer >= {minimum}, got {text!r}")
    return int(v)


def parse_replicas(text: str) -> int:
    v = parse_int(text, minimum=0)
    if v == 1:
        raise argparse.ArgumentTypeError("need 0 (skip Monte Carlo) or at least 2 replicas")
    return v


def parse_grid(text: str) -> list[int]:
    return [parse_int(t.strip()) for t in text.split(",") if t.strip()]


def resolve_seed(flag) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise UsageError(f"{SEED_ENV} is not an integer: {env!r}") from None
    return DEFAULT_SEED


def _params(args) -> ModelParams:
    if args.beta1 is None or args.beta2 is None:
        raise UsageError("--beta1 and --beta2 are required")
    return ModelParams(args.beta1, args.beta2, args.p)


def _ns(args, default=None) -> list[int]:
    if args.n is not None and args.n_grid is not None:
        raise UsageError("give either --n or --n-grid, not both")
    if args.n is not None:
        return [args.n]
    if args.n_grid is not None:
        return args.n_grid
    if default is None:
        raise UsageError("one of --n or --n-grid is required")
    return list(default)


def cmd_free_energy(args) -> int:
    prm = _params(args)
    cls = classify_point(prm, curve_tol=args.curve_tol, tol=args.tol)
    rows = []
    for n in _ns(args):
        val = psi_n(prm, n)
        rows.append({"n": n, "psi_n": val, "psi_limit": cls.ell_value,
                     "gap": abs(val - cls.ell_value), "bound": BOUND_CONST * math.log(n) / n})
    emit(args, rows, FREE_ENERGY_COLUMNS)
    return EXIT_OK


def classify_record(prm: ModelParams, curve_tol: float, tol: float) -> dict:
    cls = classify_point(prm, curve_tol=curve_tol, tol=tol)
    lim = limiting_values(prm, cls)
    on = cls.regime is Regime.ON_CURVE
    return {
        "beta1": prm.beta1, "beta2": prm.beta2, "p": prm.p, "regime": cls.regime.value,
        "x_star": None if on else cls.x_star,
        "x1_star": cls.x1_star if on else None, "x2_star": cls.x2_star if on else None,
        "ell_value": cls.ell_value, "psi_limit": lim.psi_limit,
        "var_edge_limit": lim.var_edge, "var_star_limit": lim.var_star, "cov_limit": lim.cov,
        "scale_exponent": lim.scale_exponent, "edge_prob_limit": lim.edge_prob,
        "alpha_mix": lim.alpha_mix,
    }


def cmd_classify(args) -> int:
    emit(args, [classify_record(_params(args), args.curve_tol, args.tol)], CLASSIFY_COLUMNS)
    return EXIT_OK


def cmd_curve(args) -> int:
    p = args.p
    if args.step <= 0:
        raise UsageError("--step must be positive")
    if args.beta1_to > args.beta1_from:
        raise UsageError("--to must not exceed --from (the curve is traced downward in beta1)")
    b1c, _ = critical_point(p)
    start = feasible_start(p, args.beta1_from, args.step)
    if start != args.beta1_from:
        log.warning("no transition curve above beta1 = %.6g (critical point %.6g); "
                    "rows with beta1 > %.6g omitted", b1c - NEAR_CRITICAL, b1c, start)
    rows = []
    if start < args.beta1_to:
        log.warning("requested beta1 range lies entirely above the critical point")
    else:
        pts = trace_curve(p, start, args.beta1_to, args.step, tol=args.tol_q, x_tol=args.tol)
        rows = [{"beta1": pt.beta1, "beta2": pt.beta2, "x1_star": pt.x1_star,
                 "x2_star": pt.x2_star, "q_prime": pt.q_prime, "residual": pt.residual}
                for pt in pts]
    emit(args, rows, CURVE_COLUMNS)
    return EXIT_OK


def cmd_scaling(args) -> int:
    prm = _params(args)
    grid = _ns(args, DEFAULT_N_GRID)
    recs = scaling_study(prm, grid, args.replicas, resolve_seed(args.seed), args.workers)
    rows = []
    for r in recs:
        mc, se = r.mc_value(args.quantity) if r.mc is not None else (None, None)
        rows.append({"n": r.n, "exact": r.exact_value(args.quantity), "mc": mc, "mc_se": se,
                     "predicted": r.predicted(args.quantity)})
    if len(recs) > 1:
        slope = loglog_slope([r.n for r in recs], [r.exact_value(args.quantity) for r in recs])
        log.info("log-log slope of exact values: %.4f (regime exponent %.2g)",
                 slope, recs[0].scale_exponent)
    emit(args, rows, SCALING_COLUMNS)
    return EXIT_OK


def _bad_gamma(x: float) -> float:
    return math.gamma(x) * (1 + 1e-6)


def cmd_verify(args) -> int:
    gamma_fn = _bad_gamma if args.inject_fault == "gamma" else None
    results = checks.run_checks(quick=args.quick, gamma_fn=gamma_fn)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}", file=sys.stderr)
    emit(args, [{"check": r.name, "passed": r.passed, "detail": r.detail} for r in results],
         VERIFY_COLUMNS)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta1", type=float, help="edge parameter")
    common.add_argument("--beta2", type=float, help="p-star parameter")
    common.add_argument("--p", type=int, default=2, help="star order (integer >= 2, default 2)")
    common.add_argument("--n", type=parse_int, help="number of nodes")
    common.add_argument("--n-grid", type=parse_grid,
                        help="comma-separated node counts, scientific notation accepted")
    common.add_argument("--replicas", type=parse_replicas, default=10_000,
                        help="Monte Carlo replicas, 0 to skip (default 10000)")
    common.add_argument("--seed", type=lambda s: int(s, 0),
                        help=f"RNG seed; default ${SEED_ENV} or {DEFAULT_SEED:#x}")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help=f"maximizer tolerance in x (default {DEFAULT_TOL:g})")
    common.add_argument("--curve-tol", type=float, default=DEFAULT_CURVE_TOL,
                        help=f"critical/equal-height tolerance (default {DEFAULT_CURVE_TOL:g})")
    common.add_argument("--workers", type=parse_int, default=1,
                        help="threads for Monte Carlo replicas (results do not depend on it)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="ergm-phase", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("free-energy", parents=[common],
                        help="exact psi_n against its limit ell(x*)",
                        epilog="columns: " + ", ".join(FREE_ENERGY_COLUMNS)
                        + f"; bound = {BOUND_CONST:g} log(n)/n")
    sp.set_defaults(func=cmd_free_energy)

    sp = sub.add_parser("classify", parents=[common], help="regime and limiting moments",
                        epilog="columns: " + ", ".join(CLASSIFY_COLUMNS))
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("curve", parents=[common], help="trace the transition curve q(beta1)",
                        epilog="columns: " + ", ".join(CURVE_COLUMNS))
    sp.add_argument("--from", dest="beta1_from", type=float, required=True)
    sp.add_argument("--to", dest="beta1_to", type=float, required=True)
    sp.add_argument("--step", type=float, default=0.1)
    sp.add_argument("--tol-q", type=float, default=DEFAULT_CURVE_TOL,
                    help="tolerance on the height gap when solving for q")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("scaling", parents=[common],
                        help="exact, Monte Carlo and predicted n^2 Var across an n grid",
                        epilog="columns: " + ", ".join(SCALING_COLUMNS)
                        + f"; default grid {','.join(map(str, DEFAULT_N_GRID))}")
    sp.add_argument("--quantity", choices=("edge", "star", "cov"), default="edge")
    sp.set_defaults(func=cmd_scaling)

    sp = sub.add_parser("verify", parents=[common], help="run the invariant suite",
                        epilog="columns: " + ", ".join(VERIFY_COLUMNS))
    sp.add_argument("--quick", action="store_true", help="skip checks with n >= 1e5")
    sp.add_argument("--inject-fault", choices=("gamma",), help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except ErgmPhaseError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

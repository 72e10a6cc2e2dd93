"""Command-line interface.

Usage::

    oscpoly params -k 2 -a -1.25
    oscpoly approx -k 2 -a 0 -x 0.3
    oscpoly scan -k 40 -a 1.5 --grid 512 --format csv
    oscpoly zeros -k 10 -a 0
    oscpoly mass -k 10 -a 1
    oscpoly bench -k 200 -a 2 --grid 100000
    oscpoly binom

Exit codes: 0 success, 1 a checked inequality failed, 2 usage error,
3 domain error (including odd k for the approximation), 4 numerical
failure (quadrature or Newton did not converge).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass

from . import __version__
from .errors import DomainError, InputError, OscPolyError
from .oracle import DEFAULT_DIGITS, MIN_DIGITS

__all__ = ["RunConfig", "FIELDS", "parse_args", "run", "emit", "main"]

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4  # quadrature or Newton gave up

COMMANDS = ("params", "eval", "approx", "scan", "zeros", "mass", "bench", "binom")

# documented key order of the records each command emits
FIELDS = {
    "params": ["k", "alpha", "u", "q", "one_minus_q", "parity", "case", "x_end", "turning_point", "q_branch",
               "mu_branch", "alpha_minus", "alpha_plus", "on_boundary", "mu", "q_range_ok", "normalizable"],
    "eval": ["x", "P", "P_prime", "y", "g", "P_decimal"],
    "approx": ["x", "B", "main", "r_bound", "certified", "g0", "g_exact", "violation"],
    "scan": ["x", "cos_B", "g_ratio", "r_measured", "r_bound", "violation"],
    "zeros": ["index", "seed", "zero", "newton_iters", "bracket_verified", "zero_decimal"],
    "mass": ["k", "alpha", "eta", "delta", "z", "integral", "bound1", "bound2", "pass"],
    "bench": ["k", "alpha", "n_points", "n_oracle", "approx_ns", "oracle_ns", "ratio", "backend"],
    "binom": ["x", "binom", "rhs", "w", "holds"],
}

REGIME_MAP = """\
regime map (u = (k+a)(k+a+1), q = (a^2-1)/u):
  q branch    QNeg   q < 0          (|a| < 1)
              QSmall 0 <= q < 1/2
              QLarge 1/2 <= q < 1
  mu branch   Outer  q >= 1/4       mu = 1
              Middle otherwise, |a| >= sqrt(7/6)
              Inner  |a| < sqrt(7/6)
  theorem     case I   |a| < sqrt(7/6)   x in [0, sqrt(1 - 1/u)]
              case II  otherwise        x in [0, sqrt(1 - q)]
exit codes: 0 ok, 1 inequality violated, 2 usage, 3 domain error, 4 numerical failure
environment: OSCPOLY_DIGITS sets the default precision, OSCPOLY_NUMBA=0 forces numpy
"""


@dataclass(frozen=True)
class RunConfig:
    command: str
    k: int | None = None
    alpha: float | None = None
    x: float | None = None
    grid: int = 256
    tol: float = 1e-12
    digits: int = DEFAULT_DIGITS
    format: str = "json"
    output: str | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-k", type=int, help="degree")
    common.add_argument("-a", "--alpha", type=float, help="parameter alpha")
    common.add_argument("-x", type=float, help="evaluation point")
    common.add_argument("--grid", type=int, default=256, help="grid size (scan), sample count (bench)")
    common.add_argument("--tol", type=float, default=1e-12, help="absolute tolerance (default 1e-12)")
    common.add_argument("--digits", type=int, default=DEFAULT_DIGITS,
                        help=f"oracle precision in decimal digits (default {DEFAULT_DIGITS})")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", help="output file (default stdout)")

    parser = _Parser(prog="oscpoly", description="Certified WKB evaluation of ultraspherical polynomials.",
                     epilog=REGIME_MAP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    helps = {
        "params": "derived parameters and regime",
        "eval": "exact oracle values at x",
        "approx": "certified approximation at x",
        "scan": "certification scan on a phi-uniform grid",
        "zeros": "WKB-seeded zeros refined by Newton",
        "mass": "weighted L2 mass inside [-eta, eta]",
        "bench": "approximation vs oracle timing",
        "binom": "continuous central binomial inequality",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], epilog=REGIME_MAP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def parse_args(argv) -> RunConfig:
    """Parse and validate ``argv`` (without the program name); exits with code 2 on bad usage."""
    parser = _build_parser()
    ns = parser.parse_args(list(argv))
    if ns.command is None:
        parser.error("a command is required")
    if not ns.tol > 0:
        parser.error("--tol must be positive")
    if ns.digits < MIN_DIGITS:
        parser.error(f"--digits must be >= {MIN_DIGITS}")
    if ns.command == "scan" and ns.grid < 16:
        parser.error("--grid must be >= 16 for scan")
    if ns.command == "bench" and ns.grid < 1:
        parser.error("--grid must be >= 1")
    if ns.command != "binom" and (ns.k is None or ns.alpha is None):
        parser.error(f"{ns.command} needs -k and -a")
    if ns.command in ("eval", "approx") and ns.x is None:
        parser.error(f"{ns.command} needs -x")
    return RunConfig(ns.command, ns.k, ns.alpha, ns.x, ns.grid, ns.tol, ns.digits, ns.format, ns.output)


# --------------------------------------------------------------------------
# serialization


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _json_value(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return json.dumps(v, ensure_ascii=False)
    v = float(v)
    if not math.isfinite(v):
        return json.dumps(_fmt_float(v))
    return _fmt_float(v)


def _csv_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, str)):
        return str(v)
    return _fmt_float(float(v))


def render(records: list[dict], fmt: str, fields: list[str] | None = None) -> str:
    """Text form of ``records``; ``fields`` fixes the columns (needed for an empty CSV)."""
    if fields is None:
        fields = list(records[0]) if records else []
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in records:
            w.writerow([_csv_value(r[f]) for f in fields])
        return buf.getvalue()
    if not records:
        return "[]\n"
    lines = ["{" + ", ".join(f"{json.dumps(f)}: {_json_value(r[f])}" for f in fields) + "}" for r in records]
    return "[\n  " + ",\n  ".join(lines) + "\n]\n"


def emit(records: list[dict], fmt: str = "json", output: str | None = None, fields: list[str] | None = None):
    """Write ``records`` as JSON (array of objects) or CSV (header row, LF endings)."""
    text = render(records, fmt, fields)
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(output, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# commands


def _params(cfg):
    from .params import classify_regime, derive_params, q_range_check, theorem_interval
    from .wkb import mu_bound

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = derive_params(cfg.k, cfg.alpha)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    reg = classify_regime(p)
    ti = theorem_interval(p)
    rec = {
        "k": p.k, "alpha": p.alpha, "u": p.u, "q": p.q, "one_minus_q": p.one_minus_q, "parity": p.parity,
        "case": ti.case.value, "x_end": ti.x_end, "turning_point": p.turning_point,
        "q_branch": reg.q_branch.value, "mu_branch": reg.mu_branch.value,
        "alpha_minus": reg.alpha_minus, "alpha_plus": reg.alpha_plus, "on_boundary": reg.on_boundary,
        "mu": mu_bound(p), "q_range_ok": q_range_check(p), "normalizable": p.normalizable,
    }
    return [rec], EXIT_OK


def _derive(cfg):
    from .params import derive_params

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return derive_params(cfg.k, cfg.alpha)


def _eval(cfg):
    from .oracle import build_coeffs, eval_g_exact, eval_p, eval_p_prime, eval_y

    p = _derive(cfg)
    cv = build_coeffs(p.k, p.alpha, cfg.digits)
    x = cfg.x
    if abs(x) > 1:
        raise DomainError(f"|x| must be <= 1, got {x}")
    P = eval_p(cv, x)
    y = eval_y(p, cv, x) if abs(x) < 1 else math.nan
    g = float(eval_g_exact(p, cv, x)) if x * x < p.one_minus_q else math.nan
    rec = {"x": x, "P": float(P), "P_prime": float(eval_p_prime(cv, x)), "y": float(y), "g": g,
           "P_decimal": cv.mp.nstr(P, cfg.digits)}
    return [rec], EXIT_OK


def _approx(cfg):
    from .analysis import SCAN_SLACK
    from .oracle import build_coeffs, eval_g_exact
    from .wkb import approx_g

    p = _derive(cfg)
    cv = approx_g(p, cfg.x)
    oracle = build_coeffs(p.k, p.alpha, cfg.digits)
    if cfg.x < p.turning_point:
        g = float(eval_g_exact(p, oracle, cfg.x))
        viol = abs(g / cv.g0 - math.cos(cv.B)) - cv.r_radius
    else:
        g, viol = math.nan, math.nan
    rec = {"x": cv.x, "B": cv.B, "main": cv.main, "r_bound": cv.r_radius, "certified": cv.certified,
           "g0": cv.g0, "g_exact": g, "violation": viol}
    bad = cv.certified and viol > SCAN_SLACK * (1 + cv.r_radius)
    return [rec], EXIT_VIOLATION if bad else EXIT_OK


def _scan(cfg):
    from .analysis import error_scan

    rep = error_scan(_derive(cfg), cfg.grid, cfg.digits)
    print(f"scan k={rep.params.k} alpha={rep.params.alpha}: max_violation={rep.max_violation:.3e} "
          f"at x={rep.worst_x:.17g}, certified_fraction={rep.certified_fraction}, passed={rep.passed}",
          file=sys.stderr)
    return rep.rows(), EXIT_OK if rep.passed else EXIT_VIOLATION


def _zeros(cfg):
    from .analysis import refine_zeros, wkb_zero_seeds

    p = _derive(cfg)
    zs = refine_zeros(p, wkb_zero_seeds(p), cfg.digits)
    seeds = list(zs.seeds)
    recs = []
    for i, z in enumerate(zs.refined):
        near = min(seeds, key=lambda s: abs(s - float(z)))
        recs.append({"index": i, "seed": near, "zero": float(z), "newton_iters": zs.newton_iters[i],
                     "bracket_verified": zs.bracket_verified[i], "zero_decimal": z.context.nstr(z, cfg.digits)})
    if not zs.completeness_guaranteed:
        print("note: alpha < sqrt(7/6); the zero list is not guaranteed complete", file=sys.stderr)
    ok = zs.monotone and all(zs.bracket_verified)
    return recs, EXIT_OK if ok else EXIT_VIOLATION


def _mass(cfg):
    from .analysis import mass_concentration

    m = mass_concentration(_derive(cfg), tol=max(cfg.tol, 1e-13), ctx=cfg.digits)
    rec = {"k": m.params.k, "alpha": m.params.alpha, "eta": m.eta, "delta": m.delta, "z": m.z,
           "integral": m.integral, "bound1": m.bound1, "bound2": m.bound2, "pass": m.passed}
    return [rec], EXIT_OK if m.passed else EXIT_VIOLATION


def _bench(cfg):
    from .analysis import benchmark_eval

    b = benchmark_eval(_derive(cfg), n_points=cfg.grid, ctx=cfg.digits)
    rec = {"k": b.k, "alpha": b.alpha, "n_points": b.n_points, "n_oracle": b.n_oracle, "approx_ns": b.approx_ns,
           "oracle_ns": b.oracle_ns, "ratio": b.ratio, "backend": b.backend}
    return [rec], EXIT_OK


def _binom(cfg):
    from .analysis import central_binom_check, central_binom_rows

    grid = [cfg.x] if cfg.x is not None else [0.5 * 2 ** i for i in range(12)]
    rows = central_binom_rows(grid)
    recs = [{"x": r.x, "binom": r.binom, "rhs": r.rhs, "w": r.w, "holds": r.holds} for r in rows]
    return recs, EXIT_OK if central_binom_check(grid) else EXIT_VIOLATION


_DISPATCH = {"params": _params, "eval": _eval, "approx": _approx, "scan": _scan, "zeros": _zeros,
             "mass": _mass, "bench": _bench, "binom": _binom}


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``, write its records and return the exit code."""
    try:
        records, code = _DISPATCH[cfg.command](cfg)
    except (DomainError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OscPolyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        emit(records, cfg.format, cfg.output, FIELDS[cfg.command])
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


def main(argv=None) -> int:
    cfg = parse_args(sys.argv[1:] if argv is None else argv)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

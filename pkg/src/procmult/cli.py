"""Command-line entry point.

Exit codes: 0 when every requested check passes, 1 when a mathematical
check fails, 2 for input or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    CertificateFailed,
    DimensionMismatch,
    EmptySet,
    GapExceedsTolerance,
    Infeasible,
    NondegeneracyViolated,
    ParseError,
    ProcmultError,
    RegularityViolated,
    SchemaError,
    SeparationViolated,
    UnknownCommand,
)
from .geometry import (
    SpaceSpec,
    base_from_functional,
    cone_to_spec,
    dilate_eps,
    henig_dilate,
    quasi_interior_functional,
)
from .multiplier import augmented_nd_check, certify, find_multiplier, largest_nondegenerate_delta
from .order import OrderedSample, is_nondominated, min_set
from .penalty import exact_penalty_verify, penalty_threshold_sweep
from .problemfile import parse_cone_arg, parse_problem
from .reproduce import run_example

__all__ = ["COMMANDS", "build_parser", "dispatch", "main", "render"]

COMMANDS = ("nd", "min", "dilate", "check-assumptions", "find-multiplier", "penalize",
            "sweep", "equilibrium", "example")

# errors that mean "the mathematics said no" rather than "bad input"
CHECK_FAILURES = (CertificateFailed, NondegeneracyViolated, GapExceedsTolerance,
                  SeparationViolated, RegularityViolated, Infeasible)


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def _clean(v):
    """JSON-ready copy with floats cut to 12 significant digits."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if not np.isfinite(f):
            return str(f)
        return float(f"{f:.12g}") + 0.0
    return v


def _scalar_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    if v is None:
        return "null"
    if isinstance(v, list):
        return "[" + ", ".join(_scalar_text(x) for x in v) + "]"
    return str(v)


def _flatten(v, prefix=""):
    if isinstance(v, dict):
        for k, x in v.items():
            yield from _flatten(x, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
        for i, x in enumerate(v):
            yield from _flatten(x, f"{prefix}[{i}]")
    else:
        yield prefix, v


def render(report: dict, fmt: str) -> str:
    data = _clean(report)
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        rows = data.get("rows")
        if rows and isinstance(rows, list) and isinstance(rows[0], dict):
            cols = list(rows[0].keys())
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([_scalar_text(r[c]) for c in cols])
        else:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            for k, v in _flatten(data):
                w.writerow([k, _scalar_text(v)])
        return buf.getvalue()
    return "".join(f"{k}: {_scalar_text(v)}\n" for k, v in _flatten(data))


def _write_rows_csv(path, rows, cols):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in _clean(rows):
            w.writerow([_scalar_text(r[c]) for c in cols])


def _digest(args: argparse.Namespace) -> str:
    h = hashlib.sha256()
    items = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "format", "timing")}
    h.update(json.dumps(items, sort_keys=True, default=str).encode())
    prob = getattr(args, "problem", None)
    if prob and Path(prob).exists():
        h.update(Path(prob).read_bytes())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="also write the report to this file")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--tol", type=float, default=None, help="numerical tolerance")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="include wall-clock timing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="procmult",
                                     description="Multiplier processes for set-valued programs.")
    parser.add_argument("--version", action="version", version=f"procmult {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("nd", help="is y0 nondominated by a point set?")
    _common(p)
    p.add_argument("--points", required=True, help="file with one vector per line")
    p.add_argument("--cone", required=True, help="cone spec as JSON text or a JSON file")
    p.add_argument("--y0", required=True, help="comma-separated vector")

    p = sub.add_parser("min", help="minimal elements of a point set")
    _common(p)
    p.add_argument("--points", required=True)
    p.add_argument("--cone", required=True)

    p = sub.add_parser("dilate", help="conic or Henig dilation of a cone")
    _common(p)
    p.add_argument("--cone", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--henig", action="store_true",
                   help="Henig dilation of the base f(x)=1 with f the default functional")

    for name in ("check-assumptions", "find-multiplier"):
        p = sub.add_parser(name)
        _common(p)
        p.add_argument("--problem", required=True)
        p.add_argument("--safety", type=float, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--samples", type=int, default=None, help="sphere/ray sample count")

    for name in ("penalize", "sweep"):
        p = sub.add_parser(name)
        _common(p)
        p.add_argument("--problem", required=True)
        p.add_argument("--mu", default=None, help="penalty parameter or 'auto'")
        p.add_argument("--safety", type=float, default=None)
        p.add_argument("--sweep", default=None, help="start:stop:step")
        p.add_argument("--csv", default=None, help="write the sweep table here")

    p = sub.add_parser("equilibrium", help="discretised slanted-cone equilibrium example")
    _common(p)
    p.add_argument("--example", default="5.4", choices=("5.4",))
    p.add_argument("--grid", type=int, default=11)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--csv", default=None, help="write per-sample checks here")

    p = sub.add_parser("example", help="run a bundled worked example")
    _common(p)
    p.add_argument("name", choices=("3.8", "3.9", "5.4", "parabola"))
    p.add_argument("--grid", type=float, default=None,
                   help="grid step (3.8, parabola) or grid size (5.4)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--n", type=int, default=5, help="dimension for 3.9")
    p.add_argument("--safety", type=float, default=None)
    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _read_points(path) -> np.ndarray:
    rows = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(t) for t in line.replace(",", " ").split()])
        except ValueError:
            raise ParseError(f"{path}, line {i}: not a number list") from None
    if not rows:
        raise ParseError(f"{path} holds no points")
    if len({len(r) for r in rows}) != 1:
        raise DimensionMismatch(f"{path}: points have different dimensions")
    return np.array(rows)


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError:
        raise ParseError(f"not a vector: {text!r}") from None


def _cone_for(args, dim: int | None):
    space = SpaceSpec(dim, "abs" if dim == 1 else "euclidean") if dim else None
    cone = parse_cone_arg(args.cone, space)
    if args.tol is not None:
        if args.tol < 0:
            raise ValueError("--tol must be nonnegative")
        cone.default_tol = args.tol
    return cone


def _cmd_nd(args):
    pts = _read_points(args.points)
    cone = _cone_for(args, pts.shape[1])
    y0 = _vector(args.y0)
    ok = is_nondominated(y0, OrderedSample.of(pts, cone))
    return {"nondominated": ok, "y0": y0, "points": len(pts)}, ok


def _cmd_min(args):
    pts = _read_points(args.points)
    cone = _cone_for(args, pts.shape[1])
    m = min_set(OrderedSample.of(pts, cone))
    return {"count": len(m), "rows": [{"point": list(r)} for r in m]}, True


def _cmd_dilate(args):
    cone = _cone_for(args, None)
    if args.henig:
        base = base_from_functional(cone, quasi_interior_functional(cone), 1.0)
        out = henig_dilate(base, args.eps)
        rep = {"input": cone_to_spec(cone), "eps": args.eps, "base_delta": base.delta,
               "base_sigma": base.sigma}
    else:
        out = dilate_eps(cone, args.eps)
        rep = {"input": cone_to_spec(cone), "eps": args.eps}
    spec = cone_to_spec(out)
    if spec["kind"] == "generators" and len(spec["rays"]) > 50:
        spec = {"kind": "generators", "ray_count": len(spec["rays"])}
    rep["result"] = spec
    return rep, True


def _problem(args):
    pf = parse_problem(args.problem)
    d = pf.defaults
    for key in ("tol", "safety", "seed", "delta", "rho", "mu", "sweep"):
        if hasattr(args, key) and getattr(args, key) is None and key in d:
            setattr(args, key, d[key])
    return pf


def _cmd_check(args):
    pf = _problem(args)
    if pf.process is None:
        raise ParseError("the problem file has no process to check")
    prob = pf.set_valued_problem()
    cert = certify(pf.process, pf.y_cone, prob.V, pf.y0, args.seed or 0)
    aug = augmented_nd_check(prob, pf.process, pf.y0)
    ok = cert.valid
    return {"problem": pf.name, "certificate": cert.to_dict(), "augmented": aug.to_dict()}, ok


def _cmd_find(args):
    pf = _problem(args)
    prob = pf.set_valued_problem()
    delta = args.delta
    auto = delta is None
    if auto:
        delta = largest_nondegenerate_delta(prob, pf.y0) * 0.5
        if delta <= 0:
            raise NondegeneracyViolated("no delta passes the sampled nondegeneracy check")
    proc, cert = find_multiplier(prob, pf.y0, delta, args.rho,
                                 args.safety if args.safety is not None else 1.25,
                                 args.seed or 0)
    aug = augmented_nd_check(prob, proc, pf.y0)
    rep = {"problem": pf.name, "delta": delta, "delta_chosen_by_bisection": auto,
           "certificate": cert.to_dict(), "augmented": aug.to_dict()}
    return rep, cert.valid and aug.ok


def _parse_sweep(text: str) -> list[float]:
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise ParseError(f"--sweep expects start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ParseError("--sweep needs step > 0 and stop >= start")
    n = int(round((stop - start) / step))
    return [round(start + k * step, 12) for k in range(n + 1)]


def _cmd_penalize(args):
    pf = _problem(args)
    tol = args.tol if args.tol is not None else 1e-9
    sp = pf.scalar_problem(tol)
    if args.command == "sweep" and args.sweep is None:
        raise ParseError("sweep needs --sweep start:stop:step")
    if args.sweep is not None:
        res = penalty_threshold_sweep(sp, _parse_sweep(args.sweep))
        rows = [{"mu": r.mu, "penalized_inf": r.penalized_inf, "gap": r.gap,
                 "argmin": _scalar_text(_clean(r.argmin.reshape(-1).tolist()))}
                for r in res.rows]
        if args.csv:
            _write_rows_csv(args.csv, rows, ["mu", "penalized_inf", "gap", "argmin"])
        rep = {"problem": pf.name, "r0": res.r0, "L_hat": res.L_hat,
               "threshold": res.threshold, "rows": rows}
        return rep, res.threshold is not None
    mu = args.mu
    safety = args.safety if args.safety is not None else 1.25
    if mu is None or str(mu) == "auto":
        rep = exact_penalty_verify(sp, safety)
    else:
        try:
            mu = float(mu)
        except ValueError:
            raise ParseError(f"--mu expects a number or 'auto', got {mu!r}") from None
        rep = exact_penalty_verify(sp, mu=mu)
    out = {"problem": pf.name, **rep.to_dict()}
    if args.csv:
        _write_rows_csv(args.csv, [{"mu": rep.mu, "penalized_inf": rep.penalized_inf,
                                    "gap": rep.gap,
                                    "argmin": _scalar_text(_clean(rep.argmin.reshape(-1).tolist()))}],
                        ["mu", "penalized_inf", "gap", "argmin"])
    return out, rep.exact


def _cmd_equilibrium(args):
    res = run_example("5.4", n_grid=args.grid, count=args.samples,
                      seed=7 if args.seed is None else args.seed)
    if args.csv:
        _write_rows_csv(args.csv, res["rows"], list(res["rows"][0].keys()))
    return res, res["ok"]


def _cmd_example(args):
    kw = {}
    if args.name == "3.8":
        if args.grid is not None:
            kw["step"] = args.grid
        if args.seed is not None:
            kw["seed"] = args.seed
    elif args.name == "3.9":
        kw["n"] = args.n
        if args.samples is not None:
            kw["count"] = args.samples
        if args.seed is not None:
            kw["seed"] = args.seed
    elif args.name == "5.4":
        kw["n_grid"] = int(args.grid) if args.grid is not None else 11
        kw["count"] = args.samples or 50
        kw["seed"] = 7 if args.seed is None else args.seed
    else:
        if args.grid is not None:
            kw["step"] = args.grid
        if args.safety is not None:
            kw["safety"] = args.safety
    res = run_example(args.name, **kw)
    return res, res["ok"]


HANDLERS = {
    "nd": _cmd_nd,
    "min": _cmd_min,
    "dilate": _cmd_dilate,
    "check-assumptions": _cmd_check,
    "find-multiplier": _cmd_find,
    "penalize": _cmd_penalize,
    "sweep": _cmd_penalize,
    "equilibrium": _cmd_equilibrium,
    "example": _cmd_example,
}


def dispatch(command: str, args: argparse.Namespace) -> tuple[dict, int]:
    """Run one command; returns the report and the exit code."""
    if command not in HANDLERS:
        raise UnknownCommand(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    start = time.perf_counter()
    try:
        body, ok = HANDLERS[command](args)
        code = 0 if ok else 1
    except CHECK_FAILURES as exc:
        body = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("sample", "certificate", "report"):
            val = getattr(exc, attr, None)
            if val is not None:
                body[attr] = val.to_dict() if hasattr(val, "to_dict") else val
        ok, code = False, 1
    report = {"command": command, "tool_version": __version__, "inputs_digest": _digest(args),
              "ok": bool(ok), "exit_code": code, **body}
    if getattr(args, "timing", False):
        report["timing_seconds"] = time.perf_counter() - start
    return report, code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        report, code = dispatch(args.command, args)
    except (ProcmultError, ValueError, KeyError, EmptySet, SchemaError) as exc:
        print(f"procmult: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = render(report, args.format)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

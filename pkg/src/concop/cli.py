"""Command-line front end.

Exit codes: 0 success or pass, 1 dominance failure, 2 parse error,
3 algebra error, 4 unknown scenario.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from typing import Sequence

import numpy as np

from .errors import BadParameter, ConcopError, SpecParseError, UnknownScenario
from .expression import parse_text
from .harness import SCENARIOS, run_scenario
from .monotone_graph import MonoCurve
from .transport import density, h_bound_cauchy, h_bound_subexp, quantile_transport, transport_derivative

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_ALGEBRA, EXIT_UNKNOWN = 0, 1, 2, 3, 4


def fmt(v: float) -> str:
    """Round-trippable binary64 text."""
    return f"{float(v):.17g}"


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:step`` (stop included when hit) or ``log:start:stop:count``."""
    parts = spec.split(":")
    try:
        if parts[0] == "log":
            if len(parts) != 4:
                raise ValueError
            a, b, n = float(parts[1]), float(parts[2]), int(parts[3])
            if not (0 < a < b and n >= 2):
                raise ValueError
            grid = np.geomspace(a, b, n)
        else:
            if len(parts) != 3:
                raise ValueError
            a, b, step = map(float, parts)
            if not (step > 0 and b >= a):
                raise ValueError
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            grid = a + step * np.arange(count)
    except ValueError:
        raise SpecParseError(f"bad grid {spec!r}; use start:stop:step or log:start:stop:count", "grid") from None
    if grid.size == 0 or not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0):
        raise SpecParseError("grid must be finite and strictly increasing", "grid")
    return grid


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_spec(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SpecParseError(f"cannot read spec: {exc.strerror}", path) from None


def _is_empty(op) -> bool:
    if isinstance(op, MonoCurve):
        return op.empty
    return op.domain().is_empty


def cmd_eval(spec_path: str, grid: str, out: str | None) -> int:
    op = parse_text(_read_spec(spec_path))
    buf = io.StringIO()
    if _is_empty(op):
        buf.write("# empty operator\nt,y_lo,y_hi\n")
        _write(buf.getvalue(), out)
        return EXIT_OK
    ts = parse_grid(grid)
    lo, hi = op.images(ts)
    buf.write("t,y_lo,y_hi\n")
    for t, a, b in zip(ts, lo, hi):
        buf.write(f"{fmt(t)},{fmt(a)},{fmt(b)}\n")
    _write(buf.getvalue(), out)
    return EXIT_OK


def cmd_verify(scenario: str, overrides: dict, out: str | None) -> int:
    report = run_scenario(scenario, overrides)
    _write(report.to_json(), out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _h_column(source, target, ts):
    name = target.name.split("(")[0]
    if name == "subexp":
        if source.name not in ("gaussian", "laplace"):
            return np.full(ts.shape, math.nan)
        return np.asarray(h_bound_subexp(target.q, source.name).h(ts))
    if name == "cauchy" and source.name in ("gaussian", "laplace"):
        return np.asarray(h_bound_cauchy(target.q, source.name).h(ts))
    return np.full(ts.shape, math.nan)


def cmd_transport(source: str, target: str, q: float | None, grid: str, out: str | None,
                  source_q: float | None = None) -> int:
    try:
        src = density(source, source_q)
        tgt = density(target, q)
    except BadParameter as exc:
        raise SpecParseError(str(exc), "distribution") from None
    if tgt.name.startswith("subexp") and not 0 < tgt.q < 1:
        raise SpecParseError("the subexponential h-bound needs q in (0, 1)", "--q")
    ts = parse_grid(grid)
    phi = quantile_transport(src, tgt, ts)
    dphi = transport_derivative(src, tgt, ts)
    h = _h_column(src, tgt, ts)
    buf = io.StringIO()
    buf.write("t,phi,phi_prime,h\n")
    for row in zip(ts, phi, dphi, h):
        buf.write(",".join(fmt(v) for v in row) + "\n")
    _write(buf.getvalue(), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="concop", description="Concentration operator toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="sample an operator expression on a grid")
    ev.add_argument("--spec", required=True, help="JSON expression file, or - for stdin")
    ev.add_argument("--grid", default="0:10:0.1")
    ev.add_argument("--out")

    ve = sub.add_parser("verify", help="run a Monte Carlo dominance scenario")
    ve.add_argument("--scenario", required=True)
    ve.add_argument("--samples", type=int)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--scale-bound", type=float)
    ve.add_argument("--q", type=float)
    ve.add_argument("--n", type=int)
    ve.add_argument("--p", type=float)
    ve.add_argument("--theta", type=float)
    ve.add_argument("--grid", help="explicit grid instead of the quantile-spanning default")
    ve.add_argument("--out")

    tr = sub.add_parser("transport", help="tabulate a quantile transport")
    tr.add_argument("--source", default="laplace")
    tr.add_argument("--target", required=True)
    tr.add_argument("--q", type=float)
    tr.add_argument("--source-q", type=float)
    tr.add_argument("--grid", default="0:10:0.1")
    tr.add_argument("--out")
    return p


def _overrides(args) -> dict:
    over = {"seed": args.seed, "samples": args.samples, "scale_bound": args.scale_bound}
    key = args.scenario.upper()
    accepted = SCENARIOS[key].defaults if key in SCENARIOS else {}
    for name in ("q", "n", "p", "theta"):
        value = getattr(args, name)
        if value is None:
            continue
        if name not in accepted:
            raise SpecParseError(f"scenario {key} has no parameter {name!r}", f"--{name}")
        over[name] = value
    if args.grid:
        over["grid"] = parse_grid(args.grid)
    return over


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return cmd_eval(args.spec, args.grid, args.out)
        if args.command == "verify":
            if args.scenario.upper() not in SCENARIOS:
                raise UnknownScenario(f"unknown scenario {args.scenario!r}")
            return cmd_verify(args.scenario, _overrides(args), args.out)
        return cmd_transport(args.source, args.target, args.q, args.grid, args.out, args.source_q)
    except SpecParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnknownScenario as exc:
        print(f"{exc.kind}: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except ConcopError as exc:
        print(f"{exc.kind}: {exc}", file=sys.stderr)
        return EXIT_ALGEBRA


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

Subcommands
-----------
solve      compute a nodal profile and emit its JSON document
spectrum   negative eigenvalues of the linearization around a profile
morse      full index report with the named lower bounds
sweep      alpha sweep at fixed (p, n): CSV artifact plus monotonicity gate
verify     run the verification battery on a named parameter grid

Every numerical knob of :class:`~henon_morse.config.Settings` is exposed as
a ``--flag`` (underscores become dashes), so tolerances can be overridden
per invocation without code changes.

Exit codes: 0 success; 1 a mathematical assertion failed (the computation
converged but contradicts a property that must hold); 2 a numerical
procedure did not converge; 3 bad usage.  Failures print one diagnostic
JSON object ``{"error", "message", "context"}`` to stderr.  Gating
subcommands (``sweep``, ``verify``) write their artifacts before raising,
so the evidence is on disk even when the verdict is bad.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
import json
import sys
from typing import get_type_hints

from .config import DEFAULT, Settings
from .errors import (
    HenonMorseError,
    NonConvergenceError,
    UsageError,
    VerificationError,
)
from .io import (
    dumps_canonical,
    morse_document,
    profile_document,
    save_json,
    spectrum_document,
    sweep_csv_text,
)
from .morse import assemble_morse, check_lower_bounds, sweep_from_reports
from .radial import HenonParams, solve_nodal
from .spectrum import build_schrodinger, negative_spectrum
from .verify import GRIDS, run_battery

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports bad usage through the package's own
    exception type (and hence exit code 3) instead of argparse's exit(2)."""

    def error(self, message):
        raise UsageError(message)


def _add_settings_flags(parser: argparse.ArgumentParser) -> None:
    hints = get_type_hints(Settings)
    group = parser.add_argument_group(
        "numerical settings", "overrides for tolerances and mesh sizes")
    for f in fields(Settings):
        group.add_argument(
            "--" + f.name.replace("_", "-"),
            type=hints[f.name], default=None, metavar="X",
            help=f"override {f.name} (default {f.default})")


def _settings_from(args: argparse.Namespace) -> Settings:
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(Settings)
        if getattr(args, f.name, None) is not None
    }
    return replace(DEFAULT, **overrides) if overrides else DEFAULT


def _add_point_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, required=True,
                        help="weight exponent alpha >= 0")
    parser.add_argument("--p", type=float, required=True,
                        help="nonlinearity power p > 1")
    parser.add_argument("--nodes", type=int, required=True,
                        help="number of nodal sets n >= 1")


def _emit(doc, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(dumps_canonical(doc) + "\n")
    else:
        save_json(doc, out)


def _parse_alphas(spec: str) -> list:
    """Parse ``--alphas``: either a comma list '0,0.5,1' or an inclusive
    range 'start:stop:step'."""
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ValueError("range form is start:stop:step")
            start, stop, step = (float(x) for x in parts)
            if step <= 0.0:
                raise ValueError("step must be positive")
            if stop < start:
                raise ValueError("stop must be >= start")
            count = int(round((stop - start) / step))
            values = [start + i * step for i in range(count + 1)]
            values = [v for v in values if v <= stop + 1e-12 * max(1.0, abs(stop))]
        else:
            values = [float(x) for x in spec.split(",") if x.strip()]
        if not values:
            raise ValueError("no alpha values given")
    except ValueError as exc:
        raise UsageError(f"bad --alphas '{spec}': {exc}", {"alphas": spec})
    out = sorted(set(values))
    if any(v < 0.0 for v in out):
        raise UsageError("alpha values must be >= 0", {"alphas": out})
    return out


def _cmd_solve(args) -> int:
    settings = _settings_from(args)
    profile = solve_nodal(
        HenonParams(alpha=args.alpha, p=args.p, n_nodal=args.nodes), settings)
    _emit(profile_document(profile), args.out)
    return 0


def _cmd_spectrum(args) -> int:
    settings = _settings_from(args)
    profile = solve_nodal(
        HenonParams(alpha=args.alpha, p=args.p, n_nodal=args.nodes), settings)
    spectrum = negative_spectrum(build_schrodinger(profile, settings), settings)
    _emit(spectrum_document(spectrum), args.out)
    return 0


def _cmd_morse(args) -> int:
    settings = _settings_from(args)
    profile = solve_nodal(
        HenonParams(alpha=args.alpha, p=args.p, n_nodal=args.nodes), settings)
    report = assemble_morse(profile, settings)
    if args.alpha == 0.0:
        companion = report
    else:
        companion_profile = solve_nodal(
            HenonParams(alpha=0.0, p=args.p, n_nodal=args.nodes), settings)
        companion = assemble_morse(companion_profile, settings)
    bounds = check_lower_bounds(report, companion)
    _emit(morse_document(report, bounds), args.out)
    if not all(b.satisfied for b in bounds):
        raise VerificationError(
            "a proved lower bound fails on the computed index",
            {"alpha": args.alpha, "p": args.p, "n": args.nodes,
             "failing": [b.name for b in bounds if not b.satisfied]})
    return 0


def _sweep_point(task):
    alpha, p, n, settings = task
    profile = solve_nodal(HenonParams(alpha=alpha, p=p, n_nodal=n), settings)
    return assemble_morse(profile, settings)


def _cmd_sweep(args) -> int:
    settings = _settings_from(args)
    alphas = _parse_alphas(args.alphas)
    if len(alphas) < 2:
        raise UsageError("a sweep needs at least two alpha values",
                         {"alphas": alphas})
    tasks = [(a, args.p, args.nodes, settings) for a in alphas]
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_sweep_point, tasks))
    else:
        reports = [_sweep_point(t) for t in tasks]
    sweep = sweep_from_reports(reports)

    companion = next((r for r in reports if r.params.alpha == 0.0), None)
    if companion is None:
        companion = _sweep_point((0.0, args.p, args.nodes, settings))
    rows = []
    for report in reports:
        bounds = check_lower_bounds(report, companion)
        rows.append({
            "alpha": report.params.alpha, "p": args.p, "n": args.nodes,
            "m_rad": report.m_rad, "m_total": report.m_total,
            "lambdas": report.lambdas,
            "bounds_pass": all(b.satisfied for b in bounds),
        })

    # Artifacts land on disk before any gating verdict is raised.
    with open(args.csv, "w", encoding="utf-8", newline="") as fp:
        fp.write(sweep_csv_text(rows))
    if args.out is not None:
        save_json(sweep.to_dict(), args.out)

    if not sweep.monotone:
        raise VerificationError(
            "m_total is not nondecreasing along the alpha sweep",
            {"p": args.p, "n": args.nodes,
             "transitions": [list(t) for t in sweep.transitions]})
    bad = [r["alpha"] for r in rows if not r["bounds_pass"]]
    if bad:
        raise VerificationError(
            "a proved lower bound fails along the sweep",
            {"p": args.p, "n": args.nodes, "alphas": bad})
    return 0


def _cmd_verify(args) -> int:
    settings = _settings_from(args)
    summary = run_battery(args.grid, settings, jobs=args.jobs)
    if args.out is not None:
        save_json(summary.to_dict(), args.out)
    for s in summary.sections:
        tag = "gate" if s.gating else "info"
        verdict = "PASS" if s.passed else "FAIL"
        print(f"[{tag}] criterion {s.criterion} {s.name}: {verdict} - {s.summary}")
    print(f"battery: {'PASS' if summary.passed else 'FAIL'} "
          f"({summary.elapsed_seconds:.1f} s, grid={summary.grid_name})")
    if not summary.passed:
        raise VerificationError(
            "the verification battery failed",
            {"grid": args.grid,
             "failing": [s.name for s in summary.sections
                         if s.gating and not s.passed]})
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="henon-morse",
                     description="Morse indices of nodal radial solutions "
                                 "of a weighted superlinear elliptic PDE "
                                 "on the unit disk")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="compute a nodal profile")
    _add_point_flags(sp)
    sp.add_argument("--out", default=None, metavar="FILE",
                    help="output JSON path (default: stdout)")
    _add_settings_flags(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("spectrum",
                        help="negative eigenvalues of the linearization")
    _add_point_flags(sp)
    sp.add_argument("--out", default=None, metavar="FILE")
    _add_settings_flags(sp)
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("morse", help="index report with lower bounds")
    _add_point_flags(sp)
    sp.add_argument("--out", default=None, metavar="FILE")
    _add_settings_flags(sp)
    sp.set_defaults(func=_cmd_morse)

    sp = sub.add_parser("sweep",
                        help="alpha sweep at fixed (p, n) with CSV artifact")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--nodes", type=int, required=True)
    sp.add_argument("--alphas", required=True, metavar="SPEC",
                    help="comma list '0,0.5,1' or inclusive range "
                         "'start:stop:step'")
    sp.add_argument("--csv", required=True, metavar="FILE",
                    help="CSV artifact path")
    sp.add_argument("--out", default=None, metavar="FILE",
                    help="optional JSON artifact with full reports")
    sp.add_argument("--jobs", type=int, default=None, metavar="N",
                    help="parallel worker processes (output is identical "
                         "for any N)")
    _add_settings_flags(sp)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("verify", help="run the verification battery")
    sp.add_argument("--grid", choices=sorted(GRIDS), default="default")
    sp.add_argument("--out", default=None, metavar="FILE",
                    help="write the battery summary JSON here")
    sp.add_argument("--jobs", type=int, default=None, metavar="N")
    _add_settings_flags(sp)
    sp.set_defaults(func=_cmd_verify)

    return parser


def _diagnostic(exc: HenonMorseError) -> str:
    doc = {"error": type(exc).__name__, "message": exc.message,
           "context": exc.context}
    try:
        return dumps_canonical(doc)
    except HenonMorseError:
        # a context value resisted canonical serialization; degrade gracefully
        doc["context"] = {k: repr(v) for k, v in exc.context.items()}
        return json.dumps(doc)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 3
    except VerificationError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 1
    except NonConvergenceError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 2
    except HenonMorseError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``bandbracket <command> SPEC [options]``.

SPEC is a path to a graph spec JSON file, or ``@name`` for a bundled fixture
(``@square``, ``@fig1``, ``@star``).
"""

from __future__ import annotations

import argparse
import io as _io
import json
import logging
import math
import re
import sys
from pathlib import Path

from . import io
from .bracketing import InclusionError, bracket, gauge_search, verify_and_certify
from .floquet import (DEFAULT_FLAT_TOL, DEFAULT_GRID, BandScanError, TorusGrid, band_intervals, band_path,
                      refine_bands, sample_bands)
from .graph_model import InvalidGraphError, validate
from .hermitian import ConvergenceError

log = logging.getLogger("bandbracket")

EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_INCLUSION = 3
EXIT_NUMERIC = 4
LARGE_GRID = 10 ** 7

COMMANDS = ("validate", "bands", "bracket", "estimate", "report", "bandpath")


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int = EXIT_INPUT, output: str | None = None):
        self.kind, self.code, self.output = kind, code, output
        super().__init__(message)


def _read_spec_text(arg: str) -> str:
    if arg.startswith("@"):
        name = arg[1:]
        if name.removesuffix(".json") + ".json" not in io.FIXTURES:
            raise CliError("input", f"unknown fixture {name!r}")
        return io.fixture_text(name)
    try:
        return Path(arg).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("input", f"cannot read {arg}: {exc.strerror}") from exc


_NUM = re.compile(r"^\s*(-?)\s*(\d*\.?\d*)\s*\*?\s*(pi)?\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def _parse_angle(token: str) -> float:
    """Parse ``1.5``, ``pi``, ``-pi/2``, ``2pi/3`` or ``0.5*pi``."""
    m = _NUM.match(token.lower())
    if not m or not (m.group(2) or m.group(3)):
        raise CliError("usage", code=EXIT_USAGE, message=f"bad angle {token!r}")
    sign, coef, pi, denom = m.groups()
    value = float(coef) if coef else 1.0
    if pi:
        value *= math.pi
    if denom:
        value /= float(denom)
    return -value if sign else value


def parse_waypoints(text: str, d: int) -> list[list[float]]:
    points = []
    for chunk in text.split(";"):
        comps = [_parse_angle(t) for t in chunk.split(",")]
        if len(comps) != d:
            raise CliError("usage", code=EXIT_USAGE,
                           message=f"waypoint {chunk.strip()!r} has {len(comps)} components, expected {d}")
        points.append(comps)
    if len(points) < 2:
        raise CliError("usage", code=EXIT_USAGE, message="need at least two waypoints")
    return points


def default_waypoints(d: int) -> list[list[float]]:
    corner = [math.pi] * d
    edge = [math.pi] + [0.0] * (d - 1)
    return [[0.0] * d, edge, corner, [0.0] * d] if d > 1 else [[0.0], [math.pi]]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandbracket", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("spec", help="graph spec JSON path, or @fixture")
    parser.add_argument("--grid", type=int, default=DEFAULT_GRID, help="samples per torus dimension (even)")
    parser.add_argument("--flat-tol", type=float, default=DEFAULT_FLAT_TOL)
    parser.add_argument("--refine", action="store_true", help="re-scan around band extrema at 8x resolution")
    parser.add_argument("--out", type=Path, help="write output here instead of stdout")
    parser.add_argument("--gauge-radius", type=int, default=0)
    parser.add_argument("--waypoints", help="bandpath waypoints, e.g. '0,0;pi,0;pi,pi;0,0'")
    parser.add_argument("--steps", type=int, default=32, help="bandpath subdivisions per segment")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _bands(spec, args):
    if args.grid < 2 or args.grid % 2:
        raise CliError("usage", code=EXIT_USAGE, message=f"--grid must be even and >= 2, got {args.grid}")
    if args.grid ** spec.dimension > LARGE_GRID:
        log.warning("grid has %d points", args.grid ** spec.dimension)
    table = sample_bands(spec, TorusGrid(args.grid, spec.dimension))
    if args.refine:
        table = refine_bands(spec, table)
    return band_intervals(table, args.flat_tol)


def _bracket_report(spec, bands, args):
    if args.gauge_radius:
        return gauge_search(spec, bands, args.gauge_radius).best
    return verify_and_certify(bands, bracket(spec))


def _run(args) -> str:
    text = _read_spec_text(args.spec)
    spec = io.parse_spec(text, check=False)
    report = validate(spec)
    if args.command == "validate":
        out = {
            "valid": report.valid,
            "dimension": spec.dimension,
            "nu": spec.nu,
            "multigraph_connected": report.multigraph_connected,
            "cycle_lattice_full": report.lattice_full,
            "invariant_factors": list(report.lattice.invariant_factors) if report.lattice else None,
            "reasons": list(report.reasons),
        }
        if not report.valid:
            raise CliError("invalid-graph", "; ".join(report.reasons), output=io.emit_json(out))
        return io.emit_json(out)
    if not report.valid:
        raise InvalidGraphError(report)

    if args.command == "bandpath":
        wp = parse_waypoints(args.waypoints, spec.dimension) if args.waypoints else default_waypoints(spec.dimension)
        if args.steps < 1:
            raise CliError("usage", code=EXIT_USAGE, message=f"--steps must be >= 1, got {args.steps}")
        buf = _io.StringIO()
        io.write_bandpath_csv(band_path(spec, wp, args.steps), buf)
        return buf.getvalue()

    bands = _bands(spec, args)
    if args.command == "bands":
        doc = {"summary": {"nu": spec.nu, "grid_N": args.grid, "refined": args.refine}}
        doc.update(io.band_section(bands))
        return io.emit_json(doc)

    rep = _bracket_report(spec, bands, args)
    full = io.report_dict(spec, bands, rep, args.grid, args.refine)
    if args.command == "estimate":
        return io.emit_json({"summary": full["summary"], "estimates": full["estimates"]})
    if args.command == "bracket":
        keep = ("summary", "lambda_N", "lambda_D", "J", "J_tilde", "J_cap", "inclusion_ok", "inclusion",
                "certified_gaps", "estimates")
        return io.emit_json({k: full[k] for k in keep})
    return io.emit_json(full)


def _error_line(kind: str, message: str) -> str:
    return json.dumps({"error": kind, "message": message})


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    output = None
    code = 0
    try:
        output = _run(args)
    except CliError as exc:
        output = exc.output
        print(_error_line(exc.kind, str(exc)), file=sys.stderr)
        code = exc.code
    except io.SpecParseError as exc:
        print(_error_line("parse", str(exc)), file=sys.stderr)
        code = EXIT_INPUT
    except InvalidGraphError as exc:
        print(_error_line("invalid-graph", str(exc)), file=sys.stderr)
        code = EXIT_INPUT
    except InclusionError as exc:
        print(_error_line("inclusion", str(exc)), file=sys.stderr)
        code = EXIT_INCLUSION
    except (BandScanError, ConvergenceError) as exc:
        print(_error_line("numeric", str(exc)), file=sys.stderr)
        code = EXIT_NUMERIC
    except ValueError as exc:
        print(_error_line("input", str(exc)), file=sys.stderr)
        code = EXIT_INPUT
    if output is not None:
        if args.out:
            args.out.write_text(output, encoding="utf-8")
        else:
            sys.stdout.write(output)
    return code

if __name__ == "__main__":
    sys.exit(main())

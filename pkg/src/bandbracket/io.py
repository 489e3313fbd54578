"""JSON graph specs, JSON reports and CSV band paths."""

from __future__ import annotations

import csv
import json
from importlib import resources
from typing import IO

import jsonschema

from .bracketing import BracketReport
from .floquet import BandIntervals, BandPath
from .graph_model import FundamentalEdge, PeriodicGraphSpec, SpecError, VertexClass, require_valid

FIXTURES = ("square.json", "fig1.json", "star.json")

SPEC_SCHEMA = {
    "type": "object",
    "required": ["dimension", "vertices", "edges"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1},
        "vertices": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "potential"],
                "properties": {"id": {"type": "string"}, "potential": {"type": "number"}},
            },
        },
        "edges": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["from", "to", "index"],
                "properties": {
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "index": {"type": "array", "items": {"type": "integer"}},
                },
            },
        },
    },
}


class SpecParseError(ValueError):
    """Malformed or invalid graph spec file; ``where`` locates the problem."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


def parse_spec(text: str, check: bool = True) -> PeriodicGraphSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    try:
        jsonschema.validate(doc, SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in exc.absolute_path)
        raise SpecParseError(exc.message, "$" + path) from exc
    d = doc["dimension"]
    for n, e in enumerate(doc["edges"]):
        if len(e["index"]) != d:
            raise SpecParseError(f"edge ({e['from']}, {e['to']}) index has length {len(e['index'])}, expected {d}",
                                 f"$.edges[{n}].index")
    try:
        spec = PeriodicGraphSpec(
            int(d),
            tuple(VertexClass(v["id"], v["potential"]) for v in doc["vertices"]),
            tuple(FundamentalEdge(e["from"], e["to"], tuple(int(t) for t in e["index"])) for e in doc["edges"]),
        )
    except SpecError as exc:
        raise SpecParseError(str(exc)) from exc
    if check:
        require_valid(spec)
    return spec


def dump_spec(spec: PeriodicGraphSpec) -> str:
    doc = {
        "dimension": spec.dimension,
        "vertices": [{"id": vc.id, "potential": vc.potential} for vc in spec.classes],
        "edges": [{"from": e.from_class, "to": e.to_class, "index": list(e.index)} for e in spec.edges],
    }
    return json.dumps(doc, indent=2) + "\n"


def fixture_text(name: str) -> str:
    if not name.endswith(".json"):
        name += ".json"
    return resources.files("bandbracket.fixtures").joinpath(name).read_text(encoding="utf-8")


def load_fixture(name: str) -> PeriodicGraphSpec:
    return parse_spec(fixture_text(name))


def _pair(iv):
    return None if iv is None else [float(iv[0]), float(iv[1])]


def band_section(bands: BandIntervals) -> dict:
    return {
        "bands": [{"n": n + 1, "lo": lo, "hi": hi, "flat_candidate": flat}
                  for n, ((lo, hi), flat) in enumerate(zip(bands.bands, bands.flat))],
        "gaps_observed": [_pair(g) for g in bands.gaps],
    }


def report_dict(spec: PeriodicGraphSpec, bands: BandIntervals, report: BracketReport, grid_n: int,
                refined: bool = False) -> dict:
    br = report.bracketing
    ng = br.graph
    summary = {
        "nu": ng.nu,
        "nu_D": ng.nu_D,
        "nu_N": ng.nu_N,
        "beta": ng.beta,
        "kappa_plus": br.kappa_plus,
        "grid_N": grid_n,
        "refined": refined,
        "inner_classes": list(ng.inner_ids),
    }
    if report.gauge is not None:
        summary["gauge"] = [list(m) for m in report.gauge]
    out = {"summary": summary}
    out.update(band_section(bands))
    out.update({
        "lambda_N": [float(x) for x in br.spectra.lambdaN],
        "lambda_D": [float(x) for x in br.spectra.lambdaD],
        "J": [_pair(iv) for iv in report.J],
        "J_tilde": [_pair(iv) for iv in report.Jt],
        "J_cap": [_pair(iv) for iv in report.Jcap],
        "inclusion_ok": report.inclusion_ok,
        "inclusion": list(report.inclusion),
        "certified_gaps": [_pair(g) for g in report.certified_gaps],
        "estimates": estimates_section(report),
    })
    return out


def estimates_section(report: BracketReport) -> dict:
    return {"est1": report.est1, "est2": report.est2, "total_band_length": report.total_band_length}


def emit_json(doc: dict) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def emit_report(spec, bands, report, grid_n, refined=False) -> str:
    return emit_json(report_dict(spec, bands, report, grid_n, refined))


def write_bandpath_csv(path: BandPath, stream: IO[str]) -> None:
    d = path.thetas.shape[1]
    nu = path.values.shape[1]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["s", *(f"theta_{i + 1}" for i in range(d)), *(f"lambda_{n + 1}" for n in range(nu))])
    for row in path.rows():
        writer.writerow([repr(x) for x in row])

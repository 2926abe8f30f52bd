"""Problem files: JSON documents validated against a strict schema."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .catalog import grid_points, lookup
from .errors import DimensionMismatch, ParseError, SchemaError
from .geometry import ConvexCone, Generators, SpaceSpec, cone_from_spec, orthant
from .multiplier import Process, SetValuedProblem, process_from_spec
from .penalty import ScalarProblem
from .setvalued import SampledMap, embed_inequality_constraint

__all__ = ["SCHEMA", "ProblemFile", "parse_problem", "load_problem_dict", "dump_problem",
           "bundled_problem", "parse_cone_arg"]

_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_SPACE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dim"],
    "properties": {"dim": {"type": "integer", "minimum": 1},
                   "norm": {"enum": ["euclidean", "supremum", "abs"]}},
}
_CONE = {
    "type": "object",
    "required": ["kind"],
    "oneOf": [
        {"additionalProperties": False,
         "properties": {"kind": {"const": "sector"},
                        "angles": {"type": "array", "items": {"type": "number"},
                                   "minItems": 2, "maxItems": 2}},
         "required": ["kind", "angles"]},
        {"additionalProperties": False,
         "properties": {"kind": {"const": "generators"},
                        "rays": {"type": "array", "items": _VEC, "minItems": 1}},
         "required": ["kind", "rays"]},
        {"additionalProperties": False,
         "properties": {"kind": {"const": "halfspaces"},
                        "normals": {"type": "array", "items": _VEC, "minItems": 1}},
         "required": ["kind", "normals"]},
        {"additionalProperties": False,
         "properties": {"kind": {"const": "orthant"}},
         "required": ["kind"]},
    ],
}
_MAP = {
    "type": "object",
    "oneOf": [
        {"additionalProperties": False,
         "properties": {"catalog": {"type": "string"}},
         "required": ["catalog"]},
        {"additionalProperties": False,
         "properties": {
             "table": {"type": "array", "minItems": 1, "items": {
                 "type": "object", "additionalProperties": False,
                 "required": ["x", "values"],
                 "properties": {"x": _VEC,
                                "values": {"type": "array", "items": _VEC, "minItems": 1}}}},
             "shift_cone": _CONE},
         "required": ["table"]},
    ],
}
_RANGE = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_PROCESS = {
    "type": "object",
    "required": ["kind"],
    "oneOf": [
        {"additionalProperties": False,
         "properties": {"kind": {"const": "halfspaces"},
                        "normals": {"type": "array", "items": _VEC, "minItems": 1},
                        "alphas": {"type": "array", "items": {"type": "number", "minimum": 0}}},
         "required": ["kind", "normals", "alphas"]},
        {"additionalProperties": False,
         "properties": {"kind": {"const": "base"}, "cone": _CONE, "functional": _VEC,
                        "level": {"type": "number", "exclusiveMinimum": 0}},
         "required": ["kind", "cone", "functional"]},
        {"additionalProperties": False,
         "properties": {"kind": {"const": "sublinear"},
                        "mu": {"type": "number", "minimum": 0}},
         "required": ["kind", "mu"]},
        {"additionalProperties": False,
         "properties": {"kind": {"const": "sublinear"},
                        "functionals": {"type": "array", "items": _VEC, "minItems": 1}},
         "required": ["kind", "functionals"]},
    ],
}
SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "spaces", "cones", "maps"],
    "properties": {
        "version": {"const": "1"},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "spaces": {"type": "object", "additionalProperties": False,
                   "required": ["X", "Y", "Z"],
                   "properties": {"X": _SPACE, "Y": _SPACE, "Z": _SPACE}},
        "cones": {"type": "object", "additionalProperties": False, "required": ["Y+"],
                  "properties": {"Y+": _CONE, "Z+": _CONE}},
        "maps": {"type": "object", "additionalProperties": False, "required": ["F", "G"],
                 "properties": {"F": _MAP, "G": _MAP}},
        "omega": {"type": "object", "additionalProperties": False,
                  "properties": {
                      "grid": {"type": "array", "items": _RANGE, "minItems": 1},
                      "within_ball": {"type": "number", "exclusiveMinimum": 0},
                      "points": {"type": "array", "items": _VEC, "minItems": 1},
                      "random_ball": {"type": "object", "additionalProperties": False,
                                      "required": ["count"],
                                      "properties": {"count": {"type": "integer", "minimum": 1},
                                                     "radius": {"type": "number",
                                                                "exclusiveMinimum": 0},
                                                     "seed": {"type": "integer"}}}}},
        "process": _PROCESS,
        "y0": _VEC,
        "defaults": {"type": "object", "additionalProperties": False,
                     "properties": {
                         "tol": {"type": "number", "minimum": 0},
                         "safety": {"type": "number", "exclusiveMinimum": 0},
                         "seed": {"type": "integer"},
                         "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                         "rho": {"type": "number", "exclusiveMinimum": 0},
                         "mu": {"type": "number", "minimum": 0},
                         "sweep": {"type": "string"}}},
    },
}


def _line_of(text: str, path) -> int | None:
    """Best-effort line number of the last key of a JSON path."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def load_problem_dict(text: str) -> dict:
    """Parse and schema-validate problem-file text."""
    if not text.strip():
        raise ParseError("problem file is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        msgs = []
        for e in errors:
            loc = "/".join(str(p) for p in e.absolute_path) or "<root>"
            line = _line_of(text, list(e.absolute_path))
            where = f" (line {line})" if line else ""
            msgs.append(f"{loc}{where}: {e.message}")
        raise SchemaError("problem file does not match the schema:\n  " + "\n  ".join(msgs), msgs)
    return data


def _space(d: dict) -> SpaceSpec:
    norm = d.get("norm", "abs" if d["dim"] == 1 else "euclidean")
    try:
        return SpaceSpec(d["dim"], norm)
    except ValueError as exc:
        raise DimensionMismatch(str(exc)) from None


def _cone(spec: dict, space: SpaceSpec) -> ConvexCone:
    if spec["kind"] == "orthant":
        return Generators(np.eye(space.dim), space)
    dim = len(spec.get("rays", spec.get("normals", [[0, 0]]))[0])
    if spec["kind"] != "sector" and dim != space.dim:
        raise DimensionMismatch(f"cone vectors have dimension {dim}, space has {space.dim}")
    if spec["kind"] == "sector" and space.dim != 2:
        raise DimensionMismatch("sector cones need a 2-dimensional space")
    return cone_from_spec(spec, space)


@dataclass
class ProblemFile:
    data: dict
    X: SpaceSpec
    Y: SpaceSpec
    Z: SpaceSpec
    y_cone: ConvexCone
    z_cone: ConvexCone | None
    F: SampledMap
    G: SampledMap
    omega: np.ndarray
    process: Process | None
    y0: np.ndarray
    source: str | None = None

    @property
    def name(self) -> str:
        return self.data.get("name", Path(self.source).stem if self.source else "problem")

    @property
    def defaults(self) -> dict:
        return self.data.get("defaults", {})

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.data, sort_keys=True))

    def set_valued_problem(self) -> SetValuedProblem:
        return SetValuedProblem(self.F, self.G, self.omega, self.y_cone, name=self.name)

    def scalar_problem(self, tol: float = 1e-9) -> ScalarProblem:
        if self.Y.dim != 1:
            raise DimensionMismatch("penalization needs a scalar objective (Y of dimension 1)")
        if self.F.shift_cone is not None or self.G.shift_cone is not None:
            raise DimensionMismatch("penalization needs single-valued tables without cone shifts")
        fv = [self.F.base_values(x)[:, 0] for x in self.omega]
        gv = [self.G.base_values(x) for x in self.omega]
        return ScalarProblem(self.omega, fv, gv, self.Z, tol, self.name)


def _build_map(spec: dict, omega, dom: SpaceSpec, cod: SpaceSpec, label: str) -> SampledMap:
    if "catalog" in spec:
        entry = lookup(spec["catalog"])
        if entry.domain_dim is not None and entry.domain_dim != dom.dim:
            raise DimensionMismatch(f"{label}: {entry.name} needs X of dimension {entry.domain_dim}")
        if entry.codomain_dim(dom.dim) != cod.dim:
            raise DimensionMismatch(
                f"{label}: {entry.name} maps into dimension {entry.codomain_dim(dom.dim)}, "
                f"the problem declares {cod.dim}")
        if omega is None:
            raise SchemaError(f"{label}: catalog maps need an omega section", ())
        shift = orthant(cod.dim, cod.norm) if entry.shift == "orthant" else None
        return SampledMap.from_function(entry.fn, omega, dom, cod, name=entry.name,
                                        shift_cone=shift)
    rows = spec["table"]
    for r in rows:
        if len(r["x"]) != dom.dim or any(len(v) != cod.dim for v in r["values"]):
            raise DimensionMismatch(f"{label}: table entry {r['x']} has the wrong dimension")
    shift = _cone(spec["shift_cone"], cod) if "shift_cone" in spec else None
    return SampledMap(dom, cod, np.array([r["x"] for r in rows], dtype=float),
                      tuple(np.array(r["values"], dtype=float) for r in rows),
                      name=label, shift_cone=shift)


def _omega(spec: dict | None, X: SpaceSpec) -> np.ndarray | None:
    if spec is None:
        return None
    parts = []
    if "grid" in spec:
        if len(spec["grid"]) != X.dim:
            raise DimensionMismatch(f"omega grid has {len(spec['grid'])} ranges, X has dim {X.dim}")
        pts = grid_points(spec["grid"])
        if "within_ball" in spec:
            pts = pts[X.norm_of(pts) <= spec["within_ball"] + 1e-12]
        parts.append(pts)
    if "random_ball" in spec:
        rb = spec["random_ball"]
        rng = np.random.default_rng(rb.get("seed", 0))
        radius = rb.get("radius", 1.0)
        d = rng.standard_normal((rb["count"], X.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = radius * rng.uniform(0.0, 1.0, rb["count"]) ** (1.0 / X.dim)
        eye = np.eye(X.dim)
        parts.append(np.concatenate([np.zeros((1, X.dim)), radius * eye, -radius * eye,
                                     d * r[:, None]]))
    if "points" in spec:
        pts = np.array(spec["points"], dtype=float)
        if pts.shape[1] != X.dim:
            raise DimensionMismatch("omega points have the wrong dimension")
        parts.append(pts)
    if not parts:
        raise SchemaError("omega needs grid, random_ball or points", ())
    pts = np.round(np.concatenate(parts), 12) + 0.0
    _, idx = np.unique(pts, axis=0, return_index=True)
    return pts[np.sort(idx)]


def build_problem(data: dict, source: str | None = None) -> ProblemFile:
    sp = data["spaces"]
    X, Y, Z = _space(sp["X"]), _space(sp["Y"]), _space(sp["Z"])
    y_cone = _cone(data["cones"]["Y+"], Y)
    z_cone = _cone(data["cones"]["Z+"], Z) if "Z+" in data["cones"] else None
    omega = _omega(data.get("omega"), X)
    F = _build_map(data["maps"]["F"], omega, X, Y, "F")
    G = _build_map(data["maps"]["G"], omega, X, Z, "G")
    if omega is None:
        omega = F.points
    if z_cone is not None:
        G = embed_inequality_constraint(G, z_cone)
    process = None
    if "process" in data:
        pspec = data["process"]
        vecs = pspec.get("normals") or pspec.get("functionals") or []
        want = Z.dim if pspec["kind"] == "sublinear" else Y.dim
        if any(len(v) != want for v in vecs):
            raise DimensionMismatch("process vectors have the wrong dimension")
        if pspec["kind"] == "halfspaces" and len(pspec["alphas"]) != len(pspec["normals"]):
            raise DimensionMismatch("process needs one alpha per normal")
        process = process_from_spec(pspec, Z, Y)
    y0 = np.array(data.get("y0", [0.0] * Y.dim), dtype=float)
    if len(y0) != Y.dim:
        raise DimensionMismatch("y0 has the wrong dimension")
    return ProblemFile(data, X, Y, Z, y_cone, z_cone, F, G, omega, process, y0, source)


def parse_problem(path) -> ProblemFile:
    """Read, validate and build a problem file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return build_problem(load_problem_dict(text), str(p))


def dump_problem(pf: ProblemFile | dict, path) -> None:
    data = pf.to_dict() if isinstance(pf, ProblemFile) else pf
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def bundled_problem(name: str) -> Path:
    """Path of a problem file shipped with the package."""
    ref = resources.files("procmult") / "problems" / name
    return Path(str(ref))


def parse_cone_arg(text: str, space: SpaceSpec | None = None) -> ConvexCone:
    """A cone from a JSON string or a path to a JSON file."""
    p = Path(text)
    raw = p.read_text() if not text.lstrip().startswith("{") and p.exists() else text
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"cone spec is not valid JSON: {exc.msg}") from None
    try:
        jsonschema.validate(spec, _CONE)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"bad cone spec: {exc.message}", (exc.message,)) from None
    if spec["kind"] == "orthant":
        if space is None:
            raise ParseError("orthant cones need a known dimension")
        return Generators(np.eye(space.dim), space)
    dim = 2 if spec["kind"] == "sector" else len(spec.get("rays", spec.get("normals"))[0])
    return _cone(spec, space or SpaceSpec(dim, "abs" if dim == 1 else "euclidean"))

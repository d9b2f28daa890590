"""Scenario documents: JSON schema, validation, builtin registry, mutations.

A scenario is a single JSON document of expression strings.  ``load_scenario``
accepts a filesystem path or a ``builtin:`` name and returns the validated
document; ``build_scenario`` compiles it into a
:class:`~nullgeo.nullsub.SubmanifoldScenario`.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from .contact import AlmostContactStructure
from .errors import ExprError, SchemaError, UnknownBuiltinError
from .expr import parse
from .geometry import MetricField, OneForm, VectorField
from .nullsub import ParallelismProbe, QGCRDecl, SubmanifoldScenario

SCHEMA_VERSION = 1

FRAME_ROLES = ("rad", "screen", "ltr", "stransversal")


def _require(doc: dict, path: str, key: str, types, optional: bool = False):
    if key not in doc:
        if optional:
            return None
        raise SchemaError(f"{path}.{key}", "missing required field")
    val = doc[key]
    if types is not None and not isinstance(val, types):
        raise SchemaError(f"{path}.{key}", f"expected {types}, got {type(val).__name__}")
    return val


def _expr_list(items, count, coords, params, path):
    if not isinstance(items, list) or len(items) != count:
        raise SchemaError(path, f"expected a list of {count} expression strings")
    out = []
    for i, s in enumerate(items):
        if not isinstance(s, str):
            raise SchemaError(f"{path}[{i}]", "expected an expression string")
        try:
            out.append(parse(s, coords, params))
        except ExprError as exc:
            raise SchemaError(f"{path}[{i}]", f"bad expression: {exc}") from exc
    return out


def _index_list(items, limit, path):
    if not isinstance(items, list):
        raise SchemaError(path, "expected a list of indices")
    for i, v in enumerate(items):
        if not isinstance(v, int) or isinstance(v, bool) or not (0 <= v < limit):
            raise SchemaError(f"{path}[{i}]", f"index must be an integer in [0, {limit})")
    return tuple(items)


def validate_document(doc: dict) -> dict:
    """Validate structure and cross-references; returns the document."""
    if not isinstance(doc, dict):
        raise SchemaError("$", "document must be a JSON object")
    version = _require(doc, "$", "schema_version", int)
    if version != SCHEMA_VERSION:
        raise SchemaError("$.schema_version", f"unsupported version {version}")
    _require(doc, "$", "name", str)

    params_map = doc.get("params", {})
    if not isinstance(params_map, dict):
        raise SchemaError("$.params", "expected an object of name -> number")
    for k, v in params_map.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SchemaError(f"$.params.{k}", "expected a number")
    pnames = tuple(params_map.keys())

    amb = _require(doc, "$", "ambient", dict)
    dim = _require(amb, "$.ambient", "dim", int)
    coords = _require(amb, "$.ambient", "coords", list)
    if len(coords) != dim or len(set(coords)) != dim:
        raise SchemaError("$.ambient.coords", f"expected {dim} distinct names")
    metric = _require(amb, "$.ambient", "metric", list)
    if len(metric) != dim:
        raise SchemaError("$.ambient.metric", f"expected {dim} rows")
    for i, row in enumerate(metric):
        _expr_list(row, dim, coords, pnames, f"$.ambient.metric[{i}]")
    sig = _require(amb, "$.ambient", "signature", list)
    if len(sig) != 2 or not all(isinstance(s, int) for s in sig) or sum(sig) != dim:
        raise SchemaError("$.ambient.signature", f"expected [neg, pos] summing to {dim}")

    if "structure" in doc:
        st = doc["structure"]
        phi = _require(st, "$.structure", "phi", list)
        if len(phi) != dim:
            raise SchemaError("$.structure.phi", f"expected {dim} rows")
        for i, row in enumerate(phi):
            _expr_list(row, dim, coords, pnames, f"$.structure.phi[{i}]")
        _expr_list(_require(st, "$.structure", "xi", list), dim, coords, pnames, "$.structure.xi")
        _expr_list(_require(st, "$.structure", "eta", list), dim, coords, pnames, "$.structure.eta")

    sub = _require(doc, "$", "submanifold", dict)
    sparams = _require(sub, "$.submanifold", "params", list)
    if not sparams or len(set(sparams)) != len(sparams):
        raise SchemaError("$.submanifold.params", "expected distinct parameter names")
    pmap = _require(sub, "$.submanifold", "param_map", dict)
    for c in coords:
        if c not in pmap:
            raise SchemaError(f"$.submanifold.param_map.{c}", "missing coordinate")
        _expr_list([pmap[c]], 1, sparams, pnames, f"$.submanifold.param_map.{c}")

    frames = _require(sub, "$.submanifold", "frames", dict)
    for role in FRAME_ROLES:
        if role not in frames:
            raise SchemaError(f"$.submanifold.frames.{role}", "missing frame role")
        if not isinstance(frames[role], list):
            raise SchemaError(f"$.submanifold.frames.{role}", "expected a list of fields")
        for i, comps in enumerate(frames[role]):
            _expr_list(comps, dim, coords, pnames, f"$.submanifold.frames.{role}[{i}]")
    r = len(frames["rad"])
    m = r + len(frames["screen"])
    total = m + len(frames["ltr"]) + len(frames["stransversal"])
    if len(frames["ltr"]) != r:
        raise SchemaError("$.submanifold.frames.ltr", f"expected {r} fields (one per rad field)")
    if total != dim:
        raise SchemaError("$.submanifold.frames", f"frame fields total {total}, ambient dim is {dim}")

    if "qgcr" in sub:
        q = sub["qgcr"]
        ns = len(frames["screen"])
        nw = len(frames["stransversal"])
        spec = {
            "d1": r, "d2": r, "d0": ns, "phi_d2": ns,
            "L": r, "S": nw, "phi_L": ns, "phi_S": ns,
        }
        for key, limit in spec.items():
            _index_list(_require(q, "$.submanifold.qgcr", key, list), limit, f"$.submanifold.qgcr.{key}")
        if set(q["d1"]) & set(q["d2"]):
            raise SchemaError("$.submanifold.qgcr", "d1 and d2 overlap")

    samp = _require(doc, "$", "sampling", dict)
    boxes = _require(samp, "$.sampling", "boxes", dict)
    for name in sparams:
        if name not in boxes:
            raise SchemaError(f"$.sampling.boxes.{name}", "missing parameter box")
        box = boxes[name]
        if (
            not isinstance(box, list)
            or len(box) != 2
            or not all(isinstance(x, (int, float)) for x in box)
            or not box[0] < box[1]
        ):
            raise SchemaError(f"$.sampling.boxes.{name}", "expected [lo, hi] with lo < hi")
    _require(samp, "$.sampling", "count", int)
    _require(samp, "$.sampling", "seed", int)

    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        raise SchemaError("$.tolerances", "expected an object")
    for k, v in tols.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
            raise SchemaError(f"$.tolerances.{k}", "expected a positive number")
    return doc


def build_scenario(doc: dict, param_overrides: dict[str, float] | None = None) -> SubmanifoldScenario:
    doc = validate_document(doc)
    bindings = dict(doc.get("params", {}))
    if param_overrides:
        for k, v in param_overrides.items():
            if k not in bindings:
                raise SchemaError(f"$.params.{k}", "cannot override an undeclared parameter")
            bindings[k] = float(v)
    pnames = tuple(bindings.keys())

    amb = doc["ambient"]
    coords = tuple(amb["coords"])
    dim = amb["dim"]

    def expr(s, chart):
        return parse(s, chart, pnames)

    metric = MetricField(
        components=tuple(tuple(expr(s, coords) for s in row) for row in amb["metric"]),
        signature=(amb["signature"][0], amb["signature"][1]),
        bindings=bindings,
    )

    structure = None
    if "structure" in doc:
        st = doc["structure"]
        structure = AlmostContactStructure(
            phi=tuple(tuple(expr(s, coords) for s in row) for row in st["phi"]),
            xi=VectorField(tuple(expr(s, coords) for s in st["xi"]), bindings),
            eta=OneForm(tuple(expr(s, coords) for s in st["eta"]), bindings),
            bindings=bindings,
        )

    sub = doc["submanifold"]
    sparams = tuple(sub["params"])
    param_map = tuple(expr(sub["param_map"][c], sparams) for c in coords)

    def fields(role):
        return [
            VectorField(tuple(expr(s, coords) for s in comps), bindings)
            for comps in sub["frames"][role]
        ]

    qgcr = None
    if "qgcr" in sub:
        q = sub["qgcr"]
        qgcr = QGCRDecl(
            d1=tuple(q["d1"]), d2=tuple(q["d2"]), d0=tuple(q["d0"]),
            phi_d2=tuple(q["phi_d2"]), ltr_l=tuple(q["L"]), s_s=tuple(q["S"]),
            phi_l=tuple(q["phi_L"]), phi_s=tuple(q["phi_S"]),
        )

    probes = []
    for pr in sub.get("parallelism_probes", []):
        probes.append(
            ParallelismProbe(
                screen_index=pr["screen_index"],
                declared_coefficient=(
                    expr(pr["declared_coefficient"], coords)
                    if pr.get("declared_coefficient")
                    else None
                ),
                computed_coefficient=expr(pr["computed_coefficient"], coords),
            )
        )

    samp = doc["sampling"]
    return SubmanifoldScenario(
        name=doc["name"],
        coords=coords,
        metric=metric,
        structure=structure,
        param_names=sparams,
        param_map=param_map,
        rad=fields("rad"),
        screen=fields("screen"),
        ltr=fields("ltr"),
        stransversal=fields("stransversal"),
        qgcr=qgcr,
        boxes={k: (float(v[0]), float(v[1])) for k, v in samp["boxes"].items()},
        count=samp["count"],
        seed=samp["seed"],
        tolerances=dict(doc.get("tolerances", {})),
        probes=probes,
        bindings=bindings,
    )


# --- mutations (sensitivity harness) ---------------------------------------


def apply_mutation(doc: dict, spec: str) -> dict:
    """Return a copy of ``doc`` with one entry perturbed.

    Spec forms: ``phi:I,J,DELTA`` | ``metric:I,J,DELTA`` (applied
    symmetrically) | ``frame:ROLE,K,COMP,DELTA``.
    """
    out = copy.deepcopy(doc)
    kind, _, rest = spec.partition(":")
    parts = rest.split(",")
    try:
        if kind == "phi":
            i, j, delta = int(parts[0]), int(parts[1]), float(parts[2])
            out["structure"]["phi"][i][j] = f"({out['structure']['phi'][i][j]}) + {delta!r}"
        elif kind == "metric":
            i, j, delta = int(parts[0]), int(parts[1]), float(parts[2])
            out["ambient"]["metric"][i][j] = f"({out['ambient']['metric'][i][j]}) + {delta!r}"
            if i != j:
                out["ambient"]["metric"][j][i] = f"({out['ambient']['metric'][j][i]}) + {delta!r}"
        elif kind == "frame":
            role, k, comp, delta = parts[0], int(parts[1]), int(parts[2]), float(parts[3])
            cur = out["submanifold"]["frames"][role][k][comp]
            out["submanifold"]["frames"][role][k][comp] = f"({cur}) + {delta!r}"
        else:
            raise SchemaError("$.mutate", f"unknown mutation kind '{kind}'")
    except (IndexError, ValueError, KeyError) as exc:
        raise SchemaError("$.mutate", f"bad mutation spec '{spec}': {exc}") from exc
    return out


# --- builtin registry -------------------------------------------------------


def _builtin_worked_example() -> dict:
    """The 7-dimensional 3-null submanifold of flat R^11 with the standard
    cosymplectic structure (theta defaults to pi/4, overridable)."""
    coords = ["x1", "x2", "x3", "x4", "x5", "y1", "y2", "y3", "y4", "y5", "z"]
    n = len(coords)
    signs = {
        "x1": -1, "x2": -1, "x3": 1, "x4": 1, "x5": 1,
        "y1": -1, "y2": -1, "y3": 1, "y4": 1, "y5": 1, "z": 1,
    }
    metric = [["0"] * n for _ in range(n)]
    for i, c in enumerate(coords):
        metric[i][i] = str(signs[c])

    # phi(dx_i) = -dy_i, phi(dy_i) = dx_i, phi(dz) = 0
    phi = [["0"] * n for _ in range(n)]
    for i in range(5):
        xi_col, yi_row = i, 5 + i
        phi[yi_row][xi_col] = "-1"
        phi[xi_col][5 + i] = "1"

    xi = ["0"] * n
    xi[10] = "1"
    eta = ["0"] * n
    eta[10] = "1"

    def vec(**comps):
        out = ["0"] * n
        for name, s in comps.items():
            out[coords.index(name)] = s
        return out

    frames = {
        "rad": [
            vec(x4="1", y1="1"),
            vec(x1="1", y4="-1"),
            vec(x2="sin(theta)", y2="cos(theta)", z="1"),
        ],
        "screen": [
            vec(x5="2*y5", y5="1"),
            vec(x2="-cos(theta)", y2="sin(theta)"),
            vec(y3="1"),
            vec(x3="1"),
        ],
        "ltr": [
            vec(x4="1/2", y1="-1/2"),
            vec(x1="-1/2", y4="-1/2"),
            vec(x2="-sin(theta)/2", y2="-cos(theta)/2", z="1/2"),
        ],
        "stransversal": [vec(x5="1", y5="-2*y5")],
    }

    param_map = {
        # the embedding locus pairs (x1, y4) and (x4, y1) with opposite signs
        # so that the declared radical fields are tangent
        "x1": "-y4",
        "x2": "x2",
        "x3": "x3",
        "x4": "x4",
        "x5": "x5",
        "y1": "x4",
        "y2": "y2",
        "y3": "y3",
        "y4": "y4",
        "y5": "x5^(1/2)",
        "z": "x2*sin(theta) + y2*cos(theta)",
    }

    boxes = {
        name: ([0.1, 2.0] if name == "x5" else [-1.0, 1.0])
        for name in ["x2", "x3", "x4", "x5", "y2", "y3", "y4"]
    }

    return {
        "schema_version": SCHEMA_VERSION,
        "name": "builtin:example-3.1",
        "params": {"theta": math.pi / 4},
        "ambient": {
            "dim": n,
            "coords": coords,
            "metric": metric,
            "signature": [4, 7],
        },
        "structure": {"phi": phi, "xi": xi, "eta": eta},
        "submanifold": {
            "params": ["x2", "x3", "x4", "x5", "y2", "y3", "y4"],
            "param_map": param_map,
            "frames": frames,
            "qgcr": {
                "d1": [0, 1], "d2": [2], "d0": [2, 3], "phi_d2": [1],
                "L": [2], "S": [0], "phi_L": [1], "phi_S": [0],
            },
            "parallelism_probes": [
                {
                    "screen_index": 0,
                    "declared_coefficient": "4*y5",
                    "computed_coefficient": "4*y5/(1 + 4*y5^2)",
                }
            ],
        },
        "sampling": {"boxes": boxes, "count": 20, "seed": 42},
        "tolerances": {},
    }


BUILTINS = {"example-3.1": _builtin_worked_example}


def load_scenario(source: str) -> dict:
    """Load and validate a scenario document from a path or builtin name."""
    if source.startswith("builtin:"):
        name = source[len("builtin:"):]
        if name not in BUILTINS:
            raise UnknownBuiltinError(name)
        return validate_document(BUILTINS[name]())
    path = Path(source)
    if not path.exists():
        raise SchemaError("$", f"scenario file not found: {source}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return validate_document(doc)

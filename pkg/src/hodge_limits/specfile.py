"""Reading, validating and generating JSON spec files.

Rationals are written as [num, den] (or a bare integer); complex entries as
[[re_num, re_den], [im_num, im_den]].  Floats are rejected.
"""

import json
from fractions import Fraction

import jsonschema

from .exact import Filtration, GQ, Matrix, Subspace

SPEC_VERSION = 1
CHECK_NAMES = ("growth", "higgs", "decay", "orbit-scan", "commutator")


class SpecError(Exception):
    """Schema or parse failure; `line` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__("line %d: %s" % (line, message) if line else message)


_INT = {"type": "integer"}
_PAIR = {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2}
_RAT = {"anyOf": [_INT, _PAIR]}
_SCALAR = {"anyOf": [_RAT, {"type": "array", "items": _PAIR, "minItems": 2, "maxItems": 2}]}
_VECTOR = {"type": "array", "items": _SCALAR}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}
_FILT = {"type": "object", "patternProperties": {"^-?[0-9]+$": {"type": "array", "items": _VECTOR}},
         "additionalProperties": False, "minProperties": 1}
_REAL = {"anyOf": [_RAT, {"enum": ["pi"]}]}

SCHEMA = {
    "type": "object",
    "required": ["version", "kind"],
    "properties": {
        "version": {"const": SPEC_VERSION},
        "kind": {"enum": ["model", "degeneration", "sl2_build"]},
        "name": {"type": "string"},
        "dim": {"type": "integer", "minimum": 0},
        "weight": _INT,
        "Q": _MATRIX,
        "N": _MATRIX,
        "H": _MATRIX,
        "Y": _MATRIX,
        "S": _MATRIX,
        "F": _FILT,
        "summands": {"type": "array", "minItems": 1,
                     "items": {"type": "array", "items": _INT, "minItems": 3, "maxItems": 3}},
        "ts_spectrum": {"type": "array", "items": {
            "type": "object", "required": ["angle", "basis"], "additionalProperties": False,
            "properties": {"angle": _RAT, "basis": {"type": "array", "items": _VECTOR}}}},
        "analysis": {"type": "object", "additionalProperties": False, "properties": {
            "checks": {"type": "array", "items": {"enum": list(CHECK_NAMES)}},
            "order": {"type": "integer", "minimum": 1},
            "x_decades": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
            "points": {"type": "integer", "minimum": 3},
            "y_values": {"type": "array", "items": _REAL, "minItems": 1},
            "growth_vectors": {"type": "array", "items": _VECTOR},
            "decay_pairs": {"type": "array", "items": {"type": "array", "items": _VECTOR,
                                                       "minItems": 2, "maxItems": 2}},
            "scan_x": {"type": "array", "items": _RAT},
            "scan_y": {"type": "array", "items": _REAL},
            "commutator_samples": {"type": "integer", "minimum": 0},
            "commutator_dims": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
            "seed": _INT,
        }},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "model"}}},
         "then": {"required": ["summands"]}},
        {"if": {"properties": {"kind": {"const": "degeneration"}}},
         "then": {"required": ["dim", "weight", "Q", "N"]}},
        {"if": {"properties": {"kind": {"const": "sl2_build"}}},
         "then": {"required": ["dim", "weight", "Q", "H", "Y", "F"]}},
    ],
}


# ---------------------------------------------------------------- locating lines


def locate_paths(text):
    """{path tuple: 1-based line} for every value in a JSON document."""
    out = {}
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos] in " \t\r\n":
            pos += 1

    def line():
        return text.count("\n", 0, pos) + 1

    def string():
        nonlocal pos
        end = pos + 1
        while text[end] != '"':
            end += 2 if text[end] == "\\" else 1
        s = json.loads(text[pos:end + 1])
        pos = end + 1
        return s

    def value(path):
        nonlocal pos
        skip()
        out[path] = line()
        c = text[pos]
        if c == "{":
            pos += 1
            skip()
            if text[pos] == "}":
                pos += 1
                return
            while True:
                skip()
                key = string()
                skip()
                pos += 1  # colon
                value(path + (key,))
                skip()
                c = text[pos]
                pos += 1
                if c == "}":
                    return
        elif c == "[":
            pos += 1
            skip()
            if text[pos] == "]":
                pos += 1
                return
            i = 0
            while True:
                value(path + (i,))
                i += 1
                skip()
                c = text[pos]
                pos += 1
                if c == "]":
                    return
        elif c == '"':
            string()
        else:
            while pos < n and text[pos] not in ",]} \t\r\n":
                pos += 1

    try:
        value(())
    except (IndexError, ValueError):
        pass
    return out


# ---------------------------------------------------------------- parsing


def _rational(x):
    if isinstance(x, bool):
        raise SpecError("boolean where a rational is required")
    if isinstance(x, int):
        return Fraction(x)
    num, den = x
    if den == 0:
        raise ValueError("zero denominator")
    return Fraction(num, den)


def parse_scalar(x):
    if isinstance(x, list) and len(x) == 2 and all(isinstance(a, list) for a in x):
        return GQ(_rational(x[0]), _rational(x[1]))
    return GQ(_rational(x))


def parse_real(x):
    if x == "pi":
        return float("nan")  # placeholder, resolved by the caller
    return _rational(x)


def parse_vector(v, dim, where):
    if len(v) != dim:
        raise _at(where, "vector has %d entries, expected %d" % (len(v), dim))
    return tuple(parse_scalar(a) for a in v)


class _Located(Exception):
    def __init__(self, path, message):
        self.path = path
        super().__init__(message)


def _at(path, message):
    return _Located(tuple(path), message)


def parse_matrix(rows, dim, where):
    if len(rows) != dim:
        raise _at(where, "matrix has %d rows, expected %d" % (len(rows), dim))
    for i, r in enumerate(rows):
        if len(r) != dim:
            raise _at(tuple(where) + (i,), "matrix row %d has %d entries, expected %d" % (i, len(r), dim))
    return Matrix([[parse_scalar(a) for a in r] for r in rows])


def parse_filtration(obj, dim, where):
    steps = {}
    for key, vecs in obj.items():
        steps[int(key)] = Subspace([parse_vector(v, dim, tuple(where) + (key, i)) for i, v in enumerate(vecs)], dim)
    lo, hi = min(steps), max(steps)
    for p in range(lo, hi + 1):
        if p not in steps:
            raise _at(where, "filtration index %d missing between %d and %d" % (p, lo, hi))
    try:
        return Filtration(dim, steps, True)
    except ValueError as exc:
        raise _at(where, str(exc)) from None


def load_spec(path):
    with open(path) as fh:
        text = fh.read()
    return parse_spec_text(text)


def parse_spec_text(text):
    """Validated raw document plus exact objects: returns a dict."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(exc.msg, exc.lineno) from None
    lines = locate_paths(text)
    _reject_floats(doc, (), lines)
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        path = tuple(e.absolute_path)
        raise SpecError("schema: %s at %s" % (e.message, "/".join(map(str, path)) or "<root>"),
                        _line_for(path, lines))
    try:
        return _build(doc)
    except _Located as exc:
        raise SpecError(str(exc), _line_for(exc.path, lines)) from None
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecError(str(exc)) from None


def _line_for(path, lines):
    path = tuple(path)
    while path not in lines and path:
        path = path[:-1]
    return lines.get(path)


def _reject_floats(x, path, lines):
    if isinstance(x, float):
        raise SpecError("floating point value not allowed; write rationals as [num, den]", _line_for(path, lines))
    if isinstance(x, list):
        for i, y in enumerate(x):
            _reject_floats(y, path + (i,), lines)
    elif isinstance(x, dict):
        for k, y in x.items():
            _reject_floats(y, path + (k,), lines)


def _build(doc):
    spec = {"kind": doc["kind"], "name": doc.get("name", doc["kind"]), "raw": doc,
            "analysis": doc.get("analysis", {})}
    if doc["kind"] == "model":
        spec["summands"] = [tuple(t) for t in doc["summands"]]
        for i, (m, p, q) in enumerate(spec["summands"]):
            if m < 0:
                raise _at(("summands", i), "m must be nonnegative")
        weights = {m + p + q for m, p, q in spec["summands"]}
        if len(weights) != 1:
            raise _at(("summands",), "summands must share the weight m+p+q")
        dim = sum(m + 1 for m, _, _ in spec["summands"])
        spec["dim"] = dim
        spec["weight"] = weights.pop()
        spec["S"] = parse_matrix(doc["S"], dim, ("S",)) if "S" in doc else None
        return spec
    dim = doc["dim"]
    spec["dim"] = dim
    spec["weight"] = doc["weight"]
    spec["Q"] = parse_matrix(doc["Q"], dim, ("Q",))
    spec["F"] = parse_filtration(doc["F"], dim, ("F",)) if "F" in doc else None
    if doc["kind"] == "degeneration":
        spec["N"] = parse_matrix(doc["N"], dim, ("N",))
        ts = []
        for i, item in enumerate(doc.get("ts_spectrum", [])):
            a = _rational(item["angle"])
            basis = [parse_vector(v, dim, ("ts_spectrum", i, "basis", j)) for j, v in enumerate(item["basis"])]
            ts.append((a, Subspace(basis, dim)))
        spec["ts_spectrum"] = tuple(ts) if ts else None
    else:
        spec["H"] = parse_matrix(doc["H"], dim, ("H",))
        spec["Y"] = parse_matrix(doc["Y"], dim, ("Y",))
    return spec


# ---------------------------------------------------------------- writing


def scalar_json(a):
    (rn, rd), (inum, iden) = GQ.of(a).pair()
    if inum == 0:
        return rn if rd == 1 else [rn, rd]
    return [[rn, rd], [inum, iden]]


def matrix_json(A):
    return [[scalar_json(a) for a in r] for r in A.rows]


def filtration_json(F):
    return {str(p): [[scalar_json(a) for a in v] for v in F[p].rows] for p in F.indices()}


def dump_spec(doc):
    """JSON text with one matrix row or vector per line."""
    def fmt(x, indent):
        pad = "  " * indent
        if isinstance(x, dict):
            if not x:
                return "{}"
            items = ["%s  %s: %s" % (pad, json.dumps(k), fmt(v, indent + 1)) for k, v in x.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(x, list) and x and not _is_flat(x):
            return "[\n" + ",\n".join(pad + "  " + fmt(r, indent + 1) for r in x) + "\n" + pad + "]"
        return json.dumps(x)
    return fmt(doc, 0) + "\n"


def _is_scalar(x):
    if isinstance(x, int):
        return True
    if isinstance(x, list) and len(x) == 2:
        if all(isinstance(a, int) for a in x):
            return True
        if all(isinstance(a, list) and len(a) == 2 and all(isinstance(b, int) for b in a) for a in x):
            return True
    return False


def _is_flat(row):
    return isinstance(row, list) and all(_is_scalar(a) for a in row)


def model_spec(summands, S=None, name=None, analysis=None):
    summands = [list(t) for t in summands]
    doc = {"version": SPEC_VERSION, "kind": "model",
           "name": name or "sum_" + "_".join("S%d(%d,%d)" % tuple(t) for t in summands),
           "summands": summands}
    if S is not None:
        doc["S"] = matrix_json(S)
    if analysis is not None:
        doc["analysis"] = analysis
    return doc


def degeneration_spec(d, name="degeneration", analysis=None):
    doc = {"version": SPEC_VERSION, "kind": "degeneration", "name": name, "dim": d.dim,
           "weight": d.weight, "Q": matrix_json(d.Q), "N": matrix_json(d.N)}
    if len(d.ts_spectrum) > 1 or d.ts_spectrum[0][0] != 0:
        doc["ts_spectrum"] = [{"angle": scalar_json(GQ(a)), "basis": [[scalar_json(x) for x in v] for v in E.rows]}
                              for a, E in d.ts_spectrum]
    if d.F is not None:
        doc["F"] = filtration_json(d.F)
    if analysis is not None:
        doc["analysis"] = analysis
    return doc

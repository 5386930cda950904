"""JSON formats for matrices, grid functions, semigroups and problem files.

Matrices are ``{"dim": n, "re": [[...]], "im": [[...]]}`` in row-major
order. A problem file wraps one payload::

    {"schema_version": "1.0", "kind": "operator_family",
     "payload": {...}, "tolerances": {"tol": 1e-8}}

Bare payloads are accepted as well; their kind is inferred from the keys.
"""
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import jsonschema
import numpy as np

from .decomp import GridFunction, OperatorFamily
from .exceptions import InvalidInputError
from .onepar import PeriodSpec, SemigroupSpec

SCHEMA_VERSION = "1.0"
KINDS = ("operator_family", "grid_function", "semigroup")


class SchemaError(InvalidInputError):
    """A JSON document violates its schema; ``path`` locates the first violation."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


_SCHEMA = None


def schema():
    global _SCHEMA
    if _SCHEMA is None:
        text = resources.files("perdec").joinpath("schemas/perdec-1.0.schema.json").read_text()
        _SCHEMA = json.loads(text)
    return _SCHEMA


def _json_path(prefix, parts):
    out = prefix
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate(obj, definition, prefix="$"):
    """Validate ``obj`` against ``#/$defs/<definition>``; raise on the first violation."""
    sch = {"$ref": f"#/$defs/{definition}", "$defs": schema()["$defs"]}
    errors = sorted(jsonschema.Draft202012Validator(sch).iter_errors(obj),
                    key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, _json_path(prefix, err.absolute_path))


# --- primitive converters ---------------------------------------------------


def matrix_to_json(M):
    M = np.asarray(M, dtype=np.complex128)
    return {"dim": int(M.shape[0]), "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_json(obj, path="$"):
    validate(obj, "matrix", path)
    n = obj["dim"]
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros((n, n))), dtype=float)
    for name, part in (("re", re), ("im", im)):
        if part.shape != (n, n):
            raise SchemaError(f"expected a {n}x{n} array, got shape {part.shape}", f"{path}.{name}")
    return re + 1j * im


def vector_to_json(v):
    v = np.asarray(v, dtype=np.complex128)
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


def vector_from_json(obj, path="$"):
    validate(obj, "vector", path)
    if isinstance(obj, list):
        return np.asarray(obj, dtype=float).astype(np.complex128)
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if im.shape != re.shape:
        raise SchemaError("re and im lengths differ", f"{path}.im")
    return re + 1j * im


def period_to_json(t):
    return t.to_json()


def period_from_json(obj, units=None, path="$"):
    validate(obj, "period", path)
    try:
        return PeriodSpec.make(obj["p"], obj.get("q", 1), obj.get("tag", "one"), units=units)
    except InvalidInputError as exc:
        raise SchemaError(str(exc), path) from None


def periods_from_json(obj, units=None, path="$"):
    validate(obj, "periods", path)
    return [period_from_json(o, units, f"{path}[{i}]") for i, o in enumerate(obj)]


def semigroup_to_json(S):
    return {"A": matrix_to_json(S.A), "units": dict(S.units)}


def semigroup_from_json(obj, path="$"):
    validate(obj, "semigroup_spec", path)
    A = matrix_from_json(obj["A"], f"{path}.A")
    return SemigroupSpec(A, units=dict(obj.get("units", {})))


def grid_to_json(f):
    return {"N": f.N, "values_re": f.values.real.tolist(),
            "values_im": f.values.imag.tolist(), "shifts": list(f.shifts)}


def grid_from_json(obj, path="$"):
    validate(obj, "grid_function", path)
    re = np.asarray(obj["values_re"], dtype=float)
    im = np.asarray(obj.get("values_im", np.zeros_like(re)), dtype=float)
    if re.shape != (obj["N"],) or im.shape != re.shape:
        raise SchemaError(f"values must have length N = {obj['N']}", f"{path}.values_re")
    return GridFunction(obj["N"], re + 1j * im, obj["shifts"])


# --- problems --------------------------------------------------------------


@dataclass
class Problem:
    kind: str
    family: OperatorFamily = None
    grid: GridFunction = None
    semigroup: SemigroupSpec = None
    times: list = None
    x: np.ndarray = None
    tolerances: dict = field(default_factory=dict)

    def payload_json(self):
        """Normalised payload; the basis of the input digest."""
        if self.kind == "operator_family":
            out = {"ops": [matrix_to_json(T) for T in self.family.ops]}
        elif self.kind == "grid_function":
            return grid_to_json(self.grid)
        else:
            out = {"semigroup": semigroup_to_json(self.semigroup)}
            if self.times is not None:
                out["times"] = [t.to_json() for t in self.times]
        if self.x is not None:
            out["x"] = vector_to_json(self.x)
        return out

    def to_json(self):
        out = {"schema_version": SCHEMA_VERSION, "kind": self.kind, "payload": self.payload_json()}
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        return out

    def digest(self):
        blob = json.dumps({"kind": self.kind, "payload": self.payload_json()},
                          sort_keys=True, separators=(",", ":"), allow_nan=False)
        return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


def infer_kind(obj):
    if not isinstance(obj, dict):
        raise SchemaError("expected a JSON object")
    if "kind" in obj:
        return obj["kind"]
    if "ops" in obj:
        return "operator_family"
    if "N" in obj:
        return "grid_function"
    if "semigroup" in obj or "A" in obj:
        return "semigroup"
    raise SchemaError("cannot infer problem kind (expected 'kind', 'ops', 'N' or 'semigroup')")


def problem_from_json(obj, x=None):
    """Parse a wrapped or bare problem; ``x`` overrides the payload vector."""
    kind = infer_kind(obj)
    if isinstance(obj, dict) and "kind" in obj:
        validate(obj, "problem")
        payload, prefix, tols = obj["payload"], "$.payload", dict(obj.get("tolerances", {}))
    else:
        payload, prefix, tols = obj, "$", {}
    if kind == "semigroup" and "semigroup" not in payload and "A" in payload:
        payload = {"semigroup": {k: payload[k] for k in ("A", "units") if k in payload},
                   **{k: payload[k] for k in ("times", "x") if k in payload}}
    validate(payload, kind, prefix)
    prob = Problem(kind, tolerances=tols)
    if kind == "operator_family":
        mats = [matrix_from_json(m, f"{prefix}.ops[{i}]") for i, m in enumerate(payload["ops"])]
        prob.family = OperatorFamily(mats)
    elif kind == "grid_function":
        prob.grid = grid_from_json(payload, prefix)
    else:
        prob.semigroup = semigroup_from_json(payload["semigroup"], f"{prefix}.semigroup")
        if "times" in payload:
            prob.times = periods_from_json(payload["times"], prob.semigroup.units, f"{prefix}.times")
    if "x" in payload:
        prob.x = vector_from_json(payload["x"], f"{prefix}.x")
    if x is not None:
        prob.x = vector_from_json(x, "$x") if not isinstance(x, np.ndarray) else x
    if prob.x is not None and kind != "grid_function":
        dim = prob.family.dim if kind == "operator_family" else prob.semigroup.dim
        if prob.x.shape != (dim,):
            raise SchemaError(f"vector has length {prob.x.shape[0]}, expected {dim}",
                              f"{prefix}.x")
    return prob


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg} (line {exc.lineno})") from None


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def fraction_to_json(fr):
    fr = Fraction(fr)
    return {"p": fr.numerator, "q": fr.denominator}

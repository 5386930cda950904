"""Certificates: auditable records of a decomposition run.

A certificate stores every defect the acceptance decision depends on, the
tolerance used, and a digest of the normalised input. Verification
recomputes the defects from the input and the reported components alone,
so it does not trust the projections or the solver that produced them.
"""
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .decomp import difference_defect, grid_difference_defect
from .exceptions import InvalidInputError, TamperError
from .io import SCHEMA_VERSION, validate
from .onepar import OperatorFamily, reduce_periods

MATCH_TOL = 1e-12


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if np.isfinite(v) else None


def build_certificate(problem, result, tol, command, difference=None):
    """Certificate document ``{"certificate": ..., "result": ...}``.

    ``result`` is ``None`` when the run was rejected before decomposing; in
    that case ``difference`` carries the offending defect.
    """
    defects = {"difference": _num(difference if result is None else result.difference_defect)}
    methods = []
    if result is not None:
        if problem.kind == "semigroup":
            defects["difference"] = _num(result.details["original_difference_defect"])
        defects.update({
            "sum_residual": _num(result.sum_residual),
            "invariance": [float(d) for d in result.invariance_defects],
            "commutation": _num(result.commutation_defect),
            "projection_product": _num(result.projection_product_defect),
            "projection_idempotency": [p.idempotency_defect for p in result.projections],
            "projection_zero_element": [p.zero_element_defect for p in result.projections],
        })
        methods.append(result.method)
        methods.extend(p.method for p in result.projections)
    cert = {
        "schema_version": SCHEMA_VERSION,
        "tool": "perdec",
        "tool_version": __version__,
        "command": command,
        "kind": problem.kind,
        "input_digest": problem.digest(),
        "accepted": bool(result is not None and result.accepted),
        "tolerances": {"tol": float(tol)},
        "methods": methods,
        "defects": defects,
    }
    return {"certificate": cert, "result": None if result is None else result.to_json()}


@dataclass
class Verification:
    verified: bool
    mismatches: list = field(default_factory=list)
    recomputed: dict = field(default_factory=dict)


def _components(result_json):
    return [np.asarray(c["re"], dtype=float) + 1j * np.asarray(c.get("im", [0.0] * len(c["re"])))
            for c in result_json["components"]]


def _recompute(problem, comps):
    """Difference, sum residual, invariance defects and norm of the input."""
    kind = problem.kind
    if kind == "grid_function":
        f = problem.grid
        x = f.values
        diff = grid_difference_defect(f)
        inv = [float(np.linalg.norm(np.roll(c, -a) - c)) for c, a in zip(comps, f.shifts)]
        comm = None
    else:
        x = problem.x
        if kind == "operator_family":
            fam = problem.family
            ops = fam.ops
        else:
            S = problem.semigroup
            fam = OperatorFamily([S.T(t.numeric) for t in problem.times])
            plan = reduce_periods(problem.times)
            ops = [S.T(s.numeric) for s in plan.common_periods]
        diff = difference_defect(fam, x)
        inv = [float(np.linalg.norm(T @ c - c)) for T, c in zip(ops, comps)]
        comm = OperatorFamily(ops).commutation_defect
    nx = float(np.linalg.norm(x))
    total = np.sum(comps, axis=0) if comps else np.zeros_like(x)
    return {"difference": diff, "sum_residual": float(np.linalg.norm(x - total)),
            "invariance": inv, "commutation": comm, "norm_x": nx}


def _close(a, b):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= MATCH_TOL * max(1.0, abs(a), abs(b))


def verify_certificate(doc, problem):
    """Recompute every defect and the acceptance decision.

    Raises :class:`TamperError` when the input digest does not match.
    """
    validate(doc, "certificate_document")
    cert = doc["certificate"]
    if cert["kind"] != problem.kind:
        raise TamperError(f"certificate is for {cert['kind']}, input is {problem.kind}")
    if cert["input_digest"] != problem.digest():
        raise TamperError("input digest mismatch: certificate does not belong to these inputs")
    if problem.kind != "grid_function" and problem.x is None:
        raise InvalidInputError("verification needs the decomposed vector x")
    tol = cert["tolerances"]["tol"]
    defects = cert["defects"]
    result = doc.get("result")
    out = Verification(True)

    if result is None:
        comps = []
        rec = _recompute(problem, comps)
        out.recomputed = rec
        if not _close(rec["difference"], defects.get("difference")):
            out.mismatches.append("difference")
        bound = tol if problem.kind == "grid_function" else tol * rec["norm_x"]
        if cert["accepted"] or rec["difference"] <= bound:
            out.mismatches.append("accepted")
        out.verified = not out.mismatches
        return out

    comps = _components(result)
    n_expected = problem.grid.n if problem.kind == "grid_function" else (
        problem.family.n if problem.kind == "operator_family"
        else len(reduce_periods(problem.times).classes))
    if len(comps) != n_expected:
        return Verification(False, ["components"])
    rec = _recompute(problem, comps)
    out.recomputed = rec
    for key in ("difference", "sum_residual", "commutation"):
        if key in defects and not _close(rec[key], defects[key]):
            out.mismatches.append(key)
    inv = defects.get("invariance") or []
    if len(inv) != len(rec["invariance"]) or not all(
            _close(a, b) for a, b in zip(rec["invariance"], inv)):
        out.mismatches.append("invariance")
    bound = tol * rec["norm_x"]
    accepted = rec["sum_residual"] <= bound and all(d <= bound for d in rec["invariance"])
    if accepted != cert["accepted"] or accepted != bool(result.get("accepted", accepted)):
        out.mismatches.append("accepted")
    out.verified = not out.mismatches
    return out

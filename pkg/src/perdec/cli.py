"""Command-line front end.

Exit codes: 0 accepted, 2 rejected (difference equation or hypothesis
failure, failed verification), 1 usage, I/O or schema error.
The tolerance is taken from ``--tol``, then the problem file, then the
``PERDEC_TOL`` environment variable, then ``1e-8``.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .certificate import build_certificate, verify_certificate
from .decomp import (DEFAULT_TOL, OperatorFamily, decompose_grid_function, decompose_oracle,
                     decompose_vector, difference_defect, grid_difference_defect)
from .exceptions import InvalidInputError, PerdecError, PreconditionError
from .io import (SchemaError, dump_json, fraction_to_json, load_json, periods_from_json,
                 problem_from_json)
from .onepar import (aap_orbit_diagnostic, norm_continuity_defect,
                     periodic_spectrum_check, peripheral_smt_check, reduce_periods,
                     semigroup_decompose)

EXIT_OK, EXIT_USAGE, EXIT_REJECTED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _tolerance(args, problem=None):
    if getattr(args, "tol", None) is not None:
        return args.tol
    if problem is not None and "tol" in problem.tolerances:
        return float(problem.tolerances["tol"])
    env = os.environ.get("PERDEC_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"PERDEC_TOL is not a number: {env!r}") from None
    return DEFAULT_TOL


def _load_problem(path, vector_path=None, kind=None):
    obj = load_json(path)
    x = load_json(vector_path) if vector_path else None
    prob = problem_from_json(obj, x=x)
    if kind is not None and prob.kind not in kind:
        raise SchemaError(f"expected a {' or '.join(kind)} problem, got {prob.kind}")
    return prob


def _fmt(v):
    return "n/a" if v is None or (isinstance(v, float) and not np.isfinite(v)) else f"{v:.3e}"


def _emit(args, doc, lines):
    if getattr(args, "json_out", None):
        dump_json(doc, args.json_out)
    if getattr(args, "json", False):
        print(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False))
    else:
        print("\n".join(lines))


def _report_lines(doc):
    cert = doc["certificate"]
    d = cert["defects"]
    lines = [f"status: {'ACCEPTED' if cert['accepted'] else 'REJECTED'}",
             f"method: {', '.join(cert['methods']) or 'none'}",
             f"tol: {cert['tolerances']['tol']:g}",
             f"difference defect: {_fmt(d.get('difference'))}"]
    if doc.get("result") is not None:
        lines.append(f"sum residual: {_fmt(d.get('sum_residual'))}")
        for j, v in enumerate(d.get("invariance") or [], 1):
            lines.append(f"invariance defect {j}: {_fmt(v)}")
        for j, c in enumerate(doc["result"]["components"], 1):
            vals = np.asarray(c["re"]) + 1j * np.asarray(c["im"])
            lines.append(f"component {j}: {np.array2string(vals, precision=6)}")
    lines.append(f"digest: {cert['input_digest']}")
    return lines


def _run_decomposition(args, prob, compute):
    tol = _tolerance(args, prob)
    command = args.command
    try:
        result = compute(prob, tol)
    except PreconditionError as exc:
        doc = build_certificate(prob, None, tol, command, difference=exc.defect)
        _emit(args, doc, _report_lines(doc) + [f"reason: {exc}"])
        return EXIT_REJECTED
    doc = build_certificate(prob, result, tol, command)
    _emit(args, doc, _report_lines(doc))
    return EXIT_OK if result.accepted else EXIT_REJECTED


def cmd_decompose(args):
    prob = _load_problem(args.problem, args.vector, kind=("operator_family",))
    if prob.x is None:
        raise SchemaError("no vector given (payload 'x' or a VECTOR file)")

    def compute(p, tol):
        if args.oracle:
            res = decompose_oracle(p.family, p.x, tol=tol)
            if res.difference_defect > tol * res.norm_x:
                raise PreconditionError("difference equation violated",
                                        defect=res.difference_defect)
            return res
        return decompose_vector(p.family, p.x, tol=tol, mean=args.mean)

    return _run_decomposition(args, prob, compute)


def cmd_grid_decompose(args):
    prob = _load_problem(args.problem, kind=("grid_function",))
    return _run_decomposition(
        args, prob, lambda p, tol: decompose_grid_function(p.grid, tol=tol, mean=args.mean))


def cmd_sg_decompose(args):
    prob = _load_problem(args.problem, args.vector, kind=("semigroup",))
    if prob.times is None or prob.x is None:
        raise SchemaError("semigroup problem needs 'times' and 'x'")
    return _run_decomposition(
        args, prob, lambda p, tol: semigroup_decompose(p.semigroup, p.times, p.x, tol=tol))


def cmd_check(args):
    prob = _load_problem(args.problem, args.vector)
    tol = _tolerance(args, prob)
    if prob.kind == "grid_function":
        defect = grid_difference_defect(prob.grid)
        bound = tol
    else:
        if prob.x is None:
            raise SchemaError("no vector given (payload 'x' or a VECTOR file)")
        if prob.kind == "operator_family":
            fam = prob.family
        else:
            fam = OperatorFamily([prob.semigroup.T(t.numeric) for t in prob.times])
        defect = difference_defect(fam, prob.x)
        bound = tol * float(np.linalg.norm(prob.x))
    ok = defect <= bound
    doc = {"kind": prob.kind, "difference_defect": defect, "bound": bound, "satisfied": ok,
           "input_digest": prob.digest()}
    _emit(args, doc, [f"difference defect: {_fmt(defect)}", f"bound: {_fmt(bound)}",
                      f"status: {'SATISFIED' if ok else 'VIOLATED'}"])
    return EXIT_OK if ok else EXIT_REJECTED


def cmd_reduce_periods(args):
    text = args.periods
    if os.path.exists(text):
        obj = load_json(text)
    else:
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc.msg}") from None
    units = None
    if isinstance(obj, dict):
        units = obj.get("units")
        obj = obj.get("times", obj)
    plan = reduce_periods(periods_from_json(obj, units))
    lines = []
    for cls, s in zip(plan.classes, plan.common_periods):
        lines.append(f"class {cls}: s={s}, multipliers "
                     + " ".join(str(plan.multipliers[i]) for i in cls))
    doc = plan.to_json()
    doc["common_periods_exact"] = [fraction_to_json(s.rational) for s in plan.common_periods]
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_diagnose(args):
    prob = _load_problem(args.problem, args.vector, kind=("semigroup",))
    S = prob.semigroup
    tol = _tolerance(args, prob)
    curve = norm_continuity_defect(S, args.t_grid, args.h_grid)
    smt = [peripheral_smt_check(S.A, t, tol=tol) for t in curve.t_grid]
    doc = {
        "growth_bound": S.growth_bound,
        "bounded": S.bounded_flag,
        "norm_continuity": {"t": curve.t_grid.tolist(), "h": curve.h_grid.tolist(),
                            "D": curve.D.tolist(), "table": curve.table.tolist()},
        "peripheral_smt": [{"t": float(t), "distance": r.distance, "passed": r.passed}
                           for t, r in zip(curve.t_grid, smt)],
    }
    lines = [f"growth bound: {S.growth_bound:.6g}",
             f"bounded: {S.bounded_flag}",
             "norm continuity D(t): " + ", ".join(
                 f"{t:g}:{d:.2e}" for t, d in zip(curve.t_grid, curve.D)),
             "peripheral spectral mapping: "
             + ("pass" if all(r.passed for r in smt) else "FAIL")]
    if args.alpha is not None:
        try:
            rep = periodic_spectrum_check(S.A, args.alpha, tol=tol)
            doc["periodic_spectrum"] = {"passed": rep.passed,
                                        "offending": [[z.real, z.imag] for z in rep.offending]}
            lines.append(f"periodic spectrum (alpha={args.alpha:g}): "
                         + ("pass" if rep.passed else "FAIL"))
        except PreconditionError as exc:
            doc["periodic_spectrum"] = {"passed": False, "error": str(exc)}
            lines.append(f"periodic spectrum: not periodic ({exc})")
    if prob.x is not None:
        aap = aap_orbit_diagnostic(S, prob.x, args.t_step, args.horizon, args.eps)
        doc["aap"] = {"bounded": aap.bounded, "discrete_net": aap.discrete_net,
                      "continuous_net": aap.continuous_net, "segment_net": aap.segment_net,
                      "max_norm_ratio": aap.max_norm_ratio}
        lines.append("orbit: " + (f"nets discrete={aap.discrete_net} "
                                  f"continuous={aap.continuous_net} segment={aap.segment_net}"
                                  if aap.bounded else "UNBOUNDED (not asymptotically almost periodic)"))
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_verify(args):
    doc = load_json(args.certificate)
    prob = _load_problem(args.problem, args.vector)
    out = verify_certificate(doc, prob)
    print("verified" if out.verified else "FAILED: " + ", ".join(out.mismatches))
    return EXIT_OK if out.verified else EXIT_REJECTED


def _add_common(p, mean=False, vector=True):
    p.add_argument("problem", help="problem JSON file")
    if vector:
        p.add_argument("vector", nargs="?", help="optional vector JSON file overriding payload x")
    p.add_argument("--tol", type=float, default=None)
    if mean:
        p.add_argument("--mean", default="exact", help="exact | cesaro:N")
    p.add_argument("--json-out", metavar="PATH")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")


def build_parser():
    parser = _Parser(prog="perdec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"perdec {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("decompose", help="decompose a vector for an operator family")
    _add_common(p, mean=True)
    p.add_argument("--oracle", action="store_true", help="use the least-squares oracle")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("grid-decompose", help="decompose a function on Z_N")
    _add_common(p, mean=True, vector=False)
    p.set_defaults(func=cmd_grid_decompose)

    p = sub.add_parser("sg-decompose", help="decompose for a matrix semigroup")
    _add_common(p)
    p.set_defaults(func=cmd_sg_decompose)

    p = sub.add_parser("check", help="evaluate the difference equation")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce-periods", help="merge commensurable periods")
    p.add_argument("periods", help="JSON list of {p, q, tag} (inline or a file path)")
    p.add_argument("--json-out", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reduce_periods)

    for name in ("diagnose", "sg-diagnose"):
        p = sub.add_parser(name, help="semigroup diagnostics")
        _add_common(p)
        p.add_argument("--t-grid", type=float, nargs="+", default=None)
        p.add_argument("--h-grid", type=float, nargs="+", default=None)
        p.add_argument("--alpha", type=float, default=None, help="period for the spectrum check")
        p.add_argument("--t-step", type=float, default=1.0)
        p.add_argument("--horizon", type=float, default=16.0)
        p.add_argument("--eps", type=float, default=0.1)
        p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("verify-certificate", help="recompute a certificate from its inputs")
    p.add_argument("certificate")
    p.add_argument("problem")
    p.add_argument("vector", nargs="?")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PerdecError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())

"""One-parameter matrix semigroups ``T(t) = exp(tA)``.

Periods carry an exact rational coefficient and a symbolic irrational unit
so that commensurability is decided exactly: two periods are commensurable
iff they share a unit tag.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from ._validation import check_matrix, check_tol, check_vector
from .decomp import DEFAULT_TOL, OperatorFamily, decompose_vector, difference_defect
from .ergodic import kernel_power_collapse, power_bounded_verdict
from .exceptions import HypothesisViolationError, InvalidInputError, NotPeriodicError, PreconditionError
from .linalg import matrix_exp, opnorm, spectrum

UNITS = {
    "one": 1.0,
    "sqrt2": 2.0 ** 0.5,
    "sqrt3": 3.0 ** 0.5,
    "sqrt5": 5.0 ** 0.5,
    "pi": np.pi,
    "e": np.e,
}

DEFAULT_T_GRID = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
DEFAULT_H_GRID = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]


@dataclass(frozen=True)
class PeriodSpec:
    """A period ``(p/q) * unit`` with ``unit`` named by ``tag``."""

    rational: Fraction
    tag: str = "one"
    unit_value: float = 1.0

    @classmethod
    def make(cls, p, q=1, tag="one", units=None):
        if isinstance(p, bool) or isinstance(q, bool) or int(p) != p or int(q) != q:
            raise InvalidInputError(f"period coefficients must be integers, got {p}/{q}")
        p, q = int(p), int(q)
        if p <= 0 or q <= 0:
            raise InvalidInputError(f"periods must be positive, got {p}/{q}")
        table = UNITS if units is None else {**UNITS, **units}
        if tag not in table:
            raise InvalidInputError(f"unknown unit tag {tag!r}")
        u = float(table[tag])
        if not u > 0:
            raise InvalidInputError(f"unit {tag!r} must be positive")
        return cls(Fraction(p, q), tag, u)

    @property
    def p(self):
        return self.rational.numerator

    @property
    def q(self):
        return self.rational.denominator

    @property
    def numeric(self):
        return self.p / self.q * self.unit_value

    def commensurable(self, other):
        return self.tag == other.tag

    def to_json(self):
        return {"p": self.p, "q": self.q, "tag": self.tag}

    def __str__(self):
        r = str(self.rational)
        return r if self.tag == "one" else f"{r}*{self.tag}"


@dataclass
class ReductionPlan:
    classes: list
    common_periods: list
    multipliers: list

    @property
    def reduced_times(self):
        return list(self.common_periods)

    def to_json(self):
        return {
            "classes": [list(c) for c in self.classes],
            "common_periods": [s.to_json() for s in self.common_periods],
            "multipliers": list(self.multipliers),
        }


def rational_lcm(fracs):
    """Least positive rational that is an integer multiple of every input."""
    fracs = [Fraction(f) for f in fracs]
    num = 1
    den = 0
    for f in fracs:
        num = lcm(num, f.numerator)
        den = gcd(den, f.denominator)
    return Fraction(num, den)


def reduce_periods(times):
    """Group periods by unit tag and replace each group by its rational lcm."""
    times = list(times)
    if not times:
        raise InvalidInputError("no periods given")
    for t in times:
        if not isinstance(t, PeriodSpec):
            raise InvalidInputError(f"expected PeriodSpec, got {type(t).__name__}")
        if t.rational <= 0:
            raise InvalidInputError("periods must be positive")
    order, groups = [], {}
    for i, t in enumerate(times):
        if t.tag not in groups:
            order.append(t.tag)
            groups[t.tag] = []
        groups[t.tag].append(i)
    classes, commons = [], []
    multipliers = [0] * len(times)
    for tag in order:
        idx = groups[tag]
        s = rational_lcm([times[i].rational for i in idx])
        for i in idx:
            m = s / times[i].rational
            assert m.denominator == 1
            multipliers[i] = m.numerator
        classes.append(idx)
        commons.append(PeriodSpec(s, tag, times[idx[0]].unit_value))
    return ReductionPlan(classes, commons, multipliers)


def growth_bound(A):
    """``max Re sigma(A)``."""
    A = check_matrix(A, "generator")
    return float(np.max(np.linalg.eigvals(A).real))


@dataclass
class SemigroupSpec:
    """Generator ``A`` of ``T(t) = exp(tA)`` plus a unit table for periods.

    ``bounded_flag`` holds iff ``max Re sigma(A) <= 0`` and every eigenvalue
    on the imaginary axis is semisimple.
    """

    A: np.ndarray
    units: dict = field(default_factory=dict)
    cluster_tol: float = None
    growth_bound: float = field(init=False)
    bounded_flag: bool = field(init=False)

    def __post_init__(self):
        self.A = check_matrix(self.A, "generator")
        if self.cluster_tol is None:
            self.cluster_tol = 1e-8 * max(opnorm(self.A), 1.0)
        rep = spectrum(self.A, cluster_tol=self.cluster_tol)
        re = rep.eigenvalues.real
        self.growth_bound = float(np.max(re))
        on_axis = np.abs(re) <= self.cluster_tol
        self.bounded_flag = bool(self.growth_bound <= self.cluster_tol and rep.defect(on_axis) == 0)

    @property
    def dim(self):
        return self.A.shape[0]

    def T(self, t):
        return matrix_exp(self.A, t)

    def period(self, p, q=1, tag="one"):
        return PeriodSpec.make(p, q, tag, units=self.units)


def collapse_powers(S, plan):
    """Family ``{T(s)}``, one operator per commensurability class.

    Raises :class:`HypothesisViolationError` when some ``T(s)`` is not
    power-bounded, or when ``ker(T(s) - I)^k`` fails to collapse onto
    ``ker(T(s) - I)`` for a class of size ``k``.
    """
    ops = []
    for cls, s in zip(plan.classes, plan.common_periods):
        Ts = S.T(s.numeric)
        v = power_bounded_verdict(Ts)
        if not v.bounded:
            raise HypothesisViolationError(
                f"T({s}) is not power-bounded (r = {v.spectral_radius:.6g}, "
                f"peripheral defect {v.peripheral_defect})")
        if len(cls) > 1:
            c = kernel_power_collapse(Ts, len(cls))
            if not c.collapsed:
                raise HypothesisViolationError(
                    f"ker(T({s}) - I)^{len(cls)} has dimension {c.dim_ker_pow}, "
                    f"ker(T({s}) - I) has {c.dim_ker}")
        ops.append(Ts)
    return OperatorFamily(ops)


def semigroup_decompose(S, times, x, tol=DEFAULT_TOL):
    """Decompose ``x`` along ``ker(T(t_j) - I)`` for a bounded semigroup.

    Commensurable times are merged into their rational lcm ``s``; the
    component of a merged class is invariant under ``T(s)`` and is reported
    against ``s`` with the merged indices as provenance. Defects under the
    original ``T(t_j)`` are reported informationally.
    """
    if not S.bounded_flag:
        raise HypothesisViolationError(
            f"semigroup is not bounded (growth bound {S.growth_bound:.6g})")
    tol = check_tol(tol)
    x = check_vector(x, S.dim)
    times = list(times)
    original = OperatorFamily([S.T(t.numeric) for t in times])
    dd = difference_defect(original, x)
    nx = float(np.linalg.norm(x))
    if dd > tol * nx:
        raise PreconditionError(
            f"difference equation violated: defect {dd:.3g} > {tol:.3g} * ||x||", defect=dd)
    plan = reduce_periods(times)
    reduced = collapse_powers(S, plan)
    res = decompose_vector(reduced, x, tol=tol)
    per_time = [0.0] * len(times)
    for c, cls in enumerate(plan.classes):
        for i in cls:
            Ti = original.ops[i]
            per_time[i] = float(np.linalg.norm(Ti @ res.components[c] - res.components[c]))
    res.method = "inclusion_exclusion/reduced"
    res.details = {
        "provenance": [
            {"representative": s.to_json(), "merged": list(cls),
             "multipliers": [plan.multipliers[i] for i in cls]}
            for cls, s in zip(plan.classes, plan.common_periods)],
        "original_difference_defect": dd,
        "original_time_defects": per_time,
    }
    return res


@dataclass
class PeriodicSpectrumReport:
    passed: bool
    period_defect: float
    eigenvalues: np.ndarray
    distances: list
    semisimple: list
    offending: list


def periodic_spectrum_check(A, alpha, tol=1e-8):
    """For ``exp(alpha A) = I`` check ``sigma(A)`` in ``(2 pi i / alpha) Z``, semisimple."""
    A = check_matrix(A, "generator")
    alpha = float(alpha)
    if not alpha > 0:
        raise InvalidInputError("alpha must be positive")
    tol = check_tol(tol)
    pd = opnorm(matrix_exp(A, alpha) - np.eye(A.shape[0]))
    if pd > tol:
        raise NotPeriodicError(
            f"exp(alpha A) is not the identity: ||exp(alpha A) - I|| = {pd:.3g}", defect=pd)
    rep = spectrum(A)
    step = 2j * np.pi / alpha
    dists, semis, bad = [], [], []
    for lam, a, g in zip(rep.eigenvalues, rep.algebraic_multiplicities,
                         rep.geometric_multiplicities):
        k = np.round((lam / step).real)
        d = float(abs(lam - k * step))
        dists.append(d)
        semis.append(a == g)
        if d > tol or a != g:
            bad.append(complex(lam))
    return PeriodicSpectrumReport(not bad, pd, rep.eigenvalues, dists, semis, bad)


def hausdorff(X, Y):
    X = np.asarray(X, dtype=np.complex128)
    Y = np.asarray(Y, dtype=np.complex128)
    if len(X) == 0 and len(Y) == 0:
        return 0.0
    if len(X) == 0 or len(Y) == 0:
        return float("inf")
    D = np.abs(X[:, None] - Y[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@dataclass
class SmtReport:
    passed: bool
    distance: float
    radius: float
    semigroup_side: np.ndarray
    generator_side: np.ndarray


def peripheral_smt_check(A, t, tol=1e-8, band=1e-6):
    """Compare ``sigma(exp(tA))`` and ``exp(t sigma(A))`` on ``|z| = r(T(t))``.

    Points with modulus ``>= (1 - band) * r`` count as peripheral on both sides.
    """
    A = check_matrix(A, "generator")
    t = float(t)
    if not t > 0:
        raise InvalidInputError("t must be positive")
    lhs_all = np.linalg.eigvals(matrix_exp(A, t))
    rhs_all = np.exp(t * np.linalg.eigvals(A))
    r = float(np.max(np.abs(lhs_all)))
    cut = (1.0 - band) * r
    lhs = lhs_all[np.abs(lhs_all) >= cut]
    rhs = rhs_all[np.abs(rhs_all) >= cut]
    d = hausdorff(lhs, rhs)
    return SmtReport(d <= tol, d, r, lhs, rhs)


@dataclass
class ContinuityCurve:
    """``table[i, k] = ||e^{-w t_i} T(t_i) (I - e^{-w h_k} T(h_k))||``."""

    t_grid: np.ndarray
    h_grid: np.ndarray
    table: np.ndarray
    growth_bound: float

    @property
    def D(self):
        return self.table.max(axis=1)

    def tail_sup(self, h0):
        """``max_{h <= h0}`` per ``t``: the limsup estimate on the tail."""
        mask = self.h_grid <= h0
        if not mask.any():
            return np.zeros(len(self.t_grid))
        return self.table[:, mask].max(axis=1)


def norm_continuity_defect(S, t_grid=None, h_grid=None):
    t_grid = np.asarray(DEFAULT_T_GRID if t_grid is None else t_grid, dtype=float)
    h_grid = np.asarray(DEFAULT_H_GRID if h_grid is None else h_grid, dtype=float)
    if np.any(t_grid <= 0) or np.any(h_grid <= 0):
        raise InvalidInputError("grids must be positive")
    if np.any(np.diff(h_grid) >= 0):
        raise InvalidInputError("h_grid must be strictly decreasing")
    w = S.growth_bound
    n = S.dim
    table = np.empty((len(t_grid), len(h_grid)))
    for k, h in enumerate(h_grid):
        D_h = np.eye(n) - np.exp(-w * h) * S.T(h)
        for i, t in enumerate(t_grid):
            table[i, k] = opnorm(np.exp(-w * t) * S.T(t) @ D_h)
    return ContinuityCurve(t_grid, h_grid, table, w)


def net_size(points, eps):
    """Size of a greedy eps-net for points sampled along a path.

    Each new centre is pushed forward along the path as far as it still
    covers the first uncovered sample, so a circle sampled densely needs
    about ``pi / eps`` centres.
    """
    P = np.asarray(points)
    m = len(P)
    if m == 0:
        return 0
    covered = np.zeros(m, dtype=bool)
    count = 0
    i = 0
    while True:
        rest = np.flatnonzero(~covered[i:])
        if len(rest) == 0:
            break
        i = i + rest[0]
        j = i
        while j + 1 < m and np.linalg.norm(P[j + 1] - P[i]) <= eps:
            j += 1
        covered |= np.linalg.norm(P - P[j], axis=1) <= eps
        count += 1
    return count


@dataclass
class AapReport:
    bounded: bool
    discrete_net: int
    continuous_net: int
    segment_net: int
    max_norm_ratio: float
    eps: float

    @property
    def ratio(self):
        if not self.bounded or self.discrete_net == 0:
            return float("nan")
        return self.continuous_net / self.discrete_net

    @property
    def contract_holds(self):
        return self.bounded and self.continuous_net <= self.discrete_net * self.segment_net


def _orbit(step_op, x, count, limit):
    pts = [x]
    v = x
    for _ in range(count):
        v = step_op @ v
        pts.append(v)
        if np.linalg.norm(v) > limit:
            return np.array(pts), False
    return np.array(pts), True


def aap_orbit_diagnostic(S, x, t_step, horizon, eps, oversample=None):
    """Compare eps-net sizes of the discrete orbit ``T(n t_step) x`` and the
    sampled continuous orbit ``T(t) x``, ``t <= horizon``.

    ``oversample`` fine samples are taken per ``t_step``; by default enough
    that consecutive samples are about ``eps / 32`` apart. An orbit whose
    norm exceeds ``1e6 * ||x||`` is reported as unbounded.
    """
    x = check_vector(x, S.dim)
    t_step, horizon, eps = float(t_step), float(horizon), float(eps)
    if not t_step > 0 or horizon < t_step or not eps > 0:
        raise InvalidInputError("need t_step > 0, horizon >= t_step and eps > 0")
    limit = 1e6 * max(float(np.linalg.norm(x)), np.finfo(float).tiny)
    steps = int(np.floor(horizon / t_step + 1e-12))
    if oversample is None:
        speed = opnorm(S.A) * float(np.linalg.norm(x)) * t_step
        oversample = int(min(max(16, np.ceil(32 * speed / eps)), 20000))
    h = t_step / oversample
    disc, ok1 = _orbit(S.T(t_step), x, steps, limit)
    cont, ok2 = _orbit(S.T(h), x, steps * oversample, limit)
    nx = max(float(np.linalg.norm(x)), np.finfo(float).tiny)
    ratio = float(max(np.linalg.norm(disc, axis=1).max(), np.linalg.norm(cont, axis=1).max()) / nx)
    if not (ok1 and ok2):
        return AapReport(False, -1, -1, -1, ratio, eps)
    seg = cont[:oversample + 1]
    return AapReport(True, net_size(disc, eps), net_size(cont, eps), net_size(seg, eps), ratio, eps)

"""Invariant decompositions for commuting operator families and grid functions.

Given commuting ``T_1, ..., T_n`` and ``x`` with
``(T_1 - I) ... (T_n - I) x = 0`` the components are

    x_j = - sum_{eps : eps_j = 1, eps_k = 0 for k > j} (-1)^|eps| P^eps x

where ``P^eps`` is the ordered product of the mean ergodic projections
``P_i`` with ``eps_i = 1`` (largest index applied first). Grid functions on
``Z_N`` use the same formula with exact averages over the cyclic subgroups
generated by the shifts.
"""
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from ._validation import check_family, check_tol, check_vector
from .ergodic import mean_ergodic_projection, parse_mean, power_bounded_verdict
from .exceptions import HypothesisViolationError, InvalidInputError, PreconditionError
from .linalg import kernel_basis, opnorm

DEFAULT_TOL = 1e-8

GAUGE_NOTE = ("components are unique only modulo the pairwise intersections "
              "of the invariant subspaces")


@dataclass
class OperatorFamily:
    """Commuting square matrices ``T_1, ..., T_n`` of a common size.

    Construction fails when ``max ||T_i T_j - T_j T_i||`` exceeds
    ``comm_tol`` (default ``1e-10 * max ||T_j||^2``).
    """

    ops: list
    comm_tol: float = None
    commutation_defect: float = field(init=False)

    def __post_init__(self):
        self.ops = check_family(self.ops)
        scale = max(opnorm(T) for T in self.ops)
        if self.comm_tol is None:
            self.comm_tol = 1e-10 * max(scale * scale, 1.0)
        self.commutation_defect = _commutation_defect(self.ops)
        if self.commutation_defect > self.comm_tol:
            raise HypothesisViolationError(
                f"operators do not commute: defect {self.commutation_defect:.3g} "
                f"> {self.comm_tol:.3g}")

    @property
    def dim(self):
        return self.ops[0].shape[0]

    @property
    def n(self):
        return len(self.ops)

    def __len__(self):
        return len(self.ops)

    def permuted(self, order):
        return OperatorFamily([self.ops[i] for i in order], comm_tol=self.comm_tol)


def _commutation_defect(ops):
    d = 0.0
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            d = max(d, opnorm(ops[i] @ ops[j] - ops[j] @ ops[i]))
    return d


@dataclass(frozen=True)
class EpsilonMask:
    bits: tuple

    @property
    def weight(self):
        return sum(self.bits)

    @property
    def last_set(self):
        """1-based index of the last set bit, 0 for the empty mask."""
        for j in range(len(self.bits), 0, -1):
            if self.bits[j - 1]:
                return j
        return 0

    @classmethod
    def all(cls, n):
        """All ``2^n`` masks, bit ``i`` of the integer giving ``eps_{i+1}``."""
        return [cls(tuple((m >> i) & 1 for i in range(n))) for m in range(2 ** n)]


@dataclass
class DecompositionResult:
    components: list
    sum_residual: float
    invariance_defects: list
    method: str
    tol: float
    norm_x: float
    difference_defect: float = float("nan")
    projection_product_defect: float = float("nan")
    commutation_defect: float = float("nan")
    projection_commutation_defect: float = float("nan")
    projections: list = field(default_factory=list, repr=False)
    details: dict = field(default_factory=dict)

    @property
    def accepted(self):
        bound = self.tol * self.norm_x
        return bool(self.sum_residual <= bound
                    and all(d <= bound for d in self.invariance_defects))

    def to_json(self):
        out = {
            "method": self.method,
            "accepted": self.accepted,
            "tol": self.tol,
            "norm_x": self.norm_x,
            "components": [{"re": np.real(c).tolist(), "im": np.imag(c).tolist()}
                           for c in self.components],
            "sum_residual": self.sum_residual,
            "invariance_defects": list(map(float, self.invariance_defects)),
            "gauge_note": GAUGE_NOTE,
        }
        for key in ("difference_defect", "projection_product_defect",
                    "commutation_defect", "projection_commutation_defect"):
            v = getattr(self, key)
            out[key] = float(v) if np.isfinite(v) else None
        if self.projections:
            out["projections"] = [p.to_json() for p in self.projections]
        out.update(self.details)
        return out


def _ordered_product(apply, mask, v):
    # P_{i1} P_{i2} ... v with the largest index applied first.
    for i in reversed(range(len(mask.bits))):
        if mask.bits[i]:
            v = apply(i, v)
    return v


def inclusion_exclusion(apply, n, x):
    """Components ``x_1..x_n`` from the grouped signed sum over ``{0,1}^n``.

    ``apply(i, v)`` applies the i-th (0-based) mean/projection to ``v``. Terms
    are accumulated in increasing mask order.
    """
    comps = [np.zeros_like(x) for _ in range(n)]
    for mask in EpsilonMask.all(n):
        j = mask.last_set
        if j == 0:
            continue
        term = _ordered_product(apply, mask, x)
        comps[j - 1] = comps[j - 1] - (-1) ** mask.weight * term
    return comps


def difference_defect(family, x):
    """``||(T_1 - I)(T_2 - I) ... (T_n - I) x||`` with ``T_n`` applied first."""
    if not isinstance(family, OperatorFamily):
        family = OperatorFamily(family)
    v = check_vector(x, family.dim)
    for T in reversed(family.ops):
        v = T @ v - v
    return float(np.linalg.norm(v))


def _projection_commutation(Ps):
    return _commutation_defect(Ps) if len(Ps) > 1 else 0.0


def decompose_vector(family, x, tol=DEFAULT_TOL, mean="algebraic", projections=None,
                     cesaro_tol=None):
    """Split ``x`` into ``T_j``-invariant components.

    Requires ``difference_defect(family, x) <= tol * ||x||`` and every
    ``T_j`` power-bounded. ``projections`` may supply precomputed
    mean ergodic projections (e.g. exact orbit averages); otherwise they are
    computed with ``mean``.
    """
    if not isinstance(family, OperatorFamily):
        family = OperatorFamily(family)
    tol = check_tol(tol)
    x = check_vector(x, family.dim)
    nx = float(np.linalg.norm(x))
    dd = difference_defect(family, x)
    if dd > tol * nx:
        raise PreconditionError(
            f"difference equation violated: defect {dd:.3g} > {tol:.3g} * ||x||", defect=dd)

    reports = []
    if projections is None:
        kind, _ = parse_mean(mean)
        Ps = []
        for j, T in enumerate(family.ops):
            if kind == "algebraic":
                v = power_bounded_verdict(T)
                if not v.bounded:
                    raise HypothesisViolationError(
                        f"T_{j + 1} is not power-bounded (r = {v.spectral_radius:.6g}, "
                        f"peripheral defect {v.peripheral_defect})")
            kw = {} if cesaro_tol is None else {"cesaro_tol": cesaro_tol}
            rep = mean_ergodic_projection(T, method=mean, **kw)
            reports.append(rep)
            Ps.append(rep.P)
        method = "inclusion_exclusion" if kind == "algebraic" else f"inclusion_exclusion/{reports[0].method}"
    else:
        Ps = [np.asarray(P, dtype=np.complex128) for P in projections]
        if len(Ps) != family.n:
            raise InvalidInputError("need one projection per operator")
        method = "inclusion_exclusion"

    pscale = max([opnorm(P) for P in Ps] + [1.0])
    pcomm = _projection_commutation(Ps)
    if pcomm > 1e-10 * pscale * pscale:
        raise HypothesisViolationError(
            f"mean ergodic projections do not commute (defect {pcomm:.3g})")

    comps = inclusion_exclusion(lambda i, v: Ps[i] @ v, family.n, x)
    total = np.sum(comps, axis=0)
    inv = [float(np.linalg.norm(T @ c - c)) for T, c in zip(family.ops, comps)]
    ppd = x.copy()
    for P in reversed(Ps):
        ppd = P @ ppd - ppd
    return DecompositionResult(
        components=comps,
        sum_residual=float(np.linalg.norm(x - total)),
        invariance_defects=inv,
        method=method,
        tol=tol,
        norm_x=nx,
        difference_defect=dd,
        projection_product_defect=float(np.linalg.norm(ppd)),
        commutation_defect=family.commutation_defect,
        projection_commutation_defect=pcomm,
        projections=reports,
    )


def fixed_space_bases(family, atol=None):
    """Orthonormal bases of ``ker(T_j - I)`` at the projection rank threshold."""
    bases = []
    for T in family.ops:
        a = 1e-9 * (1.0 + opnorm(T)) if atol is None else atol
        bases.append(kernel_basis(T - np.eye(family.dim), tol=0.0, atol=a))
    return bases


def decompose_oracle(family, x, tol=DEFAULT_TOL):
    """Least-squares fit of ``x`` by ``sum_j B_j c_j`` over fixed-space bases.

    Independent of the projection route: a small residual certifies
    ``x in ker(T_1 - I) + ... + ker(T_n - I)``. Components are the
    minimum-norm solution.
    """
    if not isinstance(family, OperatorFamily):
        family = OperatorFamily(family)
    tol = check_tol(tol)
    x = check_vector(x, family.dim)
    bases = fixed_space_bases(family)
    B = np.hstack([S.basis for S in bases])
    if B.shape[1]:
        c, *_ = np.linalg.lstsq(B, x, rcond=None)
    else:
        c = np.zeros(0, dtype=np.complex128)
    comps, k = [], 0
    for S in bases:
        comps.append(S.basis @ c[k:k + S.dim])
        k += S.dim
    total = np.sum(comps, axis=0)
    inv = [float(np.linalg.norm(T @ cj - cj)) for T, cj in zip(family.ops, comps)]
    return DecompositionResult(
        components=comps,
        sum_residual=float(np.linalg.norm(x - total)),
        invariance_defects=inv,
        method="oracle",
        tol=tol,
        norm_x=float(np.linalg.norm(x)),
        difference_defect=difference_defect(family, x),
        commutation_defect=family.commutation_defect,
        details={"kernel_dims": [S.dim for S in bases]},
    )


# --- grid functions on Z_N ------------------------------------------------


@dataclass
class GridFunction:
    """Samples of ``f: Z_N -> C`` with shift generators ``a_1, ..., a_n``."""

    N: int
    values: np.ndarray
    shifts: list

    def __post_init__(self):
        self.N = int(self.N)
        if self.N < 1:
            raise InvalidInputError("N must be positive")
        self.values = check_vector(self.values, self.N, name="values")
        self.shifts = [int(a) % self.N for a in self.shifts]
        if not self.shifts:
            raise InvalidInputError("at least one shift is required")

    @property
    def n(self):
        return len(self.shifts)

    def subgroup(self, j):
        """Elements of the cyclic subgroup generated by ``a_j`` (0-based j)."""
        step = gcd(self.shifts[j], self.N)
        return np.arange(0, self.N, step)


def shift_matrix(N, a):
    """Koopman matrix of ``x -> x + a`` on ``Z_N``: ``(S f)(x) = f(x + a)``."""
    S = np.zeros((N, N))
    idx = np.arange(N)
    S[idx, (idx + a) % N] = 1.0
    return S


def orbit_average_matrix(N, a):
    """Matrix of the exact average over the subgroup generated by ``a``."""
    step = gcd(int(a) % N, N)
    H = np.arange(0, N, step)
    P = np.zeros((N, N))
    idx = np.arange(N)
    for s in H:
        P[idx, (idx + s) % N] += 1.0 / len(H)
    return P


def shift_family(f):
    return OperatorFamily([shift_matrix(f.N, a) for a in f.shifts])


def _orbit_mean(g, N, a):
    step = gcd(a, N)
    return np.tile(g.reshape(N // step, step).mean(axis=0), N // step)


def _cesaro_mean(g, a, M):
    acc = np.zeros_like(g)
    for k in range(M):
        acc = acc + np.roll(g, -k * a)
    return acc / M


def grid_difference_defect(f, exhaustive=True):
    """``max_x max_{s_j in <a_j>} |sum_eps (-1)^|eps| f(x + sum_j eps_j s_j)|``.

    The exhaustive search costs ``N * prod_j |<a_j>|`` evaluations. With
    ``exhaustive=False`` only the generators ``s_j = a_j`` are tried; both
    vanish together.
    """
    N, g = f.N, f.values
    groups = [f.subgroup(j) if exhaustive else np.array([f.shifts[j]]) for j in range(f.n)]
    x = np.arange(N)

    def rec(h, j):
        H = groups[j]
        if j == f.n - 1:
            return float(np.max(np.abs(h[(x[None, :] + H[:, None]) % N] - h[None, :])))
        return max(rec(np.roll(h, -s) - h, j + 1) for s in H)

    return rec(g, 0)


def _grid_invariance(f, comps):
    return [float(np.linalg.norm(np.roll(c, -a) - c)) for c, a in zip(comps, f.shifts)]


def decompose_grid_function(f, tol=DEFAULT_TOL, mean="exact", check=True):
    """Split ``f`` into ``a_j``-periodic parts on ``Z_N``.

    ``mean="exact"`` averages over the finite subgroup ``<a_j>`` (an
    invariant mean); ``mean="cesaro:M"`` averages ``f(x + k a_j)`` over
    ``k < M`` and carries no exactness claim.
    """
    tol = check_tol(tol)
    dd = grid_difference_defect(f) if check else float("nan")
    if check and dd > tol:
        raise PreconditionError(
            f"difference equation violated on Z_{f.N}: defect {dd:.3g} > {tol:.3g}", defect=dd)
    kind, M = parse_mean(mean)
    if kind == "algebraic":
        apply = lambda i, v: _orbit_mean(v, f.N, f.shifts[i])
        method = "inclusion_exclusion"
    else:
        apply = lambda i, v: _cesaro_mean(v, f.shifts[i], M)
        method = f"inclusion_exclusion/cesaro:{M}"
    comps = inclusion_exclusion(apply, f.n, f.values)
    if kind == "algebraic":
        # each component is a_j-periodic up to round-off; one more orbit mean
        # makes it a tile, so periodic bit for bit
        comps = [_orbit_mean(c, f.N, a) for c, a in zip(comps, f.shifts)]
    total = np.sum(comps, axis=0)
    return DecompositionResult(
        components=comps,
        sum_residual=float(np.linalg.norm(f.values - total)),
        invariance_defects=_grid_invariance(f, comps),
        method=method,
        tol=tol,
        norm_x=float(np.linalg.norm(f.values)),
        difference_defect=dd,
    )


def modulus_of_continuity(g, delta):
    """``max |g(x) - g(y)|`` over cyclic distance ``1 <= d(x, y) <= delta``."""
    g = np.asarray(g)
    N = len(g)
    best = 0.0
    for d in range(1, min(int(delta), N - 1) + 1):
        best = max(best, float(np.max(np.abs(np.roll(g, -d) - g))))
    return best


def continuity_defect(f, result, delta):
    """``max_j omega_j(delta) / omega_f(delta)``; bounded by ``2^n``."""
    wf = modulus_of_continuity(f.values, delta)
    wj = [modulus_of_continuity(c, delta) for c in result.components]
    top = max(wj) if wj else 0.0
    if wf == 0.0:
        return 0.0 if top == 0.0 else float("inf")
    return top / wf

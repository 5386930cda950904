"""Mean ergodic machinery for single operators in finite dimension.

In finite dimension a matrix is mean ergodic as soon as it is power-bounded,
and its mean ergodic projection is the projection onto ``ker(T - I)`` along
``ran(T - I)``. Two independent routes to that projection are provided:
the algebraic splitting and Cesaro averages of the powers.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._validation import check_family, check_matrix, check_tol
from .exceptions import (DivergenceError, HypothesisViolationError, InvalidInputError,
                         NumericalFailureError, SplittingNotDirectError)
from .linalg import (EPS, Subspace, kernel_and_range, kernel_basis, opnorm, range_basis,
                     spectrum, subspace_distance)

CESARO_TOL = 1e-6
DEFAULT_CESARO_N = 4096
SPLIT_TOL = 1e-8


def default_proj_tol(T):
    return 1e-9 * (1.0 + opnorm(T))


@dataclass
class PowerBoundVerdict:
    bounded: bool
    spectral_radius: float
    peripheral_defect: int
    empirical_bound: float
    cluster_tol: float = 0.0
    empirical_norms: dict = field(default_factory=dict, repr=False)


def power_bounded_verdict(T, cluster_tol=None):
    """Decide ``sup_N ||T^N|| < inf`` from the spectrum.

    ``T`` is power-bounded iff ``r(T) <= 1`` and every eigenvalue on the unit
    circle is semisimple. Peripheral defect counts Jordan excess over the
    unit-circle clusters only; defective eigenvalues strictly inside the disc
    do not obstruct boundedness. ``empirical_bound`` is ``max ||T^N||`` over
    ``N = 1, 2, 4, ..., 1024``.
    """
    T = check_matrix(T)
    if cluster_tol is None:
        cluster_tol = 1e-8 * max(1.0, opnorm(T))
    rep = spectrum(T, cluster_tol=cluster_tol)
    r = rep.spectral_radius
    on_circle = np.abs(rep.eigenvalues) >= 1.0 - cluster_tol
    defect = rep.defect(on_circle)

    norms = {}
    P = T.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(11):
            if k:
                P = P @ P
            norms[2 ** k] = opnorm(P) if np.all(np.isfinite(P)) else np.inf
    return PowerBoundVerdict(
        bounded=bool(r <= 1.0 + cluster_tol and defect == 0),
        spectral_radius=r,
        peripheral_defect=defect,
        empirical_bound=max(norms.values()),
        cluster_tol=cluster_tol,
        empirical_norms=norms,
    )


@dataclass
class ProjectionReport:
    P: np.ndarray
    idempotency_defect: float
    zero_element_defect: float
    range: Subspace
    method: str
    proj_tol: float
    splitting_condition: float = float("nan")
    cesaro_certificate: float = float("nan")
    N: int = 0

    @property
    def ok(self):
        return (self.idempotency_defect <= self.proj_tol
                and self.zero_element_defect <= self.proj_tol)

    def to_json(self):
        P = self.P
        return {
            "method": self.method,
            "P": {"dim": int(P.shape[0]), "re": P.real.tolist(), "im": P.imag.tolist()},
            "idempotency_defect": self.idempotency_defect,
            "zero_element_defect": self.zero_element_defect,
            "range_dim": int(self.range.dim),
            "proj_tol": self.proj_tol,
            "splitting_condition": _finite_or_none(self.splitting_condition),
            "cesaro_certificate": _finite_or_none(self.cesaro_certificate),
            "N": self.N,
        }


def _finite_or_none(v):
    return float(v) if np.isfinite(v) else None


def parse_mean(method):
    """Parse ``"algebraic"``/``"exact"`` or ``"cesaro"``/``"cesaro:N"``."""
    if isinstance(method, tuple):
        return method
    m = str(method).strip().lower()
    if m in ("algebraic", "exact"):
        return ("algebraic", 0)
    if m == "cesaro":
        return ("cesaro", DEFAULT_CESARO_N)
    if m.startswith("cesaro:"):
        try:
            N = int(m.split(":", 1)[1])
        except ValueError:
            raise InvalidInputError(f"bad Cesaro window in {method!r}") from None
        if N < 1:
            raise InvalidInputError("Cesaro window must be positive")
        return ("cesaro", N)
    raise InvalidInputError(f"unknown mean method {method!r}")


def cesaro_average(T, N):
    """``(1/N) * sum_{k<N} T^k``, summed in increasing k."""
    T = check_matrix(T)
    n = T.shape[0]
    S = np.zeros((n, n), dtype=np.complex128)
    Tk = np.eye(n, dtype=np.complex128)
    for _ in range(N):
        S += Tk
        Tk = Tk @ T
    return S / N


def _cesaro_pair(T, N):
    n = T.shape[0]
    S = np.zeros((n, n), dtype=np.complex128)
    Tk = np.eye(n, dtype=np.complex128)
    A_N = None
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(2 * N):
            if k == N:
                A_N = S / N
            S += Tk
            Tk = Tk @ T
    return A_N, S / (2 * N)


def mean_ergodic_projection(T, method="algebraic", tol=None, proj_tol=None,
                            cesaro_tol=CESARO_TOL, N=None):
    """Mean ergodic projection of ``T`` as a :class:`ProjectionReport`.

    ``method="algebraic"`` projects onto ``ker(T - I)`` along ``ran(T - I)``;
    ``tol`` is the absolute rank threshold for ``T - I`` (default
    ``proj_tol``). ``method="cesaro"`` (or ``"cesaro:N"``) returns ``A_N`` and
    certifies it by ``||A_N - A_2N||``.
    """
    T = check_matrix(T)
    n = T.shape[0]
    kind, window = parse_mean(method)
    if N is not None:
        window = int(N)
    proj_tol = default_proj_tol(T) if proj_tol is None else check_tol(proj_tol)
    I = np.eye(n)

    if kind == "algebraic":
        atol = proj_tol if tol is None else check_tol(tol)
        K, R = kernel_and_range(T - I, tol=0.0, atol=atol)
        k = K.dim
        W = np.hstack([K.basis, R.basis])
        cond = float(np.linalg.svd(W, compute_uv=False)[-1]) if n else 1.0
        if cond <= SPLIT_TOL:
            raise SplittingNotDirectError(
                f"ker(T-I) and ran(T-I) intersect (smallest singular value {cond:.3g}); "
                "T is not power-bounded")
        C = np.linalg.solve(W, np.eye(n))
        P = K.basis @ C[:k]
        cert = float("nan")
    else:
        if window < 1:
            raise InvalidInputError("Cesaro window must be positive")
        P, A2 = _cesaro_pair(T, window)
        cert = opnorm(A2 - P) if np.all(np.isfinite(A2)) else np.inf
        if not cert <= cesaro_tol:
            raise DivergenceError(
                f"Cesaro averages not settled: ||A_N - A_2N|| = {cert:.3g} > {cesaro_tol:.3g}",
                certificate=cert)
        cond = float("nan")

    idem = opnorm(P @ P - P)
    zero = max(opnorm(P @ T - P), opnorm(T @ P - P))
    rng = range_basis(P, tol=0.0, atol=0.5) if n else Subspace.zero(n)
    return ProjectionReport(
        P=P, idempotency_defect=idem, zero_element_defect=zero, range=rng,
        method="algebraic" if kind == "algebraic" else f"cesaro:{window}",
        proj_tol=proj_tol, splitting_condition=cond, cesaro_certificate=cert,
        N=window if kind == "cesaro" else 0)


def zero_element_check(P, family, tol):
    """``max_T max(||PT - P||, ||TP - P||)`` and whether it is within ``tol``."""
    P = check_matrix(P, "P")
    tol = check_tol(tol)
    ops = check_family(family) if len(family) else []
    defect = 0.0
    for T in ops:
        if T.shape != P.shape:
            raise InvalidInputError("family member and P have different shapes")
        defect = max(defect, opnorm(P @ T - P), opnorm(T @ P - P))
    return defect, defect <= tol


@dataclass
class CollapseResult:
    dim_ker_pow: int
    dim_ker: int
    collapsed: bool
    distance: float


def kernel_power_collapse(T, n, tol=1e-8):
    """Compare ``ker(T - I)^n`` with ``ker(T - I)``.

    Both kernels use relative rank threshold ``tol``; they collapse when the
    dimensions agree and the projector distance is at most ``tol``.
    """
    T = check_matrix(T)
    n = int(n)
    if n < 1:
        raise InvalidInputError("power must be >= 1")
    tol = check_tol(tol)
    M = T - np.eye(T.shape[0])
    K1 = kernel_basis(M, tol=tol)
    Kn = kernel_basis(np.linalg.matrix_power(M, n), tol=tol)
    dist = subspace_distance(Kn, K1)
    return CollapseResult(Kn.dim, K1.dim, bool(Kn.dim == K1.dim and dist <= tol), dist)


@dataclass
class JdlgSplit:
    """Reversible (unimodular) and stable parts of a power-bounded operator.

    ``decay_bound(N)`` bounds ``||T^N y|| / ||y||`` for ``y`` in ``stable``.
    It is ``kappa * (stable_radius + margin)^N`` plus ``floor``, the part of a
    computed stable vector that round-off leaks into the reversible space and
    that therefore never decays.
    """

    reversible: Subspace
    stable: Subspace
    stable_radius: float
    kappa: float
    margin: float
    independence: float
    floor: float = 0.0

    def decay_bound(self, N):
        if self.stable.dim == 0:
            return 0.0
        return self.kappa * (self.stable_radius + self.margin) ** N + self.floor


def _schur_invariant(T, select):
    try:
        S, Z, sdim = scipy.linalg.schur(T, output="complex", sort=select)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailureError("Schur reordering failed", {"error": str(exc)}) from None
    return S[:sdim, :sdim], Z[:, :sdim]


def jdlg_split(T, peripheral_tol=None, margin=0.05, samples=2048):
    """Split ``C^n`` into the unimodular eigenspace and the decaying part.

    Both parts come from reordered complex Schur forms. ``kappa`` is the
    Cauchy-integral constant ``r * max_{|z|=r} ||(z - B)^{-1}||`` for the
    compression ``B`` of ``T`` to the stable part at radius
    ``r = stable_radius + margin``, so that ``||B^N|| <= kappa * r^N``.
    """
    T = check_matrix(T)
    n = T.shape[0]
    verdict = power_bounded_verdict(T)
    if not verdict.bounded:
        raise HypothesisViolationError(
            f"T is not power-bounded (r = {verdict.spectral_radius:.6g}, "
            f"peripheral defect {verdict.peripheral_defect})")
    ptol = verdict.cluster_tol if peripheral_tol is None else check_tol(peripheral_tol)
    _, Zr = _schur_invariant(T, lambda z: abs(z) >= 1.0 - ptol)
    B, Zs = _schur_invariant(T, lambda z: abs(z) < 1.0 - ptol)
    if Zr.shape[1] + Zs.shape[1] != n:
        raise NumericalFailureError("Schur split dimensions do not add up",
                                    {"reversible": Zr.shape[1], "stable": Zs.shape[1]})
    if B.shape[0]:
        rho = float(np.max(np.abs(np.diag(B))))
        r = rho + margin
        z = r * np.exp(2j * np.pi * np.arange(samples) / samples)
        eye = np.eye(B.shape[0])
        smin = min(np.linalg.svd(zk * eye - B, compute_uv=False)[-1] for zk in z)
        kappa = r / smin
    else:
        rho, kappa = 0.0, 0.0
    W = np.hstack([Zr, Zs])
    independence = float(np.linalg.svd(W, compute_uv=False)[-1]) if n else 1.0
    floor = 10 * n * EPS * verdict.empirical_bound / max(independence, EPS)
    return JdlgSplit(Subspace(Zr), Subspace(Zs), rho, float(kappa), margin, independence,
                     float(floor))

"""Dense linear-algebra substrate.

Kernels, subspace arithmetic, clustered spectra and matrix exponentials.
Every subspace is carried as an orthonormal column basis so that membership
and distance questions reduce to orthogonal projections.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._validation import check_matrix, check_tol, check_vector
from .exceptions import InvalidInputError, NumericalFailureError, ScaleLimitError

EPS = np.finfo(np.float64).eps

#: Relative accuracy promised by :func:`matrix_exp` for well-conditioned
#: (e.g. normal) generators with moderate ``|t| * ||A||``.
EXP_TOL = 1e-12

#: Default relative rank threshold for :func:`subspace_sum`.
SUM_TOL = 1e-10


def opnorm(M):
    """Spectral norm (largest singular value)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


@dataclass
class Subspace:
    """Subspace of ``C^ambient_dim`` given by an orthonormal column basis."""

    basis: np.ndarray
    tol: float = 0.0
    residual: float = 0.0

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.complex128)
        if B.ndim != 2:
            raise InvalidInputError(f"basis must be 2-d, got shape {B.shape}")
        if B.shape[1] > B.shape[0]:
            raise InvalidInputError("more basis columns than the ambient dimension")
        self.basis = B

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.conj().T

    def orthonormality_defect(self):
        k = self.dim
        if k == 0:
            return 0.0
        return opnorm(self.basis.conj().T @ self.basis - np.eye(k))

    @classmethod
    def full(cls, n):
        return cls(np.eye(n, dtype=np.complex128))

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, 0), dtype=np.complex128))


@dataclass
class SpectrumReport:
    """Eigenvalues grouped into clusters with multiplicities.

    ``eigenvalues[i]`` is the mean of the i-th cluster; ``raw`` keeps the
    unclustered eigenvalues as returned by LAPACK.
    """

    eigenvalues: np.ndarray
    algebraic_multiplicities: list
    geometric_multiplicities: list
    residual: float
    raw: np.ndarray = field(repr=False, default=None)
    cluster_tol: float = 0.0

    @property
    def dim(self):
        return int(sum(self.algebraic_multiplicities))

    @property
    def spectral_radius(self):
        if len(self.eigenvalues) == 0:
            return 0.0
        return float(np.max(np.abs(self.eigenvalues)))

    def defect(self, mask=None):
        """Sum of (algebraic - geometric) over the selected clusters."""
        alg = np.asarray(self.algebraic_multiplicities)
        geo = np.asarray(self.geometric_multiplicities)
        if mask is None:
            mask = np.ones(len(alg), dtype=bool)
        return int(np.sum((alg - geo)[mask]))


def _svd(M):
    try:
        return np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("SVD did not converge", {"error": str(exc)}) from None


def kernel_basis(M, tol=None, atol=0.0):
    """Orthonormal basis of the numerical null space of ``M``.

    Singular values ``<= max(tol * sigma_max, atol)`` count as zero. ``tol``
    defaults to ``dim * eps``. The achieved residual ``||M B||`` is stored on
    the returned subspace.
    """
    M = check_matrix(M)
    n = M.shape[0]
    tol = n * EPS if tol is None else check_tol(tol)
    atol = check_tol(atol, "atol")
    _, s, vh = _svd(M)
    threshold = max(tol * s[0], atol)
    rank = int(np.sum(s > threshold))
    B = vh[rank:].conj().T
    residual = opnorm(M @ B) if B.shape[1] else 0.0
    return Subspace(B, tol=tol, residual=residual)


def range_basis(M, tol=None, atol=0.0):
    """Orthonormal basis of the numerical column space of ``M``."""
    M = check_matrix(M)
    n = M.shape[0]
    tol = n * EPS if tol is None else check_tol(tol)
    u, s, _ = _svd(M)
    rank = int(np.sum(s > max(tol * s[0], atol)))
    return Subspace(u[:, :rank], tol=tol)


def kernel_and_range(M, tol=None, atol=0.0):
    """Kernel and range of ``M`` from one SVD, so their dimensions add to n."""
    M = check_matrix(M)
    n = M.shape[0]
    tol = n * EPS if tol is None else check_tol(tol)
    u, s, vh = _svd(M)
    rank = int(np.sum(s > max(tol * s[0], atol)))
    K = vh[rank:].conj().T
    residual = opnorm(M @ K) if K.shape[1] else 0.0
    return Subspace(K, tol=tol, residual=residual), Subspace(u[:, :rank], tol=tol)


def subspace_sum(parts, tol=None):
    """Orthonormal basis of ``S_1 + ... + S_m`` (not necessarily direct)."""
    parts = list(parts)
    if not parts:
        raise InvalidInputError("subspace_sum needs at least one part")
    n = parts[0].ambient_dim
    for p in parts:
        if p.ambient_dim != n:
            raise InvalidInputError(
                f"ambient dimensions differ: {p.ambient_dim} != {n}")
    tol = SUM_TOL if tol is None else check_tol(tol)
    C = np.hstack([p.basis for p in parts])
    if C.shape[1] == 0:
        return Subspace.zero(n)
    u, s, _ = np.linalg.svd(C, full_matrices=False)
    rank = int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
    return Subspace(u[:, :rank], tol=tol)


def subspace_membership(S, x, tol):
    """Return ``(member, residual)`` with residual ``||x - B B^H x||``."""
    x = check_vector(x, S.ambient_dim)
    tol = check_tol(tol)
    B = S.basis
    r = x - B @ (B.conj().T @ x)
    residual = float(np.linalg.norm(r))
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return True, 0.0
    return residual <= tol * nx, residual


def subspace_distance(S1, S2):
    """Spectral distance of orthogonal projectors; 1 when dimensions differ."""
    if S1.ambient_dim != S2.ambient_dim:
        raise InvalidInputError("ambient dimensions differ")
    if S1.dim != S2.dim:
        return 1.0
    if S1.dim == 0:
        return 0.0
    return opnorm(S1.projector() - S2.projector())


def _cluster(values, tol):
    """Single-linkage clusters of complex values at distance ``<= tol``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def spectrum(M, cluster_tol=None, geometric_tol=None):
    """Eigenvalues of ``M`` grouped into clusters.

    Eigenvalues closer than ``cluster_tol`` (default ``1e-8 * ||M||``) are
    merged. The geometric multiplicity of a cluster is the numerical nullity
    of ``M - mean * I`` at threshold ``geometric_tol`` (default
    ``cluster_tol``), capped at the cluster size.
    """
    M = check_matrix(M)
    n = M.shape[0]
    nrm = opnorm(M)
    if cluster_tol is None:
        cluster_tol = 1e-8 * nrm
    cluster_tol = check_tol(cluster_tol, "cluster_tol")
    geometric_tol = cluster_tol if geometric_tol is None else check_tol(geometric_tol)
    try:
        w, v = scipy.linalg.eig(M)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailureError(
            "eigenvalue iteration did not converge",
            {"error": str(exc), "dim": n, "norm": nrm}) from None
    if not np.all(np.isfinite(w)):
        raise NumericalFailureError("eigensolver returned non-finite values", {"dim": n})
    residual = float(np.max(np.linalg.norm(M @ v - v * w, axis=0))) if n else 0.0

    groups = _cluster(w, cluster_tol)
    reps = np.array([np.mean(w[g]) for g in groups], dtype=np.complex128)
    alg = [len(g) for g in groups]
    geo = []
    for lam, a in zip(reps, alg):
        s = np.linalg.svd(M - lam * np.eye(n), compute_uv=False)
        nullity = int(np.sum(s <= geometric_tol))
        geo.append(max(1, min(a, nullity)))
    order = sorted(range(len(reps)),
                   key=lambda i: (-round(abs(reps[i]), 12), reps[i].real, reps[i].imag))
    return SpectrumReport(
        eigenvalues=reps[order],
        algebraic_multiplicities=[alg[i] for i in order],
        geometric_multiplicities=[geo[i] for i in order],
        residual=residual,
        raw=w,
        cluster_tol=cluster_tol,
    )


def matrix_exp(A, t=1.0):
    """``exp(t A)`` by scaling and squaring with Pade approximants.

    Raises :class:`ScaleLimitError` when the result overflows.
    """
    A = check_matrix(A, "generator")
    t = float(t)
    if not np.isfinite(t):
        raise InvalidInputError(f"time must be finite, got {t}")
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(t * A)
    if not np.all(np.isfinite(E)):
        raise ScaleLimitError(
            f"exp(tA) overflows double precision (|t|*||A|| = {abs(t) * opnorm(A):.3g})",
            {"t": t, "norm": opnorm(A)})
    return np.asarray(E, dtype=np.complex128)

"""Random generators for the property suites."""
import numpy as np


def random_unitary(n, rng):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def unimodular_away_from_one(rng, gap=0.1, size=None):
    # |1 - e^{i theta}| = 2 sin(theta/2) >= gap
    lo = 2 * np.arcsin(gap / 2)
    return np.exp(1j * rng.uniform(lo, 2 * np.pi - lo, size=size))


def contraction(rng, radius=0.9, size=None):
    return rng.uniform(0, radius, size=size) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=size))


def random_power_bounded(rng, dim, jordan=True, gap=0.05):
    """Unitary conjugate of block-diag(unimodular/contractive diagonal, contractive Jordan blocks)."""
    n_jordan = rng.integers(0, dim // 2 + 1) if jordan else 0
    d = dim - 2 * n_jordan
    kinds = rng.integers(0, 3, size=d)
    diag = np.where(kinds == 0, 1.0 + 0j,
                    np.where(kinds == 1, unimodular_away_from_one(rng, gap, d),
                             contraction(rng, 0.95, d)))
    blocks = [np.diag(diag)] if d else []
    for _ in range(n_jordan):
        lam = contraction(rng, 0.9)
        blocks.append(np.array([[lam, rng.uniform(0.1, 1.0)], [0, lam]]))
    D = _blockdiag(blocks)
    Q = random_unitary(dim, rng)
    return Q @ D @ Q.conj().T


def _blockdiag(blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


def random_commuting_family(rng, n_ops, dim, jordan=False, p_fixed=0.35, gap=0.1):
    """Commuting power-bounded family sharing one unitary frame.

    Diagonal coordinates get eigenvalue 1 with probability ``p_fixed`` in each
    operator, otherwise a unimodular value at distance >= gap from 1 or a
    contraction. Optional 2x2 blocks ``lam_j I + c_j N`` (shared nilpotent N,
    |lam_j| <= 0.8) commute across the family.
    """
    n_jordan = int(rng.integers(1, dim // 4 + 1)) if jordan and dim >= 4 else 0
    d = dim - 2 * n_jordan
    Q = random_unitary(dim, rng)
    ops = []
    for _ in range(n_ops):
        u = rng.uniform(size=d)
        diag = np.where(u < p_fixed, 1.0 + 0j,
                        np.where(u < 0.75, unimodular_away_from_one(rng, gap, d),
                                 contraction(rng, 0.9, d)))
        blocks = [np.diag(diag)] if d else []
        for _ in range(n_jordan):
            lam = contraction(rng, 0.8)
            blocks.append(np.array([[lam, rng.uniform(0.1, 1.0)], [0, lam]]))
        ops.append(Q @ _blockdiag(blocks) @ Q.conj().T)
    return ops


def product_kernel_vector(ops, rng, rel_tol=1e-9):
    """Random vector in the numerical kernel of (T_1 - I)...(T_n - I)."""
    n = ops[0].shape[0]
    M = np.eye(n)
    for T in ops:
        M = M @ (T - np.eye(n))
    _, s, vh = np.linalg.svd(M)
    rank = int(np.sum(s > rel_tol * max(s[0], 1e-300)))
    B = vh[rank:].conj().T
    c = rng.normal(size=B.shape[1]) + 1j * rng.normal(size=B.shape[1])
    return B @ c


def periodic_generator(rng, dim, alpha, kmax=3, spread=0.3):
    """A = V diag(2 pi i k_j / alpha) V^{-1} with a well-conditioned V."""
    k = rng.integers(-kmax, kmax + 1, size=dim)
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    V = random_unitary(dim, rng) @ (np.eye(dim) + spread * G / np.linalg.norm(G, 2))
    return V @ np.diag(2j * np.pi * k / alpha) @ np.linalg.inv(V), k


def random_generator(rng, dim, norm=2.0):
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return A * (norm * rng.uniform(0.2, 1.0) / np.linalg.norm(A, 2))

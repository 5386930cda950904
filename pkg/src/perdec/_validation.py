"""Input validation helpers.

These play the role of :func:`sklearn.utils.check_array` for complex data,
which scikit-learn itself refuses.
"""
import numpy as np

from .exceptions import InvalidInputError


def check_matrix(M, name="matrix"):
    """Return ``M`` as a finite square complex128 array."""
    try:
        A = np.asarray(M, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: cannot convert to a complex array ({exc})") from None
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"{name}: expected a square matrix, got shape {A.shape}")
    if A.shape[0] == 0:
        raise InvalidInputError(f"{name}: dimension must be positive")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name}: non-finite entries")
    return A


def check_vector(x, dim=None, name="vector"):
    try:
        v = np.asarray(x, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: cannot convert to a complex array ({exc})") from None
    if v.ndim != 1:
        raise InvalidInputError(f"{name}: expected a 1-d array, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise InvalidInputError(f"{name}: length {v.shape[0]} does not match dimension {dim}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name}: non-finite entries")
    return v


def check_tol(tol, name="tol"):
    tol = float(tol)
    if not (tol >= 0.0) or not np.isfinite(tol):
        raise InvalidInputError(f"{name} must be a finite nonnegative number, got {tol}")
    return tol


def check_family(ops):
    """Validate a sequence of equally sized square matrices."""
    mats = [check_matrix(T, name=f"ops[{j}]") for j, T in enumerate(ops)]
    if not mats:
        raise InvalidInputError("operator family must contain at least one matrix")
    dim = mats[0].shape[0]
    for j, T in enumerate(mats):
        if T.shape[0] != dim:
            raise InvalidInputError(f"ops[{j}] has dimension {T.shape[0]}, expected {dim}")
    return mats

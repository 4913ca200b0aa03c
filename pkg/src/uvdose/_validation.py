"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DimensionMismatch


def check_points(X, name="points", allow_single=True):
    """Return ``X`` as a finite float array of shape (n, 3).

    A single 3-vector is promoted to shape (1, 3) when ``allow_single``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and allow_single:
        X = X.reshape(1, -1)
    X = check_array(X, ensure_2d=True, dtype=float, ensure_all_finite=True,
                    input_name=name)
    if X.shape[1] != 3:
        raise DimensionMismatch(f"{name} must have 3 columns, got {X.shape[1]}")
    return X


def check_unit_vectors(N, name="normals", tol=1e-6):
    N = check_points(N, name=name)
    norms = np.linalg.norm(N, axis=1)
    if np.any(norms == 0):
        raise ValueError(f"{name} contains zero vectors")
    if np.any(np.abs(norms - 1.0) > tol):
        N = N / norms[:, None]
    return N


def check_matching_length(*arrays, names=None):
    lengths = {len(a) for a in arrays}
    if len(lengths) > 1:
        names = names or [f"arg{i}" for i in range(len(arrays))]
        detail = ", ".join(f"{n}={len(a)}" for n, a in zip(names, arrays))
        raise DimensionMismatch(f"inconsistent lengths: {detail}")


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value

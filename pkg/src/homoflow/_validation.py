"""Small input-validation helpers shared by the estimator front ends."""

import numpy as np
from sklearn.utils.validation import check_array

from .errors import DomainError


def as_float_array(X, *, ensure_2d=False, n_columns=None):
    """Finite float64 array; 1-d input is accepted unless ``ensure_2d``."""
    arr = np.asarray(X, dtype=float)
    if not ensure_2d and arr.ndim <= 1:
        arr = np.atleast_1d(arr)
        if not np.all(np.isfinite(arr)):
            raise ValueError("input contains NaN or infinity")
        return arr
    arr = check_array(arr, dtype=np.float64, ensure_2d=True)
    if n_columns is not None and arr.shape[1] != n_columns:
        raise ValueError(f"expected {n_columns} columns, got {arr.shape[1]}")
    return arr


def require(cond, message, exc=DomainError):
    if not cond:
        raise exc(message)

"""Input checks shared by the estimators and the functional API.

``sklearn.utils.check_array`` rejects complex input, so the complex-aware
equivalents live here.
"""
import numbers

import numpy as np


def check_signal(z, name="z", allow_zero=True):
    """Return ``z`` as a finite 1-D complex128 array."""
    arr = np.asarray(z)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    if not allow_zero and not np.any(arr):
        raise ValueError(f"{name} must be nonzero")
    return arr


def check_matrix(M, name="M", square=False):
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_measurements(A, y=None):
    """Validate a stack of ``m`` square matrices and (optionally) ``m`` measurements.

    Returns ``(A, y)`` with ``A`` of shape ``(m, n, n)`` complex128.
    """
    A = np.asarray(A)
    if A.ndim == 2:
        A = A[np.newaxis]
    if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"A must have shape (m, n, n), got {A.shape}")
    A = A.astype(np.complex128, copy=False)
    if y is None:
        return A, None
    y = np.atleast_1d(np.asarray(y)).astype(np.complex128, copy=False)
    if y.shape != (A.shape[0],):
        raise ValueError(
            f"y must have shape ({A.shape[0]},) to match A, got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains NaN or Inf")
    return A, y


def check_same_length(a, b, names=("z", "x")):
    if a.shape != b.shape:
        raise ValueError(
            f"{names[0]} and {names[1]} have incompatible shapes {a.shape} and {b.shape}")


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    if (strict and value <= 0) or (not strict and value < 0):
        raise ValueError(f"{name} must be {'positive' if strict else 'nonnegative'}, got {value}")
    return float(value)


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)

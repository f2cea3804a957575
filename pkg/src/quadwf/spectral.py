"""Spectral initialization from ``S = (1/m) sum conj(y_i) A_i``.

``E[S] = 2 x x^H``, so the leading right singular vector of ``S`` points
along ``x`` up to a global phase. The scale comes either from a known norm
or from ``R = (1/2m) sum |y_i|^2``, whose expectation is ``||x||^4``.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_count, check_matrix, check_measurements, check_positive
from .linalg import DegenerateMatrixError, jacobi_svd, leading_singular_pair

INIT_METHODS = ("power", "svd", "jacobi")


def as_arrays(ensemble, y=None):
    """Accept a MeasurementEnsemble or an ``(A, y)`` pair; return validated arrays."""
    if y is None and hasattr(ensemble, "matrices"):
        return ensemble.matrices, ensemble.measurements
    if y is None:
        raise ValueError("measurements y are required when A is passed as an array")
    return check_measurements(ensemble, y)


def build_S(ensemble, y=None):
    A, y = as_arrays(ensemble, y)
    return np.tensordot(np.conj(y), A, axes=1) / A.shape[0]


def estimate_norm4(ensemble, y=None):
    """Estimate ``||x||^4`` as ``(1/2m) sum |y_i|^2``."""
    _, y = as_arrays(ensemble, y)
    return float(np.vdot(y, y).real / (2.0 * y.shape[0]))


@dataclass
class InitResult:
    z0: np.ndarray
    v0: np.ndarray
    norm4: Optional[float]
    n_iter: int


def leading_right_vector(S, method="power", power_iters=10, power_tol=None):
    """Return ``(v0, n_iter)`` for the leading right singular vector of ``S``."""
    if method == "power":
        pair = leading_singular_pair(S, power_iters, tol=power_tol)
        return pair.v, pair.n_iter
    if method == "svd":
        _, _, Vh = np.linalg.svd(S)
    elif method == "jacobi":
        _, _, Vh = jacobi_svd(S)
    else:
        raise ValueError(f"method must be one of {INIT_METHODS}, got {method!r}")
    return Vh[0].conj(), 1


def init_from_spectral_matrix(S, norm4=None, norm=None, method="power",
                              power_iters=10, power_tol=None):
    """Scale the leading right singular vector of ``S``.

    Exactly one of ``norm`` (known ``||x||``) and ``norm4`` (estimated
    ``||x||^4``) must be given.
    """
    S = check_matrix(S, "S", square=True)
    if (norm is None) == (norm4 is None):
        raise ValueError("pass exactly one of norm and norm4")
    if not np.any(S):
        raise DegenerateMatrixError("spectral matrix S is identically zero")
    v0, n_iter = leading_right_vector(S, method, power_iters, power_tol)
    if norm is not None:
        scale = check_positive(norm, "norm")
    else:
        scale = check_positive(norm4, "norm4", strict=False) ** 0.25
    return InitResult(scale * v0, v0, None if norm4 is None else float(norm4), n_iter)


def spectral_initializer(ensemble, y=None, norm=None, power_iters=10, power_tol=None,
                         method="power"):
    """Spectral initializer ``z0``; estimates the norm unless ``norm`` is given."""
    A, y = as_arrays(ensemble, y)
    power_iters = check_count(power_iters, "power_iters")
    S = build_S(A, y)
    norm4 = None if norm is not None else estimate_norm4(A, y)
    return init_from_spectral_matrix(S, norm4=norm4, norm=norm, method=method,
                                     power_iters=power_iters, power_tol=power_tol)


class SpectralInitializer(BaseEstimator):
    """Estimator wrapper around :func:`spectral_initializer`.

    Parameters
    ----------
    power_iters : int, default=10
        Maximum number of power iterations on ``S^H S``.
    power_tol : float or None, default=None
        Early exit once successive power iterates differ by less than this.
    norm : float or None, default=None
        Known signal norm. ``None`` estimates it from the measurements.
    method : {"power", "svd", "jacobi"}, default="power"
        How the leading singular vector is computed.

    Attributes
    ----------
    z0_ : ndarray of shape (n,)
    v0_ : ndarray of shape (n,)
    norm4_ : float or None
    n_iter_ : int
    """

    def __init__(self, power_iters=10, power_tol=None, norm=None, method="power"):
        self.power_iters = power_iters
        self.power_tol = power_tol
        self.norm = norm
        self.method = method

    def fit(self, A, y):
        A, y = check_measurements(A, y)
        res = spectral_initializer(A, y, norm=self.norm, power_iters=self.power_iters,
                                   power_tol=self.power_tol, method=self.method)
        self.z0_ = res.z0
        self.v0_ = res.v0
        self.norm4_ = res.norm4
        self.n_iter_ = res.n_iter
        self.n_features_in_ = A.shape[1]
        return self

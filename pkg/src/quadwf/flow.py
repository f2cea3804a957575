"""Wirtinger flow on ``f(z) = (1/m) sum |z^H A_i z - y_i|^2``."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state

from ._validation import check_count, check_measurements, check_positive, check_signal
from .ensemble import measure
from .linalg import aligned_distance
from .spectral import as_arrays, estimate_norm4, spectral_initializer

TOL_MODES = ("relative", "absolute")


class DivergenceError(FloatingPointError):
    """The loss became non-finite during descent."""

    def __init__(self, iteration):
        super().__init__(f"loss became non-finite at iteration {iteration}")
        self.iteration = iteration


def _check_z(z, A):
    z = check_signal(z)
    if z.shape[0] != A.shape[1]:
        raise ValueError(f"z has length {z.shape[0]} but matrices are {A.shape[1]}x{A.shape[2]}")
    return z


_BLOCK_BYTES = 1 << 21


def _products(z, A):
    """``(A_i z, z^H A_i)`` for every ``i`` in one cache-blocked pass over ``A``."""
    m, n, _ = A.shape
    zc = np.conj(z)
    Az = np.empty((m, n), dtype=np.complex128)
    zA = np.empty((m, n), dtype=np.complex128)
    chunk = max(1, _BLOCK_BYTES // (16 * n * n))
    for s in range(0, m, chunk):
        block = A[s:s + chunk]
        Az[s:s + chunk] = (block.reshape(-1, n) @ z).reshape(-1, n)
        zA[s:s + chunk] = zc @ block
    return Az, zA


def _residuals(z, A, y):
    Az = (A.reshape(-1, A.shape[2]) @ z).reshape(A.shape[0], -1)
    return Az @ np.conj(z) - y


def _loss_and_gradient(z, A, y):
    # grad = (1/m) sum conj(r_i) A_i z + r_i A_i^H z,  with A_i^H z = conj(z^H A_i)
    Az, zA = _products(z, A)
    r = Az @ np.conj(z) - y
    m = A.shape[0]
    grad = (np.conj(r) @ Az + r @ np.conj(zA)) / m
    return float(np.vdot(r, r).real / m), grad


def loss(z, ensemble, y=None):
    A, y = as_arrays(ensemble, y)
    z = _check_z(z, A)
    r = _residuals(z, A, y)
    return float(np.vdot(r, r).real / A.shape[0])


def gradient(z, ensemble, y=None):
    """Wirtinger gradient ``(df/dz)^H``.

    For a real direction ``d`` the directional derivative of ``f`` is
    ``2 Re(d^H gradient(z))``.
    """
    A, y = as_arrays(ensemble, y)
    z = _check_z(z, A)
    return _loss_and_gradient(z, A, y)[1]


@dataclass
class SolverConfig:
    step_scale: float = 0.1
    norm_sq_estimate: Optional[float] = None
    max_iters: int = 2500
    succ_tol: float = 1e-6
    tol_mode: str = "relative"
    record_trajectory: bool = False

    def __post_init__(self):
        check_positive(self.step_scale, "step_scale")
        if self.norm_sq_estimate is not None:
            check_positive(self.norm_sq_estimate, "norm_sq_estimate")
        check_count(self.max_iters, "max_iters")
        check_positive(self.succ_tol, "succ_tol")
        if self.tol_mode not in TOL_MODES:
            raise ValueError(f"tol_mode must be one of {TOL_MODES}, got {self.tol_mode!r}")


@dataclass
class RecoveryResult:
    z_final: np.ndarray
    iters: int
    termination: str
    eta: float
    losses: np.ndarray = field(repr=False)
    steps: np.ndarray = field(repr=False)
    dist_to_truth: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def trajectory(self):
        """``(iteration, loss, successive distance)`` rows, empty unless recorded."""
        it = np.arange(1, len(self.steps) + 1)
        return list(zip(it.tolist(), self.losses.tolist(), self.steps.tolist()))


def wf_run(z0, ensemble, cfg=None, truth=None, y=None):
    """Iterate ``z <- z - eta * grad f(z)`` with ``eta = step_scale / norm_sq_estimate``.

    Stops once the phase-aligned distance between successive iterates, divided
    by ``sqrt(norm_sq_estimate)`` in relative mode, drops below ``succ_tol``,
    or after ``max_iters`` updates. When ``norm_sq_estimate`` is unset it is
    taken as ``sqrt(R)`` from the measurements.
    """
    A, y = as_arrays(ensemble, y)
    cfg = SolverConfig() if cfg is None else cfg
    z = _check_z(z0, A).copy()
    norm_sq = cfg.norm_sq_estimate
    if norm_sq is None:
        norm_sq = np.sqrt(estimate_norm4(A, y))
        if norm_sq == 0:
            raise ValueError("measurements are all zero; cannot set a step size")
    eta = cfg.step_scale / norm_sq
    scale = np.sqrt(norm_sq) if cfg.tol_mode == "relative" else 1.0
    if truth is not None:
        truth = _check_z(truth, A)
        truth_norm = np.linalg.norm(truth)
        dists = [aligned_distance(z, truth).distance / truth_norm]
    losses, steps = [], []
    termination = "max_iters"
    it = 0
    # non-finite values are caught explicitly and raised as DivergenceError
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, cfg.max_iters + 1):
            f, grad = _loss_and_gradient(z, A, y)
            if not np.isfinite(f):
                raise DivergenceError(it)
            z_new = z - eta * grad
            if not np.all(np.isfinite(z_new)):
                raise DivergenceError(it)
            step = aligned_distance(z, z_new).distance / scale
            z = z_new
            if cfg.record_trajectory:
                losses.append(f)
                steps.append(step)
            if truth is not None:
                dists.append(aligned_distance(z, truth).distance / truth_norm)
            if step < cfg.succ_tol:
                termination = "tolerance_met"
                break
    return RecoveryResult(
        z_final=z, iters=it, termination=termination, eta=float(eta),
        losses=np.asarray(losses, dtype=float), steps=np.asarray(steps, dtype=float),
        dist_to_truth=None if truth is None else np.asarray(dists),
    )


class WirtingerFlow(BaseEstimator):
    """Recover ``x`` (up to global phase) from ``y_i = x^H A_i x``.

    Parameters
    ----------
    init : {"spectral", "random"} or array-like, default="spectral"
        Starting point. ``"random"`` draws a complex Gaussian vector scaled to
        the estimated norm.
    power_iters : int, default=10
    step_scale : float, default=0.1
        The step size is ``step_scale / ||x||^2`` with the norm estimated from
        ``y`` unless ``norm`` is given.
    max_iter : int, default=2500
    tol : float, default=1e-6
    tol_mode : {"relative", "absolute"}, default="relative"
    norm : float or None, default=None
        Known signal norm, used for both the initializer and the step size.
    record_trajectory : bool, default=False
    random_state : int, Generator or None
        Only used by ``init="random"``.

    Attributes
    ----------
    coef_ : ndarray of shape (n,)
        Recovered signal.
    init_ : ndarray of shape (n,)
    n_iter_ : int
    termination_ : str
    eta_ : float
    loss_history_, step_history_ : ndarray
        Per-iteration loss and successive distance (empty unless recorded).
    dist_history_ : ndarray or None
        Relative distance to ``x_true`` per iterate, when given to ``fit``.
    """

    def __init__(self, init="spectral", power_iters=10, step_scale=0.1, max_iter=2500,
                 tol=1e-6, tol_mode="relative", norm=None, record_trajectory=False,
                 random_state=None):
        self.init = init
        self.power_iters = power_iters
        self.step_scale = step_scale
        self.max_iter = max_iter
        self.tol = tol
        self.tol_mode = tol_mode
        self.norm = norm
        self.record_trajectory = record_trajectory
        self.random_state = random_state

    def _initial_point(self, A, y):
        n = A.shape[1]
        if isinstance(self.init, str):
            if self.init == "spectral":
                return spectral_initializer(A, y, norm=self.norm,
                                            power_iters=self.power_iters).z0
            if self.init == "random":
                rng = check_random_state(self.random_state)
                z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                scale = self.norm if self.norm is not None else estimate_norm4(A, y) ** 0.25
                return scale * z / np.linalg.norm(z)
            raise ValueError(f"unknown init {self.init!r}")
        return check_signal(self.init, "init")

    def fit(self, A, y, x_true=None):
        A, y = check_measurements(A, y)
        z0 = self._initial_point(A, y)
        norm_sq = None if self.norm is None else float(self.norm) ** 2
        cfg = SolverConfig(step_scale=self.step_scale, norm_sq_estimate=norm_sq,
                           max_iters=self.max_iter, succ_tol=self.tol, tol_mode=self.tol_mode,
                           record_trajectory=self.record_trajectory)
        res = wf_run(z0, A, cfg, truth=x_true, y=y)
        self.init_ = z0
        self.coef_ = res.z_final
        self.n_iter_ = res.iters
        self.termination_ = res.termination
        self.eta_ = res.eta
        self.loss_history_ = res.losses
        self.step_history_ = res.steps
        self.dist_history_ = res.dist_to_truth
        self.n_features_in_ = A.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "coef_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("WirtingerFlow is not fitted yet; call fit first")

    def predict(self, A):
        """Quadratic measurements ``coef_^H A_i coef_`` of the recovered signal."""
        self._check_fitted()
        A, _ = check_measurements(A)
        if A.shape[1] != self.coef_.shape[0]:
            raise ValueError(f"A has n={A.shape[1]}, estimator was fitted with n={self.coef_.shape[0]}")
        return measure(A, self.coef_)

    def score(self, A, y):
        """Negative loss of the fitted signal on ``(A, y)``; higher is better."""
        self._check_fitted()
        A, y = check_measurements(A, y)
        return -loss(self.coef_, A, y)

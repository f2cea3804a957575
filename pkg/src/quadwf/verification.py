"""Empirical checks for concentration, the regularity condition and linear convergence."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import check_count, check_positive, check_signal
from .ensemble import EnsembleSpec, sample_matrices
from .flow import _loss_and_gradient, loss
from .linalg import aligned_distance, spectral_norm
from .spectral import as_arrays

PROBE_KINDS = ("fixed_xx", "random_pq")


@dataclass(frozen=True)
class RegularityParams:
    nu: float
    rho: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("nu", "rho"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        check_positive(self.alpha, "alpha")
        check_positive(self.beta, "beta")
        if 4.0 / (self.alpha * self.beta) > 1.0:
            raise ValueError("alpha and beta must satisfy 4 / (alpha * beta) <= 1")

    @classmethod
    def for_signal_norm(cls, norm):
        """nu = 0.01, rho = 0.2, alpha = (2/3)/||x||^2, beta = (2/3) * 120 ||x||^2."""
        norm_sq = check_positive(norm, "norm") ** 2
        return cls(nu=0.01, rho=0.2, alpha=(2.0 / 3.0) / norm_sq, beta=80.0 * norm_sq)


class RegularityOutcome(NamedTuple):
    holds: bool
    lhs: float
    rhs: float


@dataclass(frozen=True)
class ConcentrationReport:
    m_over_n: float
    probe_kind: str
    trials: int
    mean_gap: float
    max_gap: float


def _unit(v, name):
    v = check_signal(v, name)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError(f"{name} must have unit norm, got {np.linalg.norm(v)}")
    return v


def concentration_gap(matrices, p, q):
    """``|| (1/m) sum (p^H A_i^H q) A_i - 2 q p^H ||`` in spectral norm."""
    A = np.asarray(matrices, dtype=np.complex128)
    p = _unit(p, "p")
    q = _unit(q, "q")
    if A.ndim != 3 or A.shape[1:] != (p.shape[0], p.shape[0]) or q.shape != p.shape:
        raise ValueError("matrices must have shape (m, n, n) matching the probe length")
    # p^H A_i^H q = conj(q^H A_i p)
    coeff = np.conj(np.einsum("r,irc,c->i", np.conj(q), A, p, optimize=True))
    D = np.tensordot(coeff, A, axes=1) / A.shape[0] - 2.0 * np.outer(q, np.conj(p))
    return spectral_norm(D, tol=1e-12)


def _random_unit(n, rng):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def concentration_study(n, m_over_n_grid, q=0.0, trials=50, base_seed=0, probe_kind="random_pq"):
    """Mean and max concentration gap per sampling ratio."""
    if probe_kind not in PROBE_KINDS:
        raise ValueError(f"probe_kind must be one of {PROBE_KINDS}")
    trials = check_count(trials, "trials")
    reports = []
    for k, ratio in enumerate(m_over_n_grid):
        m = max(1, int(round(ratio * n)))
        gaps = []
        for t in range(trials):
            rng = np.random.default_rng([base_seed, k, t])
            p = _random_unit(n, rng)
            qv = p if probe_kind == "fixed_xx" else _random_unit(n, rng)
            spec = EnsembleSpec(n, m, q, int(rng.integers(2**63)))
            gaps.append(concentration_gap(sample_matrices(spec), p, qv))
        reports.append(ConcentrationReport(float(ratio), probe_kind, trials,
                                           float(np.mean(gaps)), float(np.max(gaps))))
    return reports


def sample_in_neighborhood(x, rho, rng, size=1):
    """Points ``z`` with ``dist(z, x) <= rho ||x||``.

    ``h`` gets a uniform complex direction and radius ``rho ||x|| u^{1/(2n)}``,
    which is uniform over the real ``2n``-ball; a random global phase is then
    applied, which leaves the aligned distance unchanged.
    """
    x = check_signal(x, "x", allow_zero=False)
    n = x.shape[0]
    radius = rho * np.linalg.norm(x)
    out = np.empty((size, n), dtype=np.complex128)
    for k in range(size):
        h = _random_unit(n, rng) * radius * rng.uniform() ** (1.0 / (2 * n))
        out[k] = (x + h) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
    return out


def regularity_check(z, truth, ensemble, params, y=None, atol=None):
    """Test ``Re<grad f(z), z - x e^{j phi}> >= dist^2 / alpha + ||grad f||^2 / beta``.

    ``atol`` (default ``1e-20 ||x||^4``) absorbs round-off when both sides
    vanish at ``z = x``.
    """
    A, y = as_arrays(ensemble, y)
    z = check_signal(z)
    truth = check_signal(truth, "truth", allow_zero=False)
    dist, phi = aligned_distance(z, truth)
    if dist > params.rho * np.linalg.norm(truth) * (1.0 + 1e-12):
        raise ValueError(f"z lies outside E({params.rho}): relative distance "
                         f"{dist / np.linalg.norm(truth):.4g}")
    _, grad = _loss_and_gradient(z, A, y)
    lhs = float(np.vdot(grad, z - truth * np.exp(1j * phi)).real)
    rhs = float(dist**2 / params.alpha + np.vdot(grad, grad).real / params.beta)
    if atol is None:
        atol = 1e-20 * float(np.vdot(truth, truth).real) ** 2
    return RegularityOutcome(lhs >= rhs - atol, lhs, rhs)


def convergence_envelope_check(dist_traj, eta, alpha, slack=1e-10):
    """True iff ``d_t^2 <= (1 - 2 eta / alpha)^t d_0^2`` (plus ``slack``) for every ``t``."""
    d = np.asarray(dist_traj, dtype=float)
    if d.ndim != 1 or d.size == 0 or np.any(d < 0):
        raise ValueError("dist_traj must be a non-empty sequence of nonnegative values")
    rate = 1.0 - 2.0 * eta / alpha
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"contraction rate 1 - 2*eta/alpha = {rate} is outside [0, 1)")
    t = np.arange(d.size)
    return bool(np.all(d**2 <= rate**t * d[0] ** 2 + slack))


def envelope_ratio(dist_traj, floor=0.0):
    """Smallest ``c`` with ``d_t^2 <= c^t d_0^2`` for all ``t``.

    Entries at or below ``floor`` are ignored so that round-off at convergence
    does not dominate the fit.
    """
    d = np.asarray(dist_traj, dtype=float)
    if d.size < 2 or d[0] <= 0:
        return 0.0
    t = np.arange(1, d.size)
    keep = d[1:] > floor
    if not np.any(keep):
        return 0.0
    ratios = (d[1:][keep] / d[0]) ** (2.0 / t[keep])
    return float(ratios.max())


def first_inside(dist_traj, rho=0.2):
    """Index of the first relative distance ``<= rho`` (``None`` if never)."""
    d = np.asarray(dist_traj, dtype=float)
    idx = np.flatnonzero(d <= rho)
    return int(idx[0]) if idx.size else None


def fd_directional_derivative(z, d, ensemble, h=1e-5, y=None):
    """Central difference ``(f(z + h d) - f(z - h d)) / (2h)``."""
    A, y = as_arrays(ensemble, y)
    h = check_positive(h, "h")
    z = check_signal(z)
    d = check_signal(d, "d")
    return (loss(z + h * d, A, y) - loss(z - h * d, A, y)) / (2.0 * h)

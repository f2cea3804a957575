"""Rotation-invariant sub-Gaussian measurement ensembles.

Coefficient vectors follow ``r = gamma * ||s||^q * s`` with ``s`` standard
normal in ``R^d`` and ``q`` in ``[-1, 0]``; ``q = 0`` is Gaussian and
``q = -1`` is uniform on the sphere of radius ``sqrt(d)``. ``gamma`` makes
every coordinate unit-variance. A complex ``n x n`` matrix uses ``d = 2 n^2``
coefficients packed row-major with real and imaginary parts interleaved,
which is exactly numpy's complex128 memory layout.

Matrix ``i`` of an ensemble is drawn from its own stream keyed by
``(base_seed, i)``, so any subset can be regenerated independently.
"""
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln

from ._validation import check_count, check_signal

MAX_SEED = 2**64 - 1


def _check_q(q):
    q = float(q)
    if not -1.0 <= q <= 0.0:
        raise ValueError(f"shape parameter q must lie in [-1, 0], got {q}")
    return q


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    m: int
    q: float = 0.0
    base_seed: int = 0

    def __post_init__(self):
        check_count(self.n, "n")
        check_count(self.m, "m")
        object.__setattr__(self, "q", _check_q(self.q))
        if isinstance(self.base_seed, bool) or not 0 <= int(self.base_seed) <= MAX_SEED:
            raise ValueError(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed!r}")
        object.__setattr__(self, "base_seed", int(self.base_seed))

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        unknown = set(data) - {"n", "m", "q", "base_seed"}
        if unknown:
            raise ValueError(f"unknown EnsembleSpec fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class MeasurementEnsemble:
    """``m`` matrices of shape ``(n, n)`` and the measurements ``y_i = x^H A_i x``."""

    spec: EnsembleSpec
    matrices: np.ndarray = field(repr=False)
    measurements: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.matrices.shape != (self.spec.m, self.spec.n, self.spec.n):
            raise ValueError("matrices do not match spec dimensions")
        if self.measurements.shape != (self.spec.m,):
            raise ValueError("measurements do not match spec.m")
        self.matrices.setflags(write=False)
        self.measurements.setflags(write=False)

    @property
    def n(self):
        return self.spec.n

    @property
    def m(self):
        return self.spec.m


def gamma_scale(d, q):
    """Scale making ``gamma * ||s||^q * s`` unit-variance per coordinate.

    Uses ``E||s||^k = 2^{k/2} Gamma((d+k)/2) / Gamma(d/2)`` with ``k = 2(q+1)``.
    """
    d = check_count(d, "d")
    q = _check_q(q)
    k = 2.0 * (q + 1.0)
    log_moment = 0.5 * k * np.log(2.0) + gammaln(0.5 * (d + k)) - gammaln(0.5 * d)
    return float(np.sqrt(d * np.exp(-log_moment)))


def sample_coefficient_vector(d, q, rng):
    d = check_count(d, "d")
    q = _check_q(q)
    s = rng.standard_normal(d)
    norm = np.linalg.norm(s)
    while norm == 0.0:
        s = rng.standard_normal(d)
        norm = np.linalg.norm(s)
    if q == 0.0:
        return s
    return (gamma_scale(d, q) * norm**q) * s


def sample_matrix(n, q, rng):
    """One ``n x n`` complex measurement matrix; ``E|A_rc|^2 = 2``."""
    n = check_count(n, "n")
    r = sample_coefficient_vector(2 * n * n, q, rng)
    return r.view(np.complex128).reshape(n, n)


def measurement_stream(base_seed, index):
    return np.random.default_rng(np.random.SeedSequence([int(base_seed), int(index)]))


def sample_matrices(spec):
    A = np.empty((spec.m, spec.n, spec.n), dtype=np.complex128)
    for i in range(spec.m):
        A[i] = sample_matrix(spec.n, spec.q, measurement_stream(spec.base_seed, i))
    return A


def measure(A, x):
    """``y_i = x^H A_i x`` for every matrix in the stack ``A``."""
    return np.einsum("r,irc,c->i", np.conj(x), A, x, optimize=True)


def build_ensemble(spec, x):
    x = check_signal(x, "x")
    if x.shape[0] != spec.n:
        raise ValueError(f"x has length {x.shape[0]} but spec.n = {spec.n}")
    A = sample_matrices(spec)
    return MeasurementEnsemble(spec, A, measure(A, x))


def sample_gaussian_spectral_statistics(x, m, rng):
    """Draw ``(S, R)`` for a Gaussian (``q = 0``) ensemble without forming it.

    Splitting each ``A_i`` into its component along ``X = x x^H / ||x||^2``
    and the orthogonal remainder gives ``y_i = c_i ||x||^2`` with ``c_i``
    standard complex normal, and

        S = ||x||^2 (sum|c|^2 / m) X + ||x||^2 (sqrt(sum|c|^2) / m) G_perp

    where ``G_perp`` is one standard Gaussian matrix projected off ``X``.
    The joint law of ``(S, R)`` matches the explicit construction exactly at
    ``O(n^2 + m)`` cost, which keeps large-``n`` benchmarks within memory.
    """
    x = check_signal(x, "x", allow_zero=False)
    m = check_count(m, "m")
    n = x.shape[0]
    norm_sq = float(np.vdot(x, x).real)
    X = np.outer(x, np.conj(x)) / norm_sq
    c = rng.standard_normal(2 * m).view(np.complex128)
    energy = float(np.vdot(c, c).real)
    G = rng.standard_normal(2 * n * n).view(np.complex128).reshape(n, n)
    G -= np.vdot(X, G) * X
    S = norm_sq * ((energy / m) * X + (np.sqrt(energy) / m) * G)
    R = norm_sq**2 * energy / (2.0 * m)
    return S, R

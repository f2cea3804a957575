"""Dense complex linear algebra used throughout the package.

Everything here is a pure function of its inputs. Matrices are plain
``numpy`` arrays of dtype complex128.
"""
from typing import NamedTuple

import numpy as np

from ._validation import check_count, check_matrix, check_positive, check_same_length, check_signal

TWO_PI = 2.0 * np.pi


class ConvergenceError(RuntimeError):
    """An iterative routine ran out of iterations before meeting its tolerance."""

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


class DegenerateMatrixError(ValueError):
    """Power iteration hit ``M^H M v = 0``."""


class AlignedDistance(NamedTuple):
    distance: float
    phi_min: float


class SingularPair(NamedTuple):
    u: np.ndarray
    sigma: float
    v: np.ndarray
    n_iter: int


def quad_form(A, z):
    """Return ``z^H A z``."""
    A = check_matrix(A, "A", square=True)
    z = check_signal(z)
    if A.shape[0] != z.shape[0]:
        raise ValueError(f"incompatible shapes: A is {A.shape}, z has length {z.shape[0]}")
    return complex(np.vdot(z, A @ z))


def aligned_distance(z, x):
    """Phase-invariant distance ``min_phi ||z - x e^{j phi}||`` and its minimizer.

    ``phi_min`` lies in ``(0, 2*pi]``; when ``z^H x = 0`` every phase is
    optimal and ``2*pi`` is returned.
    """
    z = check_signal(z)
    x = check_signal(x, "x")
    check_same_length(z, x)
    # elementwise product keeps Im(x^H x) exactly zero, unlike BLAS dot
    inner = complex(np.sum(np.conj(z) * x))
    if inner == 0:
        return AlignedDistance(float(np.linalg.norm(z - x)), TWO_PI)
    phi = float(np.mod(-np.angle(inner), TWO_PI))
    if phi == 0.0:
        phi = TWO_PI
    # direct residual norm; the expanded form loses precision near zero
    dist = float(np.linalg.norm(z - x * (np.conj(inner) / abs(inner))))
    return AlignedDistance(dist, phi)


def align_phase(z, x):
    """Rotate ``z`` by a global phase so that it best matches ``x``."""
    d = aligned_distance(z, x)
    return np.asarray(z, dtype=np.complex128) * np.exp(-1j * d.phi_min)


def relative_distance(z, x):
    x = check_signal(x, "x", allow_zero=False)
    return aligned_distance(z, x).distance / float(np.linalg.norm(x))


def _start_vector(n, rng=None):
    if rng is None:
        v = np.ones(n, dtype=np.complex128)
    else:
        rng = np.random.default_rng(rng)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def spectral_norm(M, tol=1e-13, max_iter=10000):
    """Largest singular value of ``M`` by power iteration on ``M^H M``.

    Raises ConvergenceError (with ``last_estimate``) if the relative change
    of the estimate stays above ``tol`` for ``max_iter`` iterations.
    """
    M = check_matrix(M)
    tol = check_positive(tol, "tol")
    max_iter = check_count(max_iter, "max_iter")
    if not np.any(M):
        return 0.0
    MH = M.conj().T
    v = _start_vector(M.shape[1])
    w = MH @ (M @ v)
    if not np.any(w):
        # all-ones start lies in the null space; fall back to a fixed random start
        v = _start_vector(M.shape[1], rng=0)
        w = MH @ (M @ v)
    sigma = 0.0
    for _ in range(max_iter):
        v = w / np.linalg.norm(w)
        Mv = M @ v
        new_sigma = float(np.linalg.norm(Mv))
        if abs(new_sigma - sigma) <= tol * new_sigma:
            return new_sigma
        sigma = new_sigma
        w = MH @ Mv
    raise ConvergenceError(
        f"spectral_norm did not converge in {max_iter} iterations", last_estimate=sigma)


def leading_singular_pair(M, iters=10, tol=None, start=None):
    """Leading singular triplet of a square matrix by power iteration.

    Runs ``v <- M^H M v / ||M^H M v||`` from a fixed all-ones start (or
    ``start`` if given) for at most ``iters`` steps. With ``tol`` set, stops
    early once successive iterates differ by less than ``tol`` in norm.
    """
    M = check_matrix(M, square=True)
    iters = check_count(iters, "iters")
    n = M.shape[0]
    if start is None:
        v = _start_vector(n)
    else:
        v = check_signal(start, "start", allow_zero=False)
        v = v / np.linalg.norm(v)
    MH = M.conj().T
    used = 0
    for used in range(1, iters + 1):
        w = MH @ (M @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            raise DegenerateMatrixError("M^H M v vanished during power iteration")
        w = w / norm_w
        change = np.linalg.norm(w - v)
        v = w
        if tol is not None and change < tol:
            break
    Mv = M @ v
    sigma = float(np.linalg.norm(Mv))
    if sigma == 0:
        raise DegenerateMatrixError("M v vanished; leading singular value is zero")
    return SingularPair(Mv / sigma, sigma, v, used)


def jacobi_svd(M, tol=1e-15, max_sweeps=60):
    """Full SVD ``M = U diag(s) V^H`` by one-sided (Hestenes) Jacobi rotations.

    Slow pure-numpy reference; singular values are returned in descending order.
    """
    M = check_matrix(M)
    U = np.array(M, dtype=np.complex128, order="F")
    ncol = U.shape[1]
    V = np.eye(ncol, dtype=np.complex128)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(ncol - 1):
            for q in range(p + 1, ncol):
                up, uq = U[:, p], U[:, q]
                alpha = np.vdot(up, up).real
                beta = np.vdot(uq, uq).real
                gamma = np.vdot(up, uq)
                g = abs(gamma)
                if g == 0 or g <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = gamma / g
                zeta = (beta - alpha) / (2.0 * g)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                uq_rot = uq * np.conj(phase)
                U[:, p], U[:, q] = c * up - s * uq_rot, s * up + c * uq_rot
                vq_rot = V[:, q] * np.conj(phase)
                V[:, p], V[:, q] = c * V[:, p] - s * vq_rot, s * V[:, p] + c * vq_rot
        if not rotated:
            break
    else:
        raise ConvergenceError(f"jacobi_svd did not converge in {max_sweeps} sweeps")
    s = np.linalg.norm(U, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    U = U[:, order]
    V = V[:, order]
    nonzero = s > 0
    U[:, nonzero] /= s[nonzero]
    return U, s, V.conj().T

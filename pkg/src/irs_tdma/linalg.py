"""Dense complex linear algebra used by the simulator.

Matrices are plain 2-D ``numpy.complex128`` arrays. Only the dominant
singular triplet is ever needed, so there is no general SVD here.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
_START_SEED = 0x5EED


class DegenerateChannelError(ValueError):
    """Raised when a channel matrix carries no energy."""


class SingularConvergenceError(RuntimeError):
    """Power iteration did not meet the residual tolerance.

    The last iterate is kept on ``self.triplet``.
    """

    def __init__(self, message, triplet):
        super().__init__(message)
        self.triplet = triplet


@dataclass(frozen=True)
class SingularTriplet:
    sigma: float
    left: np.ndarray
    right: np.ndarray
    iterations: int = 0


def as_matrix(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    return a


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def apply_irs(g, theta, h):
    """Return ``g @ diag(exp(1j*theta)) @ h`` without forming the diagonal."""
    g, h = as_matrix(g), as_matrix(h)
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if not (g.shape[1] == theta.size == h.shape[0]):
        raise ValueError(
            f"dimension mismatch: g {g.shape}, theta ({theta.size},), h {h.shape}"
        )
    return (g * np.exp(1j * theta)[None, :]) @ h


def _start_vector(n):
    rng = np.random.default_rng(_START_SEED + n)
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _fix_phase(u, v):
    # largest-magnitude entry of v made real-positive; argmax picks the first on ties
    idx = int(np.argmax(np.abs(v)))
    rot = np.conj(v[idx]) / abs(v[idx])
    return u * rot, v * rot


def top_singular_triplet(a, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Dominant singular value and vectors of ``a``.

    Power iteration on ``a^H a`` from a fixed pseudo-random start. The
    returned triplet satisfies ``||a v - s u|| <= tol*s`` and
    ``||a^H u - s v|| <= tol*s``.

    Raises
    ------
    DegenerateChannelError
        If ``a`` is the zero matrix.
    SingularConvergenceError
        If the residuals are not met within ``max_iter`` iterations.
    """
    a = as_matrix(a)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.any(a):
        raise DegenerateChannelError("degenerate channel: zero matrix")
    sigma, u, v, iters, ok = kernels.dominant_pair(a, _start_vector(a.shape[1]), tol, max_iter)
    if sigma == 0.0:
        # start vector landed in the null space; retry from a coordinate basis vector
        best = int(np.argmax(np.linalg.norm(a, axis=0)))
        e = np.zeros(a.shape[1], dtype=np.complex128)
        e[best] = 1.0
        sigma, u, v, iters, ok = kernels.dominant_pair(a, e, tol, max_iter)
    u, v = _fix_phase(np.asarray(u), np.asarray(v))
    triplet = SingularTriplet(float(sigma), u, v, int(iters))
    if not ok:
        raise SingularConvergenceError(
            f"power iteration did not converge in {max_iter} iterations", triplet
        )
    return triplet

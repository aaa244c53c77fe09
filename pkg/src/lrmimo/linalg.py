"""Dense real/complex helpers: real-valued embedding, QR, triangular solves, ZF.

Matrices are plain ``numpy.ndarray`` objects in row-major (C) order. Complex
matrices are ``complex128``, real ones ``float64``.
"""
import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "RankDeficient",
    "SingularTriangular",
    "RANK_TOL",
    "as_real_matrix",
    "as_complex_matrix",
    "embed_channel",
    "embed_vector",
    "unembed_vector",
    "qr_decompose",
    "back_substitute",
    "zf_equalize",
]

# |R_ii| below RANK_TOL * max_j |R_jj| counts as a zero pivot.
RANK_TOL = 1e-12


class RankDeficient(ValueError):
    """Raised when a matrix handed to :func:`qr_decompose` is numerically rank deficient."""


class SingularTriangular(ValueError):
    """Raised when a triangular system has a (numerically) zero pivot."""


def _check_matrix(a, dtype, name):
    a = np.asarray(a, dtype=dtype)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_real_matrix(a, name="matrix"):
    return _check_matrix(a, np.float64, name)


def as_complex_matrix(a, name="matrix"):
    return _check_matrix(a, np.complex128, name)


def embed_channel(h):
    """Return the real 2N_r x 2N_t form ``[[Re H, -Im H], [Im H, Re H]]``."""
    h = as_complex_matrix(h, "channel")
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def embed_vector(v):
    """Stack real over imaginary parts along the first axis.

    Works for a single vector or a matrix whose columns are vectors.
    """
    v = np.asarray(v, dtype=np.complex128)
    return np.concatenate([v.real, v.imag], axis=0)


def unembed_vector(v):
    """Inverse of :func:`embed_vector`."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    if n % 2:
        raise ValueError(f"real-embedded vector must have even length, got {n}")
    return v[: n // 2] + 1j * v[n // 2 :]


def qr_decompose(a):
    """Thin Householder QR with a strictly positive diagonal on R.

    Returns ``(q, r)`` with ``q`` of shape m x n and ``r`` n x n.
    Raises :class:`RankDeficient` when a pivot falls under the rank tolerance.
    """
    a = as_real_matrix(a)
    m, n = a.shape
    if m < n:
        raise ValueError(f"need rows >= cols, got {m} x {n}")
    q, r = np.linalg.qr(a, mode="reduced")
    d = np.diag(r)
    scale = np.abs(d).max()
    if scale == 0.0 or np.any(np.abs(d) < RANK_TOL * scale):
        raise RankDeficient(f"matrix is rank deficient (|diag R| = {np.abs(d)})")
    signs = np.where(d < 0, -1.0, 1.0)
    q = q * signs
    r = r * signs[:, None]
    # LAPACK leaves exact zeros below the diagonal, but be explicit
    r = np.triu(r)
    return q, r


def back_substitute(r, y):
    """Solve ``r @ z = y`` for upper triangular ``r``.

    ``y`` may be a vector or a matrix of stacked right-hand sides.
    """
    r = np.asarray(r, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = r.shape[0]
    if r.shape != (n, n):
        raise ValueError(f"r must be square, got {r.shape}")
    if y.shape[0] != n:
        raise ValueError(f"rhs has {y.shape[0]} rows, expected {n}")
    d = np.abs(np.diag(r))
    scale = d.max()
    if scale == 0.0 or np.any(d < RANK_TOL * scale):
        raise SingularTriangular(f"triangular pivot below tolerance (|diag| = {d})")
    return solve_triangular(r, y, lower=False, check_finite=False)


def zf_equalize(q, r, x):
    """Zero-forcing estimate ``R^-1 Q^T x``, i.e. the pseudo-inverse of ``Q R`` applied to ``x``."""
    q = np.asarray(q, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != q.shape[0]:
        raise ValueError(f"x has {x.shape[0]} rows, expected {q.shape[0]}")
    return back_substitute(r, q.T @ x)

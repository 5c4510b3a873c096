"""Dense small-matrix kernels.

Singular values come from LAPACK through :func:`numpy.linalg.svd`; exterior powers
are assembled from p x p minors on the lexicographic wedge basis
``e_{i1} ^ ... ^ e_{ip}`` with ``i1 < ... < ip``.
"""

from functools import lru_cache
from itertools import combinations

import numpy as np

from ._validation import check_matrix
from .exceptions import BadDegree, RankDeficient, SingularInput

SINGULAR_RTOL = 1e-12
RANK_ATOL = 1e-300


@lru_cache(maxsize=None)
def wedge_basis(d, p):
    """Lexicographically ordered p-subsets of ``range(d)`` (the basis of Λ^p R^d)."""
    return tuple(combinations(range(d), p))


def _exterior(g, p):
    # Works on stacks (..., d, d); p == 0 gives the trivial 1x1 representation.
    d = g.shape[-1]
    if p == 0:
        return np.ones(g.shape[:-2] + (1, 1))
    if p == 1:
        return np.array(g, dtype=np.float64, copy=True)
    basis = np.array(wedge_basis(d, p))
    sub = g[..., basis[:, None, :, None], basis[None, :, None, :]]
    return np.linalg.det(sub)


def exterior_power(g, p):
    """Matrix of Λ^p g on the lexicographic wedge basis.

    Accepts a single ``(d, d)`` matrix or a stack ``(..., d, d)``. The result has
    shape ``(..., C(d, p), C(d, p))`` and its operator norm is the product of the
    top ``p`` singular values of ``g``.
    """
    g = check_matrix(g, "g", ndim=None)
    d = g.shape[-1]
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or not 1 <= p <= d:
        raise BadDegree(f"exterior degree must satisfy 1 <= p <= {d}, got {p!r}")
    return _exterior(g, int(p))


def cartan_vector(g):
    """Sorted (non-increasing) log singular values of an invertible matrix.

    This is the Cartan projection for GL(d) with the Weyl chamber realized by
    the sort order.
    """
    g = check_matrix(g, "g")
    s = np.linalg.svd(g, compute_uv=False)
    if s[0] == 0 or s[-1] <= SINGULAR_RTOL * s[0]:
        raise SingularInput(
            f"matrix is numerically singular (s_min/s_max = {s[-1] / s[0] if s[0] else 0.0:.3g})"
        )
    return np.log(s)


def qr_step(frame):
    """Re-orthonormalize a frame, returning ``(Q, log|diag R|)``.

    Column signs of ``Q`` are fixed so that ``R`` has a positive diagonal, hence an
    orthonormal input is returned unchanged. Stacks of frames are supported.
    """
    frame = check_matrix(frame, "frame", square=False, ndim=None)
    if frame.shape[-2] < frame.shape[-1]:
        raise RankDeficient("frame has more columns than rows")
    return _qr_step(frame)


def _qr_step(frame):
    q, r = np.linalg.qr(frame)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(diag)
    if np.any(mag < RANK_ATOL):
        raise RankDeficient("R-diagonal magnitude below 1e-300")
    sign = np.where(diag < 0, -1.0, 1.0)
    return q * sign[..., None, :], np.log(mag)


def op_norm(m):
    """Spectral norm of a matrix or a stack of matrices."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape[-1] == 1 or m.shape[-2] == 1:
        return np.sqrt(np.sum(m * m, axis=(-2, -1)))
    return np.linalg.norm(m, 2, axis=(-2, -1))


def product_log_norms(factors, words, record=None):
    """Log operator norms of the left-to-right products of a batch of words.

    Parameters
    ----------
    factors : ndarray of shape (m, D, D)
        One matrix per atom.
    words : ndarray of shape (R, N)
        Atom indices; row ``r`` is the word ``b_1, ..., b_N``.
    record : sequence of int, optional
        Increasing step counts ``n`` (1-based) at which ``log||b_1 ... b_n||`` is
        reported. Defaults to every step.

    Returns
    -------
    ndarray of shape (R, len(record))
    """
    factors = np.asarray(factors, dtype=np.float64)
    words = np.asarray(words)
    n_words, n_steps = words.shape
    record = np.arange(1, n_steps + 1) if record is None else np.asarray(record, dtype=int)
    dim = factors.shape[-1]
    prod = np.broadcast_to(np.eye(dim), (n_words, dim, dim)).copy()
    log_scale = np.zeros(n_words)
    out = np.empty((n_words, len(record)))
    j = 0
    with np.errstate(divide="ignore"):
        for n in range(1, n_steps + 1):
            prod = prod @ factors[words[:, n - 1]]
            s = np.sqrt(np.einsum("rij,rij->r", prod, prod))
            prod /= s[:, None, None]
            log_scale += np.log(s)
            while j < len(record) and record[j] == n:
                out[:, j] = log_scale + np.log(op_norm(prod))
                j += 1
    return out

"""The affine Grassmannian X_{k,d} and its Plücker embedding.

A k-dimensional affine subspace is stored canonically as the foot of the
perpendicular from the origin (``base``) together with an orthonormal direction
frame. Lifting to R^{d+1} = R^d + R e_{d+1} sends it to the (k+1)-plane spanned by
``(base, 1), (v_1, 0), ..., (v_k, 0)``, whose wedge lives in
V = Λ^{k+1} R^{d+1}. The invariant block W = Λ^{k+1} R^d consists of the basis
wedges avoiding e_{d+1}; the complement W_s is spanned by those containing it.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import check_degree, check_positive_float, check_vector
from .exceptions import BlockStructureViolated, DegenerateSubspace, ValidationError
from .linalg import _exterior, wedge_basis

ORTHO_ATOL = 1e-10
GAUGE_FLOOR = 1e-250
BLOCK_RTOL = 1e-8


@lru_cache(maxsize=None)
def block_indices(d, k):
    """Positions of the W and W_s coordinates inside the lexicographic basis of V.

    Within each block the lexicographic order is preserved, so the W block is
    indexed by ``wedge_basis(d, k+1)`` and the W_s block by ``wedge_basis(d, k)``.
    """
    basis = wedge_basis(d + 1, k + 1)
    w_idx = np.array([i for i, s in enumerate(basis) if d not in s], dtype=int)
    ws_idx = np.array([i for i, s in enumerate(basis) if d in s], dtype=int)
    w_idx.setflags(write=False)
    ws_idx.setflags(write=False)
    return w_idx, ws_idx


def block_order(d, k):
    """Permutation putting V's lexicographic coordinates into (W, W_s) order."""
    w_idx, ws_idx = block_indices(d, k)
    return np.concatenate([w_idx, ws_idx])


def _orthonormal_frame(directions):
    # QR with positive R-diagonal; rank checked by the caller's tolerance.
    q, r = np.linalg.qr(directions)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * np.where(diag < 0, -1.0, 1.0)[..., None, :]


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """A point of X_{k,d}; ``frame`` is ``d x k`` with orthonormal columns."""

    base: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        base = check_vector(self.base, "base").copy()
        d = base.shape[0]
        frame = np.asarray(self.frame, dtype=np.float64).reshape(d, -1).copy()
        k = frame.shape[1]
        check_degree(k, d)
        if k:
            if not np.allclose(frame.T @ frame, np.eye(k), rtol=0, atol=ORTHO_ATOL):
                raise ValidationError("frame must be orthonormal")
            if np.max(np.abs(frame.T @ base)) > ORTHO_ATOL * max(1.0, np.linalg.norm(base)):
                raise ValidationError("base must be orthogonal to the frame")
        base.setflags(write=False)
        frame.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)

    @property
    def d(self):
        return self.base.shape[0]

    @property
    def k(self):
        return self.frame.shape[1]

    @classmethod
    def through(cls, point, directions=()):
        """Canonical subspace ``point + span(directions)``; directions are rows."""
        point = check_vector(point, "point")
        d = point.shape[0]
        dirs = np.asarray(directions, dtype=np.float64).reshape(-1, d)
        if dirs.shape[0] == 0:
            return cls(point, np.zeros((d, 0)))
        frame = _orthonormal_frame(dirs.T)
        if np.linalg.matrix_rank(frame.T @ dirs.T) < dirs.shape[0]:
            raise ValidationError("directions must be linearly independent")
        return cls(point - frame @ (frame.T @ point), frame)

    def canonical(self):
        return AffineSubspace.through(self.base, self.frame.T)

    def same_as(self, other, atol=1e-8):
        """Equality as sets, to tolerance."""
        if self.d != other.d or self.k != other.k:
            return False
        if not np.allclose(self.base, other.base, rtol=0, atol=atol):
            return False
        return np.allclose(self.frame @ self.frame.T, other.frame @ other.frame.T, rtol=0, atol=atol)

    def to_dict(self):
        return {"k": self.k, "base": self.base.tolist(), "frame": self.frame.T.tolist()}

    @classmethod
    def from_dict(cls, data):
        try:
            k = int(data["k"])
            base = np.asarray(data["base"], dtype=np.float64)
            frame = np.asarray(data.get("frame", []), dtype=np.float64).reshape(k, base.shape[0])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad AffineSubspace record: {exc}") from None
        return cls.through(base, frame)


@dataclass(frozen=True, eq=False)
class PluckerPoint:
    """Gauged class [w, w'] with ``||w'|| = 1``; ``w`` in W, ``wprime`` in W_s."""

    w: np.ndarray
    wprime: np.ndarray

    @property
    def vector(self):
        """Homogeneous coordinates in (W, W_s) order."""
        return np.concatenate([self.w, self.wprime])

    @classmethod
    def from_lexicographic(cls, v, d, k):
        """Gauge a raw vector of V given in lexicographic coordinates."""
        v = check_vector(v, "v")
        w_idx, ws_idx = block_indices(d, k)
        if v.shape[0] != len(w_idx) + len(ws_idx):
            raise ValidationError("vector length does not match dim Λ^{k+1} R^{d+1}")
        w, wp = v[w_idx], v[ws_idx]
        scale = np.linalg.norm(wp)
        if not scale >= GAUGE_FLOOR:
            raise DegenerateSubspace("||w'|| < 1e-250: point lies (numerically) in P(W)")
        return cls(w / scale, wp / scale)


def lifted_wedges(base, frame):
    """Lexicographic wedge coordinates of lifted frames; batched over leading axes."""
    base = np.asarray(base, dtype=np.float64)
    frame = np.asarray(frame, dtype=np.float64)
    d, k = frame.shape[-2], frame.shape[-1]
    lead = base.shape[:-1]
    lifted = np.zeros(lead + (d + 1, k + 1))
    lifted[..., :d, 0] = base
    lifted[..., d, 0] = 1.0
    lifted[..., :d, 1:] = frame
    rows = np.array(wedge_basis(d + 1, k + 1))
    return np.linalg.det(lifted[..., rows, :])


def act_arrays(linear, translation, base, frame):
    """Batched action on canonical representatives; returns the new ``(base, frame)``."""
    p = np.einsum("...ij,...j->...i", linear, base) + translation
    if frame.shape[-1] == 0:
        return p, frame
    frame = _orthonormal_frame(linear @ frame)
    coef = np.einsum("...ik,...i->...k", frame, p)
    return p - np.einsum("...ik,...k->...i", frame, coef), frame


def act(g, x):
    """Image ``{g(p) : p in x}`` in canonical form."""
    if g.d != x.d:
        raise ValidationError("dimension mismatch between map and subspace")
    base, frame = act_arrays(g.linear, g.translation, x.base, x.frame)
    return AffineSubspace(base, frame)


def plucker_embed(x):
    """Plücker point of the lifted (k+1)-plane of ``x``, split along W + W_s."""
    return PluckerPoint.from_lexicographic(lifted_wedges(x.base, x.frame), x.d, x.k)


def u_delta(p, delta):
    """Proper function ``||w||^delta / ||w'||^delta`` (the gauge makes the denominator 1)."""
    delta = check_positive_float(delta, "delta")
    return float(np.linalg.norm(p.w) / np.linalg.norm(p.wprime)) ** delta


def dist_origin(x):
    """Euclidean distance from the origin to the subspace."""
    return float(np.linalg.norm(x.base))


def proj_distance_arrays(p, q):
    """Sine of the angle between homogeneous vectors, batched over leading axes."""
    p = p / np.linalg.norm(p, axis=-1, keepdims=True)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    r = p - np.sum(p * q, axis=-1, keepdims=True) * q
    return np.minimum(np.linalg.norm(r, axis=-1), 1.0)


def proj_distance(p, q):
    """Projective (sine) distance between two points of P(V); lies in [0, 1]."""
    pv = p.vector if isinstance(p, PluckerPoint) else check_vector(p, "p")
    qv = q.vector if isinstance(q, PluckerPoint) else check_vector(q, "q")
    if pv.shape != qv.shape:
        raise ValidationError("points live in different projective spaces")
    return float(proj_distance_arrays(pv, qv))


def block_factors(mu, k):
    """Λ^{k+1} of each embedded atom in (W, W_s) order, with its diagonal blocks.

    Returns ``(full, a, c, dblk)`` where ``full`` has shape ``(m, D, D)`` and
    ``full[i] = [[a[i], c[i]], [0, dblk[i]]]``. Raises
    :class:`BlockStructureViolated` if a lower-left block exceeds ``1e-8`` times
    the matrix norm.
    """
    d = mu.d
    k = check_degree(k, d)
    perm = block_order(d, k)
    full = _exterior(mu.embedded(), k + 1)[:, perm][:, :, perm]
    r = len(block_indices(d, k)[0])
    lower = np.abs(full[:, r:, :r]).max(initial=0.0, axis=(1, 2)) if r else np.zeros(len(full))
    scale = np.abs(full).max(axis=(1, 2))
    if np.any(lower > BLOCK_RTOL * scale):
        raise BlockStructureViolated("lower-left (W_s -> W) block of an atom is not zero")
    return full, full[:, :r, :r], full[:, :r, r:], full[:, r:, r:]

"""Affine group elements, finite-support measures and seeded word sampling."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_matrix, check_measure, check_positive_int, check_seed, check_vector
from .exceptions import ValidationError
from .linalg import _exterior

GROUP_KINDS = ("Aff", "SAff")
WEIGHT_ATOL = 1e-12
SAFF_DET_ATOL = 1e-9
INVERTIBLE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``x -> linear @ x + translation`` on R^d."""

    linear: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        a = check_matrix(self.linear, "linear").copy()
        u = check_vector(self.translation, "translation", size=a.shape[0]).copy()
        s = np.linalg.svd(a, compute_uv=False)
        if s[0] == 0 or s[-1] <= INVERTIBLE_RTOL * s[0]:
            raise ValidationError("linear part must be invertible")
        a.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "linear", a)
        object.__setattr__(self, "translation", u)

    @property
    def d(self):
        return self.linear.shape[0]

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d), np.zeros(d))

    def __call__(self, x):
        return self.linear @ np.asarray(x, dtype=np.float64) + self.translation

    def __matmul__(self, other):
        # (g @ h)(x) = g(h(x))
        if not isinstance(other, AffineMap):
            return NotImplemented
        return AffineMap(self.linear @ other.linear, self.linear @ other.translation + self.translation)

    def inverse(self):
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -inv @ self.translation)

    def allclose(self, other, atol=1e-9):
        return (
            self.d == other.d
            and np.allclose(self.linear, other.linear, rtol=0, atol=atol)
            and np.allclose(self.translation, other.translation, rtol=0, atol=atol)
        )

    def to_dict(self):
        return {"A": self.linear.ravel().tolist(), "u": self.translation.tolist()}

    @classmethod
    def from_dict(cls, data, d):
        a = np.asarray(data["A"], dtype=np.float64)
        if a.size != d * d:
            raise ValidationError(f"atom A must have {d * d} entries (row-major d x d), got {a.size}")
        return cls(a.reshape(d, d), np.asarray(data["u"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """Finitely supported probability measure on Aff(d) or SAff(d).

    ``atoms`` is a sequence of ``(weight, AffineMap)`` pairs. Only finite supports
    are admitted; compact support is then automatic.
    """

    group_kind: str
    atoms: tuple
    linear_parts: np.ndarray = field(init=False, repr=False)
    translations: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.group_kind not in GROUP_KINDS:
            raise ValidationError(f"group_kind must be one of {GROUP_KINDS}, got {self.group_kind!r}")
        atoms = tuple((float(w), g) for w, g in self.atoms)
        if not atoms:
            raise ValidationError("measure needs at least one atom")
        d = atoms[0][1].d
        for w, g in atoms:
            if not isinstance(g, AffineMap):
                raise ValidationError("atoms must be (weight, AffineMap) pairs")
            if g.d != d:
                raise ValidationError("all atoms must act on the same dimension")
            if not np.isfinite(w) or w <= 0:
                raise ValidationError(f"weights must be strictly positive, got {w}")
            if self.group_kind == "SAff" and abs(np.linalg.det(g.linear) - 1.0) > SAFF_DET_ATOL:
                raise ValidationError("SAff atoms need det(linear) = 1")
        weights = np.array([w for w, _ in atoms])
        if abs(weights.sum() - 1.0) > WEIGHT_ATOL:
            raise ValidationError(f"weights must sum to 1 within 1e-12, got {weights.sum():.15g}")
        linear = np.array([g.linear for _, g in atoms])
        trans = np.array([g.translation for _, g in atoms])
        for arr in (weights, linear, trans):
            arr.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "linear_parts", linear)
        object.__setattr__(self, "translations", trans)

    @property
    def d(self):
        return self.linear_parts.shape[1]

    @property
    def n_atoms(self):
        return len(self.atoms)

    @classmethod
    def from_arrays(cls, group_kind, weights, linear, translations=None):
        linear = np.asarray(linear, dtype=np.float64)
        if translations is None:
            translations = np.zeros(linear.shape[:2])
        return cls(group_kind, tuple(
            (w, AffineMap(a, u)) for w, a, u in zip(weights, linear, translations)
        ))

    def embedded(self):
        """Stack of (d+1) x (d+1) matrices, one per atom."""
        return embed_gl_arrays(self.linear_parts, self.translations)

    def to_dict(self):
        return {"atoms": [{"weight": w, **g.to_dict()} for w, g in self.atoms]}

    @classmethod
    def from_dict(cls, group_kind, d, data):
        try:
            raw = data["atoms"]
        except (KeyError, TypeError):
            raise ValidationError("measure needs an 'atoms' list") from None
        atoms = []
        for i, atom in enumerate(raw):
            try:
                atoms.append((atom["weight"], AffineMap.from_dict(atom, d)))
            except KeyError as exc:
                raise ValidationError(f"atom {i} is missing {exc.args[0]!r}") from None
        return cls(group_kind, tuple(atoms))


class WordSampler:
    """Deterministic source of i.i.d. atom indices (a word ``b_1, b_2, ...``).

    The stream is a PCG64 generator keyed by ``(seed, *keys)``; replicas use
    ``keys=(stream_tag, replica_index)`` so that every replica is reproducible on
    its own, independently of how replicas are scheduled.
    """

    def __init__(self, seed, *keys):
        self.seed = check_seed(seed)
        self.keys = tuple(int(k) for k in keys)
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, *self.keys])))

    def indices(self, mu, n):
        """Next ``n`` atom indices drawn from the weights of ``mu``."""
        cdf = np.cumsum(mu.weights)
        u = self.rng.random(n)
        return np.minimum(np.searchsorted(cdf, u, side="right"), mu.n_atoms - 1)


def replica_words(mu, n_steps, seed, stream, replicas):
    """Words for the given replica indices, stacked as an ``(len(replicas), n_steps)`` array."""
    return np.stack([WordSampler(seed, stream, r).indices(mu, n_steps) for r in replicas])


def sample(mu, sampler):
    """Draw one increment of the walk."""
    check_measure(mu)
    i = int(sampler.indices(mu, 1)[0])
    return mu.atoms[i][1]


def embed_gl_arrays(linear, translation):
    linear = np.asarray(linear, dtype=np.float64)
    translation = np.asarray(translation, dtype=np.float64)
    d = linear.shape[-1]
    out = np.zeros(linear.shape[:-2] + (d + 1, d + 1))
    out[..., :d, :d] = linear
    out[..., :d, d] = translation
    out[..., d, d] = 1.0
    return out


def embed_gl(g):
    """(d+1) x (d+1) matrix of ``g`` preserving the hyperplane {(w, 1)}."""
    return embed_gl_arrays(g.linear, g.translation)


def is_symmetric(mu, atol=1e-9):
    """True iff the measure equals its image under inversion."""
    check_measure(mu)
    inverses = [(w, g.inverse()) for w, g in mu.atoms]
    used = [False] * mu.n_atoms
    for w, ginv in inverses:
        for j, (wj, h) in enumerate(mu.atoms):
            if not used[j] and abs(wj - w) <= WEIGHT_ATOL and h.allclose(ginv, atol=atol):
                used[j] = True
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class ProximalityCertificate:
    word: tuple
    gap_ratio: float


def proximality_certificate(mu, p, trials=200, length=20, seed=0, min_gap=1.05):
    """Search for a product whose Λ^p image has a simple dominant eigenvalue.

    Trial ``t`` tests a random word of length ``1 + t % length`` built from the
    linear parts. Returns a :class:`ProximalityCertificate` holding the word and its
    gap ratio ``|l_1| / |l_2|``, or ``None`` if no trial qualified. ``None`` proves
    nothing.
    """
    check_measure(mu)
    if not 1 <= p <= mu.d:
        raise ValidationError(f"representation degree must satisfy 1 <= p <= {mu.d}")
    trials = check_positive_int(trials, "trials")
    length = check_positive_int(length, "length")
    sampler = WordSampler(seed, 0x5052)
    lin = _exterior(mu.linear_parts, p)
    for t in range(trials):
        word = tuple(int(i) for i in sampler.indices(mu, 1 + t % length))
        m = np.eye(lin.shape[-1])
        for i in word:
            m = m @ lin[i]
        if m.shape[0] == 1:
            return ProximalityCertificate(word, float("inf"))
        mods = np.sort(np.abs(np.linalg.eigvals(m)))[::-1]
        if mods[1] == 0 or mods[0] >= min_gap * mods[1]:
            gap = float("inf") if mods[1] == 0 else float(mods[0] / mods[1])
            return ProximalityCertificate(word, gap)
    return None

"""Forward walks, recurrence diagnostics, backward coupling and block-ratio series."""

from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_chunks
from ._validation import (
    check_degree,
    check_measure,
    check_positive_float,
    check_positive_int,
    check_seed,
)
from .exceptions import BlockStructureViolated, ValidationError
from .grassmannian import BLOCK_RTOL, act_arrays, block_factors, lifted_wedges, proj_distance_arrays
from .group import is_symmetric, replica_words
from .limit_laws import combined_se
from .linalg import _exterior, op_norm

STREAM_CESARO = 21
STREAM_COUPLING = 22
STREAM_RATIO = 23

DIST_CAP = 1e300
RECURRENT_MASS = 0.9
TRANSIENT_MASS = 0.1
COUPLING_THRESHOLD = 1e-6
VERDICT_RULE = "terminal Cesaro mass: >= 0.9 recurrent-like, <= 0.1 transient-like, else inconclusive"


def log_grid(n_max, size=60):
    """Increasing integer grid from 1 to ``n_max``, roughly log-spaced."""
    return np.unique(np.geomspace(1, n_max, size).round().astype(int))


def _check_start(mu, x0):
    if x0.d != mu.d:
        raise ValidationError(f"start subspace lives in R^{x0.d}, measure in R^{mu.d}")


def _forward_distances(mu, x0, words):
    # Replicas whose distance leaves [0, 1e300] are frozen at the cap.
    n_rep, n_steps = words.shape
    linear, trans = np.asarray(mu.linear_parts), np.asarray(mu.translations)
    base = np.tile(x0.base, (n_rep, 1))
    frame = np.tile(x0.frame, (n_rep, 1, 1))
    out = np.empty((n_rep, n_steps))
    capped = np.zeros(n_rep, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(n_steps):
            idx = words[:, n]
            base, frame = act_arrays(linear[idx], trans[idx], base, frame)
            dist = np.linalg.norm(base, axis=1)
            bad = ~(dist <= DIST_CAP)
            if bad.any():
                capped |= bad
                base[bad] = 0.0
                if frame.shape[-1]:
                    frame[bad] = x0.frame
            out[:, n] = np.where(capped, DIST_CAP, dist)
    return out, capped


@dataclass(frozen=True, eq=False)
class Trajectory:
    dist: np.ndarray
    capped: bool


def run_forward(mu, x0, n_steps, sampler):
    """Distances to the origin of ``x_n = b_n x_{n-1}``, ``n = 1..N``."""
    check_measure(mu)
    _check_start(mu, x0)
    n_steps = check_positive_int(n_steps, "n_steps")
    words = sampler.indices(mu, n_steps)[None, :]
    dist, capped = _forward_distances(mu, x0, words)
    return Trajectory(dist[0], bool(capped[0]))


@dataclass(frozen=True, eq=False)
class RecurrenceReport:
    radius: float
    horizon: int
    replicas: int
    n_grid: np.ndarray
    mass_curve: np.ndarray
    stderr: np.ndarray
    verdict: str
    capped_fraction: float
    thresholds: dict = field(default_factory=lambda: {
        "recurrent": RECURRENT_MASS, "transient": TRANSIENT_MASS, "rule": VERDICT_RULE})

    def to_dict(self):
        return {
            "radius": self.radius,
            "horizon": self.horizon,
            "replicas": self.replicas,
            "terminal_mass": float(self.mass_curve[-1]),
            "terminal_stderr": float(self.stderr[-1]),
            "verdict": self.verdict,
            "capped_fraction": self.capped_fraction,
            "thresholds": dict(self.thresholds),
        }


def mass_verdict(terminal):
    if terminal >= RECURRENT_MASS:
        return "recurrent-like"
    if terminal <= TRANSIENT_MASS:
        return "transient-like"
    return "inconclusive"


def cesaro_mass(mu, x0, n_steps, radius=10.0, replicas=256, seed=0, grid=None, n_jobs=None):
    """Monte Carlo Cesàro mass ``(1/n) sum_{j<=n} P(dist(x_j) <= R)`` on a log grid."""
    check_measure(mu)
    _check_start(mu, x0)
    n_steps = check_positive_int(n_steps, "n_steps")
    radius = check_positive_float(radius, "radius")
    replicas = check_positive_int(replicas, "replicas", minimum=100)
    seed = check_seed(seed)
    grid = log_grid(n_steps) if grid is None else np.asarray(grid, dtype=int)

    def run(start, stop):
        words = replica_words(mu, n_steps, seed, STREAM_CESARO, range(start, stop))
        dist, capped = _forward_distances(mu, x0, words)
        frac = np.cumsum(dist <= radius, axis=1)[:, grid - 1] / grid
        return np.column_stack([frac, capped])

    res = map_chunks(run, replicas, n_jobs)
    frac, capped = res[:, :-1], res[:, -1]
    mass = frac.mean(axis=0)
    se = frac.std(axis=0, ddof=1) / np.sqrt(replicas)
    return RecurrenceReport(radius, n_steps, replicas, grid, mass, se,
                            mass_verdict(float(mass[-1])), float(capped.mean()))


@dataclass(frozen=True, eq=False)
class CouplingReport:
    n_steps: int
    words: int
    distances: np.ndarray
    threshold: float = COUPLING_THRESHOLD

    @property
    def terminal(self):
        return self.distances[:, -1]

    @property
    def coupled_fraction(self):
        return float(np.mean(self.terminal <= self.threshold))

    def to_dict(self):
        return {
            "n_steps": self.n_steps,
            "words": self.words,
            "threshold": self.threshold,
            "coupled_fraction": self.coupled_fraction,
            "median_terminal_distance": float(np.median(self.terminal)),
        }


def backward_coupling(mu, x0, y0, n_steps, words=100, seed=0, n_jobs=None):
    """Projective distance between ``b_1 ... b_n x0`` and ``b_1 ... b_n y0`` for each word.

    The backward products act on Plücker vectors in V; for a Dirac limit
    measure the two images merge.
    """
    check_measure(mu)
    _check_start(mu, x0)
    _check_start(mu, y0)
    if x0.k != y0.k:
        raise ValidationError("starts must have the same dimension k")
    n_steps = check_positive_int(n_steps, "n_steps")
    words = check_positive_int(words, "words")
    seed = check_seed(seed)
    factors = _exterior(mu.embedded(), x0.k + 1)
    p0 = lifted_wedges(x0.base, x0.frame)
    q0 = lifted_wedges(y0.base, y0.frame)
    dim = len(p0)

    def run(start, stop):
        w = replica_words(mu, n_steps, seed, STREAM_COUPLING, range(start, stop))
        prod = np.broadcast_to(np.eye(dim), (stop - start, dim, dim)).copy()
        out = np.empty((stop - start, n_steps))
        for n in range(n_steps):
            prod = prod @ factors[w[:, n]]
            prod /= np.sqrt(np.einsum("rij,rij->r", prod, prod))[:, None, None]
            out[:, n] = proj_distance_arrays(prod @ p0, prod @ q0)
        return out

    return CouplingReport(n_steps, words, map_chunks(run, words, n_jobs))


@dataclass(frozen=True, eq=False)
class RatioSeries:
    """``T_n = log||a_n|| - log||d_n||`` for every n and word, with running suprema."""

    k: int
    n_steps: int
    T: np.ndarray
    n_grid: np.ndarray

    @property
    def running_sup(self):
        return np.maximum.accumulate(self.T, axis=1)

    @property
    def T_values(self):
        return self.T[:, self.n_grid - 1]

    @property
    def runsup_values(self):
        return self.running_sup[:, self.n_grid - 1]

    def runsup_at(self, n):
        return self.running_sup[:, n - 1]

    def to_dict(self):
        sup = self.running_sup
        return {
            "k": self.k,
            "n_steps": self.n_steps,
            "words": int(self.T.shape[0]),
            "terminal_T": self.T[:, -1].tolist(),
            "terminal_runsup": sup[:, -1].tolist(),
            "runsup_growth_last_decade": (
                (sup[:, -1] - sup[:, max(self.n_steps // 10, 1) - 1]).tolist()
            ),
        }


def ratio_series(mu, k, n_steps, words=16, seed=0, grid=None, n_jobs=None):
    """Block-ratio series of the backward products ``Λ^{k+1}(b_1) ... Λ^{k+1}(b_n)``.

    The diagonal blocks are multiplied separately with their own log scales so
    the ratio survives arbitrarily long horizons; the full product is carried
    along to assert that its lower-left block stays zero.
    """
    check_measure(mu)
    k = check_degree(k, mu.d)
    n_steps = check_positive_int(n_steps, "n_steps")
    words = check_positive_int(words, "words")
    seed = check_seed(seed)
    full, a, _, dblk = block_factors(mu, k)
    r = a.shape[-1]
    grid = log_grid(n_steps) if grid is None else np.asarray(grid, dtype=int)

    def run(start, stop):
        w = replica_words(mu, n_steps, seed, STREAM_RATIO, range(start, stop))
        m = stop - start
        pa = np.broadcast_to(np.eye(r), (m, r, r)).copy()
        pd = np.broadcast_to(np.eye(dblk.shape[-1]), (m,) + dblk.shape[1:]).copy()
        pf = np.broadcast_to(np.eye(full.shape[-1]), (m,) + full.shape[1:]).copy()
        la = np.zeros(m)
        ld = np.zeros(m)
        out = np.empty((m, n_steps))
        for n in range(n_steps):
            idx = w[:, n]
            pa = pa @ a[idx]
            pd = pd @ dblk[idx]
            pf = pf @ full[idx]
            sa = np.sqrt(np.einsum("rij,rij->r", pa, pa))
            sd = np.sqrt(np.einsum("rij,rij->r", pd, pd))
            sf = np.abs(pf).max(axis=(1, 2))
            pa /= sa[:, None, None]
            pd /= sd[:, None, None]
            pf /= sf[:, None, None]
            if np.abs(pf[:, r:, :r]).max(initial=0.0) > BLOCK_RTOL:
                raise BlockStructureViolated(f"lower-left block of the product is nonzero at n={n + 1}")
            la += np.log(sa)
            ld += np.log(sd)
            out[:, n] = (la + np.log(op_norm(pa))) - (ld + np.log(op_norm(pd)))
        return out

    return RatioSeries(k, n_steps, map_chunks(run, words, n_jobs), grid)


@dataclass(frozen=True)
class Classification:
    k: int
    verdict: str
    z_score: float
    estimate: float
    stderr: float
    basis: str

    @property
    def confidence(self):
        return abs(self.z_score)

    def to_dict(self):
        return {
            "k": self.k,
            "verdict": self.verdict,
            "z_score": self.z_score,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "basis": self.basis,
        }


def classify(mu, k, spectrum, z_threshold=3.0, use_symmetry=True):
    """Recurrent / transient verdict from the sign of the (k+1)-th exponent.

    Transient if ``lambda_{k+1} - 3 SE > 0``, recurrent if ``lambda_{k+1} + 3 SE < 0``,
    otherwise inconclusive. For a symmetric measure the exponents satisfy
    ``lambda_p = -lambda_{d+1-p}`` exactly, so the estimate is antisymmetrized and
    the middle exponent of an odd dimension is exactly zero (a transient case).
    """
    check_measure(mu)
    d = mu.d
    k = check_degree(k, d)
    lam, se = spectrum.exponents, spectrum.stderr
    if len(lam) != d:
        raise ValidationError("spectrum dimension does not match the measure")
    basis = "estimate"
    est, err = float(lam[k]), float(se[k])
    if use_symmetry and is_symmetric(mu):
        partner = d - 1 - k
        if partner == k:
            return Classification(k, "transient", 0.0, 0.0, 0.0, "symmetry")
        basis = "antisymmetrized"
        est = float(lam[k] - lam[partner]) / 2
        err = combined_se(se[k], se[partner]) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        z = float(np.float64(est) / np.float64(err))
    if z > z_threshold:
        verdict = "transient"
    elif z < -z_threshold:
        verdict = "recurrent"
    else:
        verdict = "inconclusive"
    return Classification(k, verdict, z, est, err, basis)

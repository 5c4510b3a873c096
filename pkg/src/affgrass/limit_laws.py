"""Lyapunov spectra, block exponents and Cartan-projection limit laws.

Everything here is specialized to products of GL blocks: the Cartan projection
of a matrix is its sorted vector of log singular values, the highest-weight
functionals are log operator norms, and the opposition involution is
negate-and-reverse. Long products are handled through exterior powers with
per-step rescaling, so ``log s_1 + ... + log s_p`` of ``b_1 ... b_n`` is exact up
to rounding even when the singular values span thousands of orders of
magnitude.

Standard errors are always taken from the dispersion across independent
replicas.
"""

from dataclasses import dataclass, replace

import numpy as np

from ._parallel import map_chunks
from ._validation import check_degree, check_measure, check_positive_int, check_seed
from .grassmannian import block_factors
from .group import is_symmetric, replica_words
from .linalg import _exterior, _qr_step, product_log_norms

STREAM_SPECTRUM = 11
STREAM_CROSSCHECK = 12
STREAM_BLOCKS = 13
STREAM_SIGMA = 14
STREAM_LIL = 15

Z_CHECK = 3.0


def _mean_se(samples):
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    if n < 2:
        return mean, np.full_like(mean, np.nan)
    return mean, samples.std(axis=0, ddof=1) / np.sqrt(n)


def combined_se(*ses):
    return float(np.sqrt(sum(float(s) ** 2 for s in ses)))


@dataclass(frozen=True, eq=False)
class LyapunovSpectrum:
    exponents: np.ndarray
    stderr: np.ndarray
    n_steps: int
    replicas: int

    @property
    def d(self):
        return len(self.exponents)

    def to_dict(self):
        return {
            "lambda": self.exponents.tolist(),
            "stderr": self.stderr.tolist(),
            "n_steps": self.n_steps,
            "replicas": self.replicas,
        }


def _qr_chunk(linear, mu, n_steps, seed):
    d = mu.d

    def run(start, stop):
        words = replica_words(mu, n_steps, seed, STREAM_SPECTRUM, range(start, stop))
        q = np.broadcast_to(np.eye(d), (stop - start, d, d)).copy()
        acc = np.zeros((stop - start, d))
        for n in range(n_steps):
            q, logdiag = _qr_step(linear[words[:, n]] @ q)
            acc += logdiag
        return acc / n_steps

    return run


def lyapunov_spectrum(mu, n_steps=10_000, replicas=64, seed=0, n_jobs=None):
    """QR-accumulation estimate of the Lyapunov exponents of the linear parts.

    Each replica re-orthonormalizes an identity frame after every step and sums
    ``log|diag R|``; replica means are sorted non-increasingly.
    """
    check_measure(mu)
    n_steps = check_positive_int(n_steps, "n_steps")
    replicas = check_positive_int(replicas, "replicas")
    seed = check_seed(seed)
    samples = map_chunks(_qr_chunk(np.asarray(mu.linear_parts), mu, n_steps, seed), replicas, n_jobs)
    mean, se = _mean_se(samples)
    order = np.argsort(-mean, kind="stable")
    return LyapunovSpectrum(mean[order], se[order], n_steps, replicas)


def _log_norm_samples(factors, mu, n_steps, seed, stream, replicas, n_jobs, record=None):
    record = [n_steps] if record is None else list(record)

    def run(start, stop):
        words = replica_words(mu, n_steps, seed, stream, range(start, stop))
        return product_log_norms(factors, words, record)

    return map_chunks(run, replicas, n_jobs)


@dataclass(frozen=True)
class CrossCheck:
    p: int
    value: float
    stderr: float

    def to_dict(self):
        return {"p": self.p, "value": self.value, "stderr": self.stderr}


def spectrum_crosscheck(mu, p, n_steps=10_000, replicas=64, seed=0, n_jobs=None):
    """``(1/N) log||Λ^p(b_1 ... b_N)||`` averaged over replicas; estimates lambda_1 + ... + lambda_p."""
    check_measure(mu)
    if not 1 <= p <= mu.d or mu.d > 6:
        raise ValueError(f"need 1 <= p <= d <= 6, got p={p}, d={mu.d}")
    n_steps = check_positive_int(n_steps, "n_steps")
    factors = _exterior(np.asarray(mu.linear_parts), p)
    vals = _log_norm_samples(factors, mu, n_steps, check_seed(seed), STREAM_CROSSCHECK,
                             check_positive_int(replicas, "replicas"), n_jobs)[:, 0] / n_steps
    mean, se = _mean_se(vals)
    return CrossCheck(int(p), float(mean), float(se))


@dataclass(frozen=True)
class BlockExponents:
    k: int
    lambda_w: float
    lambda_wprime: float
    se_w: float
    se_wprime: float
    difference: float
    se_difference: float

    def to_dict(self):
        return {
            "k": self.k,
            "lambda_W": self.lambda_w,
            "lambda_Wprime": self.lambda_wprime,
            "se_W": self.se_w,
            "se_Wprime": self.se_wprime,
            "difference": self.difference,
            "se_difference": self.se_difference,
        }


def block_exponents(mu, k, n_steps=10_000, replicas=64, seed=0, n_jobs=None):
    """Top exponents of the diagonal blocks a_n (on W) and d_n (on W_s ~ Λ^k R^d)."""
    check_measure(mu)
    k = check_degree(k, mu.d)
    n_steps = check_positive_int(n_steps, "n_steps")
    replicas = check_positive_int(replicas, "replicas")
    seed = check_seed(seed)
    _, a, _, dblk = block_factors(mu, k)

    def run(start, stop):
        words = replica_words(mu, n_steps, seed, STREAM_BLOCKS, range(start, stop))
        la = product_log_norms(a, words, [n_steps])[:, 0]
        ld = product_log_norms(dblk, words, [n_steps])[:, 0]
        return np.stack([la, ld, la - ld], axis=1) / n_steps

    mean, se = _mean_se(map_chunks(run, replicas, n_jobs))
    return BlockExponents(k, float(mean[0]), float(mean[1]), float(se[0]), float(se[1]),
                          float(mean[2]), float(se[2]))


def opposition_involution(v):
    """Negate and reverse: maps kappa(g) to kappa(g^{-1})."""
    return -np.asarray(v, dtype=np.float64)[::-1]


def cartan_of_products(linear, words, record):
    """Cartan vectors of ``b_1 ... b_n`` for ``n`` in ``record``; shape (R, len(record), d).

    ``kappa_p = log||Λ^p M|| - log||Λ^{p-1} M||``, each exterior product tracked
    with its own scale.
    """
    d = linear.shape[-1]
    cumulative = [np.zeros((words.shape[0], len(record)))]
    for p in range(1, d + 1):
        cumulative.append(product_log_norms(_exterior(linear, p), words, record))
    cum = np.stack(cumulative, axis=-1)
    return np.diff(cum, axis=-1)


@dataclass(frozen=True, eq=False)
class LimitLawReport:
    sigma_hat: np.ndarray
    sigma_se: np.ndarray
    phi_hat: np.ndarray
    n_steps: int
    replicas: int
    lil_n_grid: np.ndarray = None
    lil_points: np.ndarray = None
    containment_ratio: float = None
    exit_fraction: float = None
    dilation: float = 1.5
    exit_dilation: float = 0.5

    def to_dict(self):
        out = {
            "sigma": self.sigma_hat.tolist(),
            "sigma_stderr": self.sigma_se.tolist(),
            "phi": self.phi_hat.tolist(),
            "n_steps": self.n_steps,
            "replicas": self.replicas,
        }
        if self.containment_ratio is not None:
            out.update({
                "containment_ratio": self.containment_ratio,
                "exit_fraction": self.exit_fraction,
                "dilation": self.dilation,
                "exit_dilation": self.exit_dilation,
                "n_grid": self.lil_n_grid.tolist(),
            })
        return out


def sigma_and_phi(mu, n_steps=10_000, replicas=64, seed=0, n_jobs=None):
    """Lyapunov vector and covariance 2-tensor from the Cartan projection of products.

    ``sigma_hat`` is the replica mean of ``kappa(b_1 ... b_N) / N``; ``phi_hat`` is the
    empirical covariance of ``(kappa - N sigma_hat) / sqrt(N)`` across replicas.
    """
    check_measure(mu)
    n_steps = check_positive_int(n_steps, "n_steps")
    replicas = check_positive_int(replicas, "replicas")
    seed = check_seed(seed)
    linear = np.asarray(mu.linear_parts)

    def run(start, stop):
        words = replica_words(mu, n_steps, seed, STREAM_SIGMA, range(start, stop))
        return cartan_of_products(linear, words, [n_steps])[:, 0, :]

    kappa = map_chunks(run, replicas, n_jobs)
    sigma, se = _mean_se(kappa / n_steps)
    if replicas > 1:
        centred = (kappa - n_steps * sigma) / np.sqrt(n_steps)
        phi = centred.T @ centred / (replicas - 1)
    else:
        phi = np.zeros((mu.d, mu.d))
    phi = (phi + phi.T) / 2
    return LimitLawReport(sigma, se, phi, n_steps, replicas)


def lil_grid(n_max, n_min=100, size=60):
    n_min = min(n_min, n_max)
    return np.unique(np.geomspace(max(n_min, 3), n_max, size).round().astype(int))


def phi_quadratic_form(points, phi, rtol=1e-10):
    """``x^T phi^+ x`` for each point; ``inf`` for points off the span of ``phi``."""
    vals, vecs = np.linalg.eigh(phi)
    keep = vals > rtol * max(vals.max(initial=0.0), 0.0) if vals.size else vals
    if not np.any(keep):
        norms = np.linalg.norm(points, axis=-1)
        return np.where(norms <= 1e-9, 0.0, np.inf)
    coords = points @ vecs
    q = np.sum(coords[..., keep] ** 2 / vals[keep], axis=-1)
    off = np.linalg.norm(coords[..., ~keep], axis=-1)
    scale = np.maximum(1.0, np.linalg.norm(points, axis=-1))
    return np.where(off <= 1e-6 * scale, q, np.inf)


def lil_diagnostic(mu, n_max=100_000, words=32, seed=0, law=None, dilation=1.5,
                   exit_dilation=0.5, n_jobs=None):
    """Iterated-logarithm excursions of the Cartan projection of ``b_1 ... b_n``.

    Points ``(kappa(b_1 ... b_n) - n sigma_hat) / sqrt(2 n log log n)`` are formed on
    a log-spaced grid. ``containment_ratio`` is the fraction of points inside the
    ``dilation``-scaled unit ball of ``phi_hat``; ``exit_fraction`` is the fraction
    of words with a point outside the ``exit_dilation`` ball during the last
    decade of the grid. Returns ``law`` (estimated if not given) with the LIL
    fields filled in.
    """
    check_measure(mu)
    n_max = check_positive_int(n_max, "n_max", minimum=3)
    words = check_positive_int(words, "words")
    seed = check_seed(seed)
    if law is None:
        law = sigma_and_phi(mu, n_steps=min(n_max, 10_000), replicas=64, seed=seed, n_jobs=n_jobs)
    grid = lil_grid(n_max)
    linear = np.asarray(mu.linear_parts)

    def run(start, stop):
        w = replica_words(mu, n_max, seed, STREAM_LIL, range(start, stop))
        return cartan_of_products(linear, w, grid)

    kappa = map_chunks(run, words, n_jobs)
    scale = np.sqrt(2 * grid * np.log(np.log(grid)))
    points = (kappa - grid[None, :, None] * law.sigma_hat) / scale[None, :, None]
    q = phi_quadratic_form(points, law.phi_hat)
    containment = float(np.mean(q <= dilation ** 2))
    late = grid >= n_max / 10
    exits = np.any(q[:, late] > exit_dilation ** 2, axis=1)
    return replace(law, lil_n_grid=grid, lil_points=points, containment_ratio=containment,
                   exit_fraction=float(np.mean(exits)), dilation=dilation,
                   exit_dilation=exit_dilation)


def _status(ok):
    return "pass" if ok else "flag"


def spectrum_checks(mu, spectrum, crosschecks=(), blocks=(), law=None):
    """Consistency checks on a spectrum estimate; each entry carries a pass/flag/n/a status."""
    lam, se = spectrum.exponents, spectrum.stderr
    d = len(lam)
    checks = {}
    if is_symmetric(mu):
        worst = max(abs(lam[p] + lam[d - 1 - p]) - Z_CHECK * combined_se(se[p], se[d - 1 - p])
                    for p in range(d))
        checks["symmetry"] = {"status": _status(worst <= 0), "margin": float(worst)}
    else:
        checks["symmetry"] = {"status": "n/a"}
    dets = np.abs(np.linalg.det(mu.linear_parts))
    if np.allclose(dets, 1.0, rtol=0, atol=1e-9):
        total = float(np.sum(lam))
        ok = abs(total) <= max(Z_CHECK * combined_se(*se), 1e-12)
        checks["unimodularity"] = {"status": _status(ok), "sum": total}
    else:
        checks["unimodularity"] = {"status": "n/a"}
    if crosschecks:
        rows = []
        for cc in crosschecks:
            qr_sum = float(np.sum(lam[: cc.p]))
            tol = Z_CHECK * combined_se(cc.stderr, *se[: cc.p])
            rows.append({"p": cc.p, "exterior": cc.value, "qr": qr_sum,
                         "ok": bool(abs(cc.value - qr_sum) <= tol)})
        checks["crosscheck"] = {"status": _status(all(r["ok"] for r in rows)), "rows": rows}
    else:
        checks["crosscheck"] = {"status": "n/a"}
    if blocks:
        rows = []
        for b in blocks:
            tol = Z_CHECK * combined_se(b.se_difference, se[b.k])
            rows.append({"k": b.k, "difference": b.difference, "lambda_k+1": float(lam[b.k]),
                         "ok": bool(abs(b.difference - lam[b.k]) <= tol)})
        checks["prop21c"] = {"status": _status(all(r["ok"] for r in rows)), "rows": rows}
    else:
        checks["prop21c"] = {"status": "n/a"}
    if law is not None:
        tol = [Z_CHECK * combined_se(a, b) for a, b in zip(law.sigma_se, se)]
        ok = bool(np.all(np.abs(law.sigma_hat - lam) <= tol))
        checks["sigma"] = {"status": _status(ok)}
    gaps = lam[:-1] - lam[1:]
    gap_tol = [Z_CHECK * combined_se(a, b) for a, b in zip(se[:-1], se[1:])]
    checks["simplicity"] = {"status": _status(bool(np.all(gaps > gap_tol)))}
    return checks

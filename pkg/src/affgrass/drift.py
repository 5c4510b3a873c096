"""Empirical verification of the drift inequality ``P^{n0} u_delta <= a u_delta + b``.

The constants follow the contraction argument: with ``gap = lambda'_1 - lambda_1``
(top exponents on W_s and W),

* ``eps = gap / 10`` (strictly below ``gap / 8``);
* ``n0`` is the first n from which the normalized log-growth of ``a_g`` on W and of
  ``d_g`` on W_s stays within ``eps`` of the block exponents, uniformly over a
  fixed set of test directions;
* ``1/c = 4 / (n0 gap) * E ||c_g|| ||a_g^{-1}||`` over ``g ~ mu^{*n0}``, and
  ``K = {||w'|| >= c ||w||} = {u_1 <= 1/c}``;
* ``delta`` minimizes ``1 - delta kappa + delta^2 M`` with ``kappa = n0 gap / 2`` and
  ``M`` the empirical second-order remainder of ``exp(delta L)``, ``L`` the
  log-ratio ``log u_1(gx) / u_1(x)``.

Test states are affine subspaces with fixed (seeded) orientations placed at
log-spaced distances outside K; the ratio ``E[u_delta(gx)] / u_delta(x)`` is
estimated for each state from the same ``samples`` draws of ``g``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import (
    check_degree,
    check_measure,
    check_positive_float,
    check_positive_int,
    check_seed,
)
from .exceptions import RecipeFailure
from .grassmannian import block_factors, block_order, lifted_wedges
from .group import WordSampler
from .limit_laws import block_exponents
from .linalg import op_norm

STREAM_N0 = 31
STREAM_DRIFT = 32
STREAM_STATES = 33

N_CELLS = 20
CELL_DECADES = 6.0
N_DIRECTIONS = 8
N0_MAX = 64
DELTA_HALVINGS = 8


@dataclass(frozen=True, eq=False)
class DriftReport:
    k: int
    delta: float
    n0: int
    c: float
    K_radius: float
    epsilon: float
    kappa: float
    M_hat: float
    a_pred: float
    a_hat: float
    a_hat_stderr: float
    b_hat: float
    cell_lo: np.ndarray
    cell_hi: np.ndarray
    ratio_mean: np.ndarray
    ratio_stderr: np.ndarray
    n_samples: int
    lambda_w: float
    lambda_wprime: float
    delta_source: str
    n0_source: str
    recipe_ok: bool

    def to_dict(self):
        names = ("k", "delta", "n0", "c", "K_radius", "epsilon", "kappa", "M_hat", "a_pred",
                 "a_hat", "a_hat_stderr", "b_hat", "n_samples", "lambda_w", "lambda_wprime",
                 "delta_source", "n0_source", "recipe_ok")
        out = {name: getattr(self, name) for name in names}
        out["lambda_W"] = out.pop("lambda_w")
        out["lambda_Wprime"] = out.pop("lambda_wprime")
        return out

    def cell_rows(self):
        return [
            (lo, hi, m, s, self.n_samples)
            for lo, hi, m, s in zip(self.cell_lo, self.cell_hi, self.ratio_mean, self.ratio_stderr)
        ]


def _unit_directions(dim, rng, extra=4):
    dirs = [np.eye(dim)[i] for i in range(dim)]
    for _ in range(extra):
        v = rng.standard_normal(dim)
        dirs.append(v / np.linalg.norm(v))
    return np.array(dirs)


def _words(mu, seed, stream, samples, length):
    # Row-major draws: the first S rows do not depend on the total sample count.
    return WordSampler(seed, stream).indices(mu, samples * length).reshape(samples, length)


def choose_n0(mu, k, lambda_w, lambda_wprime, epsilon, samples=2000, seed=0, n_max=N0_MAX):
    """Smallest n after which both block growth rates stay within ``epsilon`` (up to ``n_max``).

    Returns ``(n0, converged)``.
    """
    _, a, _, dblk = block_factors(mu, k)
    rng = np.random.default_rng([seed, STREAM_STATES, 1])
    dirs_w = _unit_directions(a.shape[-1], rng)
    dirs_d = _unit_directions(dblk.shape[-1], rng)
    words = _words(mu, seed, STREAM_N0, samples, n_max)
    ok = np.ones(n_max, dtype=bool)
    for blocks, dirs, target in ((a, dirs_w, lambda_w), (dblk, dirs_d, lambda_wprime)):
        v = np.broadcast_to(dirs.T, (samples,) + dirs.T.shape).copy()
        acc = np.zeros((samples, dirs.shape[0]))
        for j in range(n_max):
            v = blocks[words[:, j]] @ v
            s = np.linalg.norm(v, axis=1)
            v /= s[:, None, :]
            acc += np.log(s)
            mean = acc.mean(axis=0) / (j + 1)
            ok[j] &= bool(np.all(np.abs(mean - target) <= epsilon))
    # First n such that every later n up to n_max also qualifies.
    tail = np.logical_and.accumulate(ok[::-1])[::-1]
    if not tail.any():
        return n_max, False
    return int(np.argmax(tail)) + 1, True


def _state_vectors(d, k, seed):
    # Fixed orientations: W-part of a unit-distance state and its W_s-part.
    rng = np.random.default_rng([seed, STREAM_STATES, 0])
    perm = block_order(d, k)
    w_parts, ws_parts = [], []
    for _ in range(N_DIRECTIONS):
        o, _ = np.linalg.qr(rng.standard_normal((d, d)))
        frame, b = o[:, :k], o[:, k]
        at_one = lifted_wedges(b, frame)[perm]
        at_zero = lifted_wedges(np.zeros(d), frame)[perm]
        w_parts.append(at_one - at_zero)
        ws_parts.append(at_zero)
    return np.array(w_parts), np.array(ws_parts)


def drift_verify(mu, k, delta=None, n0=None, c=None, samples=2000, seed=0, blocks=None,
                 block_steps=2000, strict=False):
    """Estimate the drift constants for ``u_delta`` outside the recipe compact set K.

    ``a_hat`` is the largest per-cell estimate of ``E[u_delta(gx)] / u_delta(x)`` plus
    two standard errors; ``b_hat`` is the largest estimate of ``P^{n0} u_delta`` on
    states inside K. ``delta``, ``n0`` and ``c`` are derived by the recipe unless
    given. If the recipe value of ``delta`` does not give ``a_hat < 1`` it is halved
    up to eight times; ``recipe_ok`` records the outcome, and ``strict=True``
    raises :class:`RecipeFailure` instead.
    """
    check_measure(mu)
    d = mu.d
    k = check_degree(k, d)
    samples = check_positive_int(samples, "samples", minimum=2)
    seed = check_seed(seed)
    if blocks is None:
        blocks = block_exponents(mu, k, n_steps=block_steps, replicas=64, seed=seed)
    gap = blocks.lambda_wprime - blocks.lambda_w
    if not gap > 0:
        raise RecipeFailure(f"drift recipe needs lambda'_1 > lambda_1 (got gap {gap:.3g})")
    epsilon = gap / 10

    if n0 is None:
        n0, converged = choose_n0(mu, k, blocks.lambda_w, blocks.lambda_wprime, epsilon,
                                  samples=samples, seed=seed)
        n0_source = "recipe" if converged else "recipe-capped"
    else:
        n0 = check_positive_int(n0, "n0")
        n0_source = "given"

    full, a_atoms, _, _ = block_factors(mu, k)
    r = a_atoms.shape[-1]
    words = _words(mu, seed, STREAM_DRIFT, samples, n0)
    g = full[words[:, 0]]
    for j in range(1, n0):
        g = g @ full[words[:, j]]
    ag, cg = g[:, :r, :r], g[:, :r, r:]

    if c is None:
        norm_c = op_norm(cg)
        norm_ainv = op_norm(np.linalg.inv(ag))
        c_inv = 4.0 / (n0 * gap) * float(np.mean(norm_c * norm_ainv))
        c = 1.0 / c_inv if c_inv > 0 else np.inf
    else:
        c = check_positive_float(c, "c")
    k_radius = 1.0 / c if np.isfinite(c) else 1.0

    w_dir, ws_dir = _state_vectors(d, k, seed)
    gw = np.einsum("sij,nj->sni", g, w_dir)
    gws = np.einsum("sij,nj->sni", g, ws_dir)

    edges = k_radius * np.logspace(0.0, CELL_DECADES, N_CELLS + 1)
    lo, hi = edges[:-1], edges[1:]
    radii = np.stack([lo, np.sqrt(lo * hi)], axis=1)  # (cells, 2)

    def log_ratio(rad):
        v = rad[:, None, None, None] * gw[None] + gws[None]
        u1 = np.linalg.norm(v[..., :r], axis=-1) / np.linalg.norm(v[..., r:], axis=-1)
        return np.log(u1 / rad[:, None, None])

    L = log_ratio(radii.ravel())  # (cells*2, S, dirs)
    remainder = np.mean(L ** 2 / 2 * np.exp(np.maximum(L, 0.0)), axis=1)
    m_hat = float(remainder.max())
    kappa = n0 * gap / 2

    def evaluate(dlt):
        vals = np.exp(dlt * L)
        mean = vals.mean(axis=1)
        se = vals.std(axis=1, ddof=1) / np.sqrt(samples)
        mean = mean.reshape(N_CELLS, -1)
        se = se.reshape(N_CELLS, -1)
        worst = np.argmax(mean + 2 * se, axis=1)
        rows = np.arange(N_CELLS)
        cell_mean, cell_se = mean[rows, worst], se[rows, worst]
        top = int(np.argmax(cell_mean + 2 * cell_se))
        return cell_mean, cell_se, float(cell_mean[top] + 2 * cell_se[top]), float(cell_se[top])

    if delta is None:
        delta = min(1.0, kappa / (2 * m_hat)) if m_hat > 0 else 1.0
        delta_source = "recipe"
        cell_mean, cell_se, a_hat, a_se = evaluate(delta)
        trial = delta
        for _ in range(DELTA_HALVINGS):
            if a_hat < 1:
                break
            trial /= 2
            got = evaluate(trial)
            if got[2] < 1:
                delta, delta_source = trial, "recipe-halved"
                cell_mean, cell_se, a_hat, a_se = got
    else:
        delta = check_positive_float(delta, "delta")
        delta_source = "given"
        cell_mean, cell_se, a_hat, a_se = evaluate(delta)

    inside = k_radius * np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    v = inside[:, None, None, None] * gw[None] + gws[None]
    u1_in = np.linalg.norm(v[..., :r], axis=-1) / np.linalg.norm(v[..., r:], axis=-1)
    b_hat = float(np.mean(u1_in ** delta, axis=1).max())

    recipe_ok = bool(a_hat < 1)
    if strict and not recipe_ok:
        raise RecipeFailure(f"no delta gave a_hat < 1 (best a_hat = {a_hat:.6g})")
    return DriftReport(
        k=k, delta=float(delta), n0=int(n0), c=float(c), K_radius=float(k_radius),
        epsilon=float(epsilon), kappa=float(kappa), M_hat=m_hat,
        a_pred=float(1 - delta * kappa + delta ** 2 * m_hat), a_hat=a_hat, a_hat_stderr=a_se,
        b_hat=b_hat, cell_lo=lo, cell_hi=hi, ratio_mean=cell_mean, ratio_stderr=cell_se,
        n_samples=samples, lambda_w=float(blocks.lambda_w),
        lambda_wprime=float(blocks.lambda_wprime), delta_source=delta_source,
        n0_source=n0_source, recipe_ok=recipe_ok,
    )

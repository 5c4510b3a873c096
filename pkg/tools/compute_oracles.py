"""Independent reference values frozen into tests/oracle_values.py.

Growth rates are measured on single random vectors (and random bivectors for
partial sums) with numpy's default generator, long horizons and no QR; only the
fixture matrices are shared with the package.
"""

import numpy as np

from affgrass import fixtures


def vector_growth(mats, weights, n_steps, replicas, seed):
    rng = np.random.default_rng(seed)
    dim = mats.shape[-1]
    v = rng.standard_normal((replicas, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    acc = np.zeros(replicas)
    for _ in range(n_steps):
        idx = rng.choice(len(weights), size=replicas, p=weights)
        v = np.einsum("rij,rj->ri", mats[idx], v)
        s = np.linalg.norm(v, axis=1)
        v /= s[:, None]
        acc += np.log(s)
    rates = acc / n_steps
    return rates.mean(), rates.std(ddof=1) / np.sqrt(replicas)


def second_compound(a):
    # 2x2 minors on lexicographic pairs, written out independently of the package.
    d = a.shape[-1]
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    out = np.empty(a.shape[:-2] + (len(pairs), len(pairs)))
    for r, (i, j) in enumerate(pairs):
        for c, (k, l) in enumerate(pairs):
            out[..., r, c] = a[..., i, k] * a[..., j, l] - a[..., i, l] * a[..., j, k]
    return out


def main():
    for name in ("saff2", "symmetric_aff3", "symmetric_sl2", "random_sl3"):
        mu = fixtures.get_fixture(name)
        lin = np.asarray(mu.linear_parts)
        w = np.asarray(mu.weights)
        l1 = vector_growth(lin, w, 100_000, 200, 2024)
        print(f"{name} lambda1 {l1[0]:.6f} se {l1[1]:.2e}")
        if mu.d >= 3:
            l12 = vector_growth(second_compound(lin), w, 100_000, 200, 2025)
            print(f"{name} lambda1+lambda2 {l12[0]:.6f} se {l12[1]:.2e}")


if __name__ == "__main__":
    main()

"""Built-in measures used by the tests, the CLI ``fixtures`` verb and the docs."""

from itertools import product

import numpy as np

from .group import MeasureSpec


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def saff2():
    """Zariski-dense SAff(2) measure on three atoms with generic translations."""
    linear = [[[2.0, 1.0], [1.0, 1.0]], rotation(1.0), [[1.0, 0.0], [1.0, 1.0]]]
    translations = [[0.5, 0.0], [0.0, 0.5], [-0.5, 0.25]]
    return MeasureSpec.from_arrays("SAff", np.full(3, 1 / 3), linear, translations)


def scalar_two_atom():
    """d = 1, a in {2, 1/2} with equal weights and no translation: lambda_1 = 0."""
    return MeasureSpec.from_arrays("Aff", [0.5, 0.5], [[[2.0]], [[0.5]]])


def scalar_contracting():
    """d = 1, E log|a| = (log 0.5 + log 1.5) / 2 < 0, translations +-1."""
    return MeasureSpec.from_arrays("Aff", [0.5, 0.5], [[[0.5]], [[1.5]]], [[1.0], [-1.0]])


def scalar_expanding():
    """d = 1, E log|a| = (log 1.5 + log 3) / 2 > 0, translations +-1."""
    return MeasureSpec.from_arrays("Aff", [0.5, 0.5], [[[1.5]], [[3.0]]], [[1.0], [-1.0]])


DIAGONAL_P = (0.8, 0.5, 0.3)


def diagonal_ensemble(p=DIAGONAL_P):
    """Commuting diagonal measure on R^d: coordinate i is 2 w.p. p_i, else 1/2, independently."""
    p = np.asarray(p, dtype=float)
    weights, linear = [], []
    for signs in product((1, -1), repeat=len(p)):
        s = np.array(signs)
        weights.append(float(np.prod(np.where(s > 0, p, 1 - p))))
        linear.append(np.diag(2.0 ** s))
    weights = np.array(weights)
    keep = weights > 0
    weights = weights[keep] / weights[keep].sum()
    return MeasureSpec.from_arrays("Aff", weights, np.array(linear)[keep])


def diagonal_oracle(p=DIAGONAL_P):
    """Exact spectrum of :func:`diagonal_ensemble`: sorted ``(2 p_i - 1) log 2``."""
    return np.sort((2 * np.asarray(p, dtype=float) - 1) * np.log(2.0))[::-1]


def _symmetrize(kind, linear, translations):
    maps = []
    for a, u in zip(linear, translations):
        a = np.asarray(a, dtype=float)
        u = np.asarray(u, dtype=float)
        ainv = np.linalg.inv(a)
        maps.append((a, u))
        maps.append((ainv, -ainv @ u))
    weights = np.full(len(maps), 1 / len(maps))
    return MeasureSpec.from_arrays(kind, weights, [m[0] for m in maps], [m[1] for m in maps])


def _rotation_xy(theta):
    out = np.eye(3)
    out[:2, :2] = rotation(theta)
    return out


def symmetric_aff3():
    """Symmetric Aff(3) measure: two generators and their inverses, equal weights."""
    b1 = [[2.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]]
    b2 = _rotation_xy(np.sqrt(2.0)) @ np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    return _symmetrize("Aff", [b1, b2], [[1.0, 0.0, 0.5], [0.0, -0.5, 1.0]])


def symmetric_sl2():
    """Symmetric SL(2) measure, linear only."""
    return _symmetrize("SAff", [[[2.0, 1.0], [1.0, 1.0]], rotation(1.0)], [[0.0, 0.0], [0.0, 0.0]])


def random_sl3(seed=7, atoms=4):
    """Seeded SL(3) measure, linear only; determinants normalized to one."""
    rng = np.random.default_rng(seed)
    linear = []
    while len(linear) < atoms:
        a = rng.standard_normal((3, 3))
        det = np.linalg.det(a)
        if abs(det) < 0.2:
            continue
        if det < 0:
            a[0] = -a[0]
            det = -det
        linear.append(a / det ** (1 / 3))
    return MeasureSpec.from_arrays("SAff", np.full(atoms, 1 / atoms), linear)


FIXTURES = {
    "saff2": saff2,
    "scalar_two_atom": scalar_two_atom,
    "scalar_contracting": scalar_contracting,
    "scalar_expanding": scalar_expanding,
    "diagonal3": diagonal_ensemble,
    "symmetric_aff3": symmetric_aff3,
    "symmetric_sl2": symmetric_sl2,
    "random_sl3": random_sl3,
}


def get_fixture(name):
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from affgrass import fixtures
from affgrass.exceptions import BlockStructureViolated, DegenerateSubspace, ValidationError
from affgrass.grassmannian import (
    AffineSubspace,
    PluckerPoint,
    act,
    block_factors,
    block_indices,
    dist_origin,
    lifted_wedges,
    plucker_embed,
    proj_distance,
    u_delta,
)
from affgrass.group import AffineMap, MeasureSpec, embed_gl
from affgrass.linalg import exterior_power

D = 3


@st.composite
def subspaces(draw, d=D):
    k = draw(st.integers(0, d - 1))
    point = draw(arrays(np.float64, (d,), elements=st.floats(-10, 10)))
    dirs = draw(arrays(np.float64, (k, d), elements=st.floats(-1, 1)))
    dirs = dirs + np.eye(d)[:k] * 2
    return AffineSubspace.through(point, dirs)


maps = st.builds(
    AffineMap,
    arrays(np.float64, (D, D), elements=st.floats(-1, 1)).map(lambda a: a + 3 * np.eye(D)),
    arrays(np.float64, (D,), elements=st.floats(-5, 5)),
)


def test_validation():
    with pytest.raises(ValidationError, match="orthonormal"):
        AffineSubspace(np.zeros(2), [[2.0], [0.0]])
    with pytest.raises(ValidationError, match="orthogonal"):
        AffineSubspace(np.array([1.0, 0.0]), [[1.0], [0.0]])
    with pytest.raises(ValidationError, match="k < d"):
        AffineSubspace.through(np.zeros(2), np.eye(2))


def test_through_is_canonical():
    x = AffineSubspace.through([3.0, 4.0], [[1.0, 0.0]])
    assert np.allclose(x.base, [0.0, 4.0])
    assert dist_origin(x) == pytest.approx(4.0)


@given(subspaces(), maps, maps)
def test_action_is_a_group_action(x, g, h):
    assert act(g @ h, x).same_as(act(g, act(h, x)), atol=1e-7)
    assert act(g.inverse(), act(g, x)).same_as(x, atol=1e-7)


@given(subspaces(), maps)
def test_plucker_equivariance(x, g):
    lhs = lifted_wedges(act(g, x).base, act(g, x).frame)
    rhs = exterior_power(embed_gl(g), x.k + 1) @ lifted_wedges(x.base, x.frame)
    assert proj_distance(lhs, rhs) < 1e-8


@given(subspaces())
def test_u1_equals_distance_to_origin(x):
    p = plucker_embed(x)
    assert np.linalg.norm(p.wprime) == pytest.approx(1.0)
    assert u_delta(p, 1.0) == pytest.approx(dist_origin(x), rel=1e-9, abs=1e-12)
    assert u_delta(p, 2.0) == pytest.approx(dist_origin(x) ** 2, rel=1e-8, abs=1e-12)


@given(subspaces(), subspaces())
def test_proj_distance_metric_facts(x, y):
    px, py = plucker_embed(x), plucker_embed(y)
    if x.k != y.k:
        return
    dxy = proj_distance(px, py)
    assert 0.0 <= dxy <= 1.0
    assert dxy == pytest.approx(proj_distance(py, px), abs=1e-12)
    assert proj_distance(px, px) < 1e-7
    assert proj_distance(px.vector, -3.0 * px.vector) < 1e-7


def test_plucker_point_gauge():
    d, k = 2, 0
    w_idx, ws_idx = block_indices(d, k)
    v = np.zeros(3)
    v[w_idx] = [1.0, 2.0]
    v[ws_idx] = [4.0]
    p = PluckerPoint.from_lexicographic(v, d, k)
    assert np.allclose(p.w, [0.25, 0.5]) and np.allclose(p.wprime, [1.0])
    v[ws_idx] = 0.0
    with pytest.raises(DegenerateSubspace):
        PluckerPoint.from_lexicographic(v, d, k)


def test_subspace_round_trip():
    x = AffineSubspace.through([1.0, 2.0, 3.0], [[1.0, 1.0, 0.0]])
    y = AffineSubspace.from_dict(x.to_dict())
    assert x.same_as(y, atol=1e-12)


@pytest.mark.parametrize("name", ["saff2", "symmetric_aff3", "random_sl3", "diagonal3"])
def test_block_factors_are_upper_triangular(name):
    mu = fixtures.get_fixture(name)
    for k in range(mu.d):
        full, a, c, dblk = block_factors(mu, k)
        r = a.shape[-1]
        assert np.abs(full[:, r:, :r]).max(initial=0.0) == 0.0
        assert np.allclose(dblk, exterior_power(np.asarray(mu.linear_parts), k) if k else 1.0)
        assert np.allclose(a, exterior_power(np.asarray(mu.linear_parts), k + 1))


def test_block_structure_assertion(monkeypatch):
    import affgrass.grassmannian as gm

    mu = MeasureSpec.from_arrays("Aff", [1.0], [np.eye(2)])
    real = gm._exterior

    def broken(g, p):
        out = real(g, p).copy()
        out[..., -1, 0] = 1.0
        return out

    monkeypatch.setattr(gm, "_exterior", broken)
    with pytest.raises(BlockStructureViolated):
        block_factors(mu, 0)

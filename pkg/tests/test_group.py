import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from affgrass import fixtures
from affgrass.exceptions import ValidationError
from affgrass.group import (
    AffineMap,
    MeasureSpec,
    WordSampler,
    embed_gl,
    is_symmetric,
    proximality_certificate,
    replica_words,
    sample,
)


def affine_maps(d):
    lin = arrays(np.float64, (d, d), elements=st.floats(-1, 1)).map(lambda a: a + 3 * np.eye(d))
    trans = arrays(np.float64, (d,), elements=st.floats(-5, 5))
    return st.builds(AffineMap, lin, trans)


@given(affine_maps(3), affine_maps(3), arrays(np.float64, (3,), elements=st.floats(-5, 5)))
def test_composition_and_embedding(g, h, x):
    assert np.allclose((g @ h)(x), g(h(x)), atol=1e-9)
    assert np.allclose(embed_gl(g @ h), embed_gl(g) @ embed_gl(h), atol=1e-9)
    lifted = embed_gl(g) @ np.append(x, 1.0)
    assert lifted[-1] == 1.0
    assert np.allclose(lifted[:-1], g(x))


@given(affine_maps(2))
def test_inverse(g):
    assert (g @ g.inverse()).allclose(AffineMap.identity(2), atol=1e-9)


@given(affine_maps(3))
def test_affine_map_round_trip(g):
    assert AffineMap.from_dict(g.to_dict(), 3).allclose(g, atol=0)


def test_singular_map_rejected():
    with pytest.raises(ValidationError):
        AffineMap(np.zeros((2, 2)), np.zeros(2))


def test_weights_must_sum_to_one():
    with pytest.raises(ValidationError, match="weights"):
        MeasureSpec.from_arrays("Aff", [0.5, 0.4], [np.eye(2), 2 * np.eye(2)])
    with pytest.raises(ValidationError, match="weights"):
        MeasureSpec.from_arrays("Aff", [1.5, -0.5], [np.eye(2), 2 * np.eye(2)])


def test_saff_needs_unit_determinant():
    with pytest.raises(ValidationError, match="det"):
        MeasureSpec.from_arrays("SAff", [1.0], [2 * np.eye(2)])
    MeasureSpec.from_arrays("SAff", [1.0], [[[2.0, 0.0], [0.0, 0.5]]])


def test_bad_group_kind():
    with pytest.raises(ValidationError):
        MeasureSpec.from_arrays("GL", [1.0], [np.eye(2)])


def test_measure_round_trip():
    mu = fixtures.saff2()
    back = MeasureSpec.from_dict("SAff", 2, mu.to_dict())
    assert np.array_equal(back.linear_parts, mu.linear_parts)
    assert np.array_equal(back.translations, mu.translations)
    assert np.array_equal(back.weights, mu.weights)


def test_sampler_is_deterministic_and_keyed():
    mu = fixtures.saff2()
    a = WordSampler(42, 1, 0).indices(mu, 500)
    b = WordSampler(42, 1, 0).indices(mu, 500)
    c = WordSampler(42, 1, 1).indices(mu, 500)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    words = replica_words(mu, 500, 42, 1, range(2))
    assert np.array_equal(words[0], a) and np.array_equal(words[1], c)


def test_sampler_frequencies_match_weights():
    mu = fixtures.diagonal_ensemble()
    n = 200_000
    counts = np.bincount(WordSampler(3, 9).indices(mu, n), minlength=mu.n_atoms)
    _, pval = stats.chisquare(counts, n * mu.weights)
    assert pval > 1e-4


def test_sample_returns_atom():
    mu = fixtures.saff2()
    g = sample(mu, WordSampler(0))
    assert any(g is h for _, h in mu.atoms)


def test_is_symmetric():
    assert is_symmetric(fixtures.symmetric_aff3())
    assert is_symmetric(fixtures.symmetric_sl2())
    assert not is_symmetric(fixtures.saff2())
    assert is_symmetric(fixtures.scalar_two_atom())


def test_proximality_certificate():
    mu = fixtures.saff2()
    cert = proximality_certificate(mu, 1)
    assert cert is not None and cert.gap_ratio >= 1.05
    rot = MeasureSpec.from_arrays("SAff", [1.0], [fixtures.rotation(0.3)])
    assert proximality_certificate(rot, 1, trials=50) is None
    assert proximality_certificate(mu, 2).gap_ratio == float("inf")

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracle_values as ov
from affgrass import fixtures
from affgrass.group import MeasureSpec
from affgrass.limit_laws import (
    Z_CHECK,
    block_exponents,
    combined_se,
    lil_diagnostic,
    lyapunov_spectrum,
    opposition_involution,
    phi_quadratic_form,
    sigma_and_phi,
    spectrum_checks,
    spectrum_crosscheck,
)
from affgrass.linalg import cartan_vector


def within(est, se, ref, ref_se=0.0, z=Z_CHECK):
    return abs(est - ref) <= z * np.hypot(se, ref_se)


@pytest.fixture(scope="module")
def spectra():
    names = ["saff2", "symmetric_aff3", "symmetric_sl2", "random_sl3", "diagonal3"]
    return {n: lyapunov_spectrum(fixtures.get_fixture(n), 10_000, 64, seed=1) for n in names}


def test_opposition_examples():
    assert np.array_equal(opposition_involution([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])
    assert np.array_equal(opposition_involution([3.0, 1.0, -2.0]), [2.0, -1.0, -3.0])


@given(arrays(np.float64, (3, 3), elements=st.floats(-2, 2)).map(lambda a: a + 5 * np.eye(3)))
def test_cartan_of_inverse(g):
    assert np.allclose(cartan_vector(np.linalg.inv(g)), opposition_involution(cartan_vector(g)),
                       atol=1e-9)


def test_spectrum_matches_oracles(spectra):
    s = spectra["saff2"]
    assert within(s.exponents[0], s.stderr[0], *ov.SAFF2_LAMBDA1)
    s = spectra["symmetric_aff3"]
    assert within(s.exponents[0], s.stderr[0], *ov.SYMMETRIC_AFF3_LAMBDA1)
    s = spectra["symmetric_sl2"]
    assert within(s.exponents[0], s.stderr[0], *ov.SYMMETRIC_SL2_LAMBDA1)
    s = spectra["random_sl3"]
    assert within(s.exponents[0], s.stderr[0], *ov.RANDOM_SL3_LAMBDA1)
    top2 = s.exponents[0] + s.exponents[1]
    assert within(top2, combined_se(*s.stderr[:2]), *ov.RANDOM_SL3_LAMBDA12)


def test_diagonal_oracle(spectra):
    s = spectra["diagonal3"]
    oracle = fixtures.diagonal_oracle()
    assert np.all(np.abs(s.exponents - oracle) <= Z_CHECK * s.stderr)


def test_spectrum_sorted(spectra):
    for s in spectra.values():
        assert np.all(np.diff(s.exponents) <= 0)


def test_symmetry_and_unimodularity(spectra):
    for name in ("symmetric_aff3", "symmetric_sl2"):
        mu = fixtures.get_fixture(name)
        checks = spectrum_checks(mu, spectra[name])
        assert checks["symmetry"]["status"] == "pass"
    for name in ("saff2", "random_sl3", "symmetric_sl2"):
        checks = spectrum_checks(fixtures.get_fixture(name), spectra[name])
        assert checks["unimodularity"]["status"] == "pass"
    assert spectrum_checks(fixtures.diagonal_ensemble(), spectra["diagonal3"])["symmetry"] == {"status": "n/a"}


def test_crosscheck_and_blocks_random_sl3(spectra):
    mu = fixtures.random_sl3()
    spec = spectra["random_sl3"]
    cross = [spectrum_crosscheck(mu, p, 10_000, 64) for p in range(1, 4)]
    blocks = [block_exponents(mu, k, 10_000, 64) for k in range(3)]
    checks = spectrum_checks(mu, spec, cross, blocks)
    assert checks["crosscheck"]["status"] == "pass"
    assert checks["prop21c"]["status"] == "pass"


def test_block_exponents_k0_is_top_exponent():
    mu = fixtures.saff2()
    b = block_exponents(mu, 0, 5000, 64)
    assert b.lambda_wprime == 0.0 and b.se_wprime == 0.0
    assert b.difference == b.lambda_w


def test_crosscheck_rejects_large_d():
    mu = MeasureSpec.from_arrays("Aff", [1.0], [np.eye(7)])
    with pytest.raises(ValueError):
        spectrum_crosscheck(mu, 1, 10, 2)


def test_dirac_measure_law():
    a = np.diag([2.0, 0.5])
    mu = MeasureSpec.from_arrays("Aff", [1.0], [a])
    law = sigma_and_phi(mu, 10_000, 8)
    assert np.allclose(law.sigma_hat, np.log([2.0, 0.5]), atol=1e-12)
    assert np.allclose(law.phi_hat, 0.0, atol=1e-9)
    lil = lil_diagnostic(mu, 2000, words=3, law=law)
    assert np.allclose(lil.lil_points, 0.0, atol=1e-9)
    assert lil.containment_ratio == 1.0


def test_scalar_law():
    mu = fixtures.scalar_two_atom()
    law = sigma_and_phi(mu, 10_000, 256, seed=2)
    assert within(law.sigma_hat[0], law.sigma_se[0], 0.0)
    # sampling error of a variance: sqrt(2 / (R - 1)) * sigma^2
    target = np.log(2.0) ** 2
    assert abs(law.phi_hat[0, 0] - target) <= 3 * np.sqrt(2 / 255) * target


def test_sigma_matches_spectrum_sl2(spectra):
    mu = fixtures.symmetric_sl2()
    law = sigma_and_phi(mu, 10_000, 64)
    s = spectra["symmetric_sl2"]
    for i in range(2):
        assert within(law.sigma_hat[i], law.sigma_se[i], s.exponents[i], s.stderr[i])


def test_phi_quadratic_form():
    phi = np.diag([4.0, 0.0])
    pts = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    q = phi_quadratic_form(pts, phi)
    assert q[0] == pytest.approx(1.0) and q[1] == np.inf and q[2] == 0.0

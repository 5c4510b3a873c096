"""Acceptance gate: one test per criterion, each at its stated tolerance."""

import os

import numpy as np
import pytest

from acceptance_log import record
from affgrass import fixtures
from affgrass.cli import fixture_scenario, main
from affgrass.drift import drift_verify
from affgrass.grassmannian import AffineSubspace
from affgrass.limit_laws import (
    block_exponents,
    combined_se,
    lil_diagnostic,
    lyapunov_spectrum,
    opposition_involution,
    sigma_and_phi,
    spectrum_crosscheck,
)
from affgrass.linalg import cartan_vector, exterior_power, op_norm
from affgrass.scenario import write_scenario
from affgrass.walks import backward_coupling, cesaro_mass, classify, ratio_series

SEED = 20240601
ALL_FIXTURES = ["saff2", "symmetric_aff3", "symmetric_sl2", "random_sl3", "diagonal3",
                "scalar_two_atom", "scalar_contracting", "scalar_expanding"]


@pytest.fixture(scope="module")
def saff2():
    return fixtures.saff2()


@pytest.fixture(scope="module")
def saff2_spectrum(saff2):
    return lyapunov_spectrum(saff2, 10_000, 64, seed=SEED)


def test_criterion_01_exterior_norm_identity():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for d in range(2, 6):
        for _ in range(100):
            g = rng.standard_normal((d, d))
            s = np.linalg.svd(g, compute_uv=False)
            for p in range(1, d + 1):
                target = np.prod(s[:p])
                worst = max(worst, abs(op_norm(exterior_power(g, p)) - target) / target)
    assert record(1, worst <= 1e-8, f"max relative error {worst:.2e} (tol 1e-8)")


def test_criterion_02_cartan_involution():
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for i in range(1000):
        d = (2, 3, 4)[i % 3]
        g = rng.standard_normal((d, d))
        diff = cartan_vector(np.linalg.inv(g)) - opposition_involution(cartan_vector(g))
        worst = max(worst, float(np.abs(diff).max()))
    assert record(2, worst <= 1e-9, f"max abs error {worst:.2e} (tol 1e-9)")


def test_criterion_03_scalar_exactness():
    spec = lyapunov_spectrum(fixtures.scalar_two_atom(), 100_000, 64, seed=SEED)
    lam, se = spec.exponents[0], spec.stderr[0]
    tol = max(3 * se, 1e-2)
    assert record(3, abs(lam) <= tol, f"lambda_1 = {lam:.2e}, tol {tol:.2e}")


def test_criterion_04_diagonal_oracle():
    spec = lyapunov_spectrum(fixtures.diagonal_ensemble(), 10_000, 64, seed=SEED)
    oracle = fixtures.diagonal_oracle()
    z = np.abs(spec.exponents - oracle) / spec.stderr
    assert record(4, bool(np.all(z <= 3)), f"|z| per exponent {np.round(z, 2).tolist()}")


def test_criterion_05_estimator_consistency():
    worst_cross, worst_block = -np.inf, -np.inf
    for name in ALL_FIXTURES:
        mu = fixtures.get_fixture(name)
        spec = lyapunov_spectrum(mu, 10_000, 64, seed=SEED)
        for p in range(1, mu.d + 1):
            cc = spectrum_crosscheck(mu, p, 10_000, 64, seed=SEED)
            tol = 3 * combined_se(cc.stderr, *spec.stderr[:p])
            gap = abs(cc.value - spec.exponents[:p].sum()) - max(tol, 1e-12)
            worst_cross = max(worst_cross, gap)
        if name in ("saff2", "symmetric_aff3"):
            for k in range(mu.d):
                b = block_exponents(mu, k, 10_000, 64, seed=SEED)
                tol = 3 * combined_se(b.se_difference, spec.stderr[k])
                worst_block = max(worst_block, abs(b.difference - spec.exponents[k]) - tol)
    ok = worst_cross <= 0 and worst_block <= 0
    assert record(5, ok, f"worst (|diff| - 3 SE): crosscheck {worst_cross:.2e}, "
                         f"block identity {worst_block:.2e}")


def test_criterion_06_saff2_dichotomy(saff2, saff2_spectrum):
    lines = AffineSubspace.through(np.zeros(2), [[1.0, 0.0]])
    points = AffineSubspace.through(np.zeros(2))
    c1 = classify(saff2, 1, saff2_spectrum)
    c0 = classify(saff2, 0, saff2_spectrum)
    m1 = cesaro_mass(saff2, lines, 10_000, 10.0, 256, seed=SEED)
    m0 = cesaro_mass(saff2, points, 10_000, 10.0, 256, seed=SEED)
    ok = (c1.verdict == "recurrent" and m1.mass_curve[-1] >= 0.9
          and c0.verdict == "transient" and m0.mass_curve[-1] <= 0.1)
    assert record(6, ok, f"k=1 {c1.verdict} mass {m1.mass_curve[-1]:.4f}; "
                         f"k=0 {c0.verdict} mass {m0.mass_curve[-1]:.4f}")


@pytest.fixture(scope="module")
def aff3_classes():
    mu = fixtures.symmetric_aff3()
    spec = lyapunov_spectrum(mu, 10_000, 64, seed=SEED)
    return [classify(mu, k, spec) for k in range(3)]


def test_criterion_07_symmetric_grid(aff3_classes):
    verdicts = [c.verdict for c in aff3_classes]
    z = [c.z_score for c in aff3_classes]
    ok_verdicts = verdicts == ["transient", "transient", "recurrent"]
    ok_z = all(abs(v) >= 3 for v in z)
    record(7, ok_verdicts and ok_z,
           f"verdicts {verdicts}; z-scores {np.round(z, 1).tolist()} (need |z| >= 3 each)")
    assert ok_verdicts
    assert ok_z, "lambda_2 of a symmetric measure on R^3 is exactly zero, so k=1 has z = 0"


def test_criterion_08_dirac_limits(saff2):
    x0 = AffineSubspace.through(np.zeros(2), [[1.0, 0.0]])
    y0 = AffineSubspace.through([0.0, 3.0], [[1.0, 1.0]])
    rep = backward_coupling(saff2, x0, y0, 500, words=100, seed=SEED)
    frac = rep.coupled_fraction
    assert record(8, frac >= 0.95, f"coupled fraction {frac:.2f} at N=500 (need >= 0.95)")


def test_criterion_09_drift(saff2):
    rep = drift_verify(saff2, 1, seed=SEED)
    big = drift_verify(saff2, 1, delta=rep.delta, n0=rep.n0, c=rep.c,
                       samples=2 * rep.n_samples, seed=SEED)
    shift = abs(big.a_hat - rep.a_hat)
    limit = 2 * combined_se(rep.a_hat_stderr, big.a_hat_stderr)
    ok = rep.a_hat < 1 and shift <= limit
    assert record(9, ok, f"a_hat {rep.a_hat:.4f} (delta {rep.delta:.3g}, n0 {rep.n0}); "
                         f"doubled {big.a_hat:.4f}, shift {shift:.2e} <= {limit:.2e}")


def test_criterion_10_ratio_mechanism(saff2):
    tra = ratio_series(saff2, 0, 100_000, words=16, seed=SEED)
    rec = ratio_series(saff2, 1, 100_000, words=16, seed=SEED)
    growth = tra.runsup_at(100_000) - tra.runsup_at(1000)
    settle = rec.runsup_at(100_000) - rec.runsup_at(10_000)
    ok = bool(np.all(growth >= 5) and np.all(settle <= 1.0))
    assert record(10, ok, f"transient min growth {growth.min():.1f} (need >= 5); "
                          f"recurrent max late growth {settle.max():.2e} (need <= 1)")


def test_criterion_11_limit_laws(saff2, saff2_spectrum):
    law = sigma_and_phi(saff2, 10_000, 64, seed=SEED)
    tol = 3 * np.hypot(law.sigma_se, saff2_spectrum.stderr)
    sigma_ok = bool(np.all(np.abs(law.sigma_hat - saff2_spectrum.exponents) <= tol))
    lil = lil_diagnostic(fixtures.scalar_two_atom(), 100_000, words=32, seed=SEED)
    soft_ok = lil.containment_ratio >= 0.95 and lil.exit_fraction > 0
    detail = (f"sigma vs spectrum {'ok' if sigma_ok else 'off'}; containment "
              f"{lil.containment_ratio:.3f}, exit fraction {lil.exit_fraction:.2f}")
    record(11, sigma_ok and soft_ok, detail, soft=sigma_ok)
    assert sigma_ok


def _payloads(path):
    return {name: open(os.path.join(path, name), "rb").read()
            for name in sorted(os.listdir(path)) if name.endswith((".json", ".csv"))}


def test_criterion_12_determinism(tmp_path):
    scenario = tmp_path / "full.json"
    write_scenario(fixture_scenario("saff2_lines_full"), scenario)
    runs = {}
    for label, workers in (("a", "1"), ("b", "1"), ("c", "8")):
        out = tmp_path / label
        assert main(["full", "--scenario", str(scenario), "--out", str(out),
                     "--workers", workers]) == 0
        runs[label] = _payloads(out)
    ok = runs["a"] == runs["b"] == runs["c"] and len(runs["a"]) >= 10
    assert record(12, ok, f"{len(runs['a'])} JSON/CSV files identical across reruns and 1 vs 8 workers")

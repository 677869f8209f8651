import numpy as np
import pytest
from scipy.linalg import sqrtm

import gqit.estimation as es
from gqit.errors import InvalidArgument

from oracles import displaced_thermal_fock, displaced_thermal_log, thermal_probs

TRIALS = 100_000


@pytest.mark.parametrize("nbar", [0.0, 1.0, 3.0])
@pytest.mark.parametrize("n", [1, 10, 100])
def test_heterodyne_monte_carlo_mse(nbar, n):
    seed = int(1000 * nbar + n)
    mse = es.heterodyne_mse_monte_carlo(0.4 - 0.9j, nbar, n, TRIALS, seed)
    assert mse == pytest.approx(es.heterodyne_mse(nbar, n), rel=0.03)


def test_heterodyne_mse_examples():
    assert es.heterodyne_mse(0.0, 1) == 1.0
    assert es.heterodyne_mse(1.0, 1) == 2.0
    assert es.heterodyne_mse(3.0, 10) == pytest.approx(0.4)
    with pytest.raises(InvalidArgument):
        es.heterodyne_mse(1.0, 0)


def test_family_and_concentration():
    s = es.family_state(1 + 2j, 0.5)
    np.testing.assert_allclose(s.cov, 2 * np.eye(2))
    np.testing.assert_allclose(s.disp, np.sqrt(2) * np.array([1, 2]))
    assert es.concentrate_copies(1 + 2j, 0.5, 1).allclose(s)
    assert es.concentrate_copies(1 + 2j, 0.5, 4).allclose(es.family_state(2 + 4j, 0.5))
    with pytest.raises(InvalidArgument):
        es.family_state(0, -1)


@pytest.mark.parametrize("nbar", [0.01, 0.3, 1.0, 5.0, 100.0])
def test_fisher_ordering(nbar):
    f = es.fisher_matrices(nbar)
    assert np.all(np.diag(f.sld) <= np.diag(f.kmb))
    assert np.all(np.diag(f.kmb) <= 1 / nbar)
    np.testing.assert_allclose(f.rld_inverse, f.rld_inverse.conj().T)


def test_fisher_kmb_diverges_at_zero():
    with pytest.raises(InvalidArgument):
        es.fisher_matrices(0.0)


@pytest.mark.parametrize("nbar", [0.0, 1.0, 2.5])
def test_rld_bound_identity_weight(nbar):
    bound = es.rld_weighted_bound(np.eye(2), nbar)
    assert bound == 2 * nbar + 2
    assert np.trace(es.heterodyne_error_covariance(nbar)) == bound


def test_rld_bound_examples():
    assert es.rld_weighted_bound(np.eye(2), 1.0) == 4.0
    assert es.rld_weighted_bound(np.diag([1.0, 0.0]), 1.0) == 1.5
    with pytest.raises(InvalidArgument):
        es.rld_weighted_bound(np.diag([1.0, -1.0]), 1.0)


@pytest.mark.parametrize("seed", range(8))
def test_rld_optimal_covariance_meets_bound(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 2))
    g = a @ a.T + 0.1 * np.eye(2)
    nbar = rng.uniform(0, 3)
    v = es.rld_optimal_covariance(g, nbar)
    assert np.trace(g @ v) == pytest.approx(es.rld_weighted_bound(g, nbar), rel=1e-12)
    # admissible: V dominates the inverse RLD matrix
    diff = v - es.fisher_matrices(max(nbar, 1e-9)).rld_inverse
    assert np.linalg.eigvalsh(diff).min() >= -1e-12


def test_heterodyne_covariance_is_admissible():
    for nbar in (0.2, 1.0, 4.0):
        diff = es.heterodyne_error_covariance(nbar) - es.fisher_matrices(nbar).rld_inverse
        assert np.linalg.eigvalsh(diff).min() >= -1e-12


# ---------------------------------------------------------------- Bayes

def test_bayes_examples():
    assert es.bayes_min_mse(1.0, 1.0) == pytest.approx(0.5 + 1 / 6, abs=1e-15)
    assert es.bayes_min_mse(2.0, 0.0) == 0.0
    with pytest.raises(InvalidArgument):
        es.bayes_min_mse(0.0, 0.0)


@pytest.mark.parametrize("nbar,prior", [(0.0, 1.0), (1.0, 1.0), (2.0, 5.0), (0.5, 20.0)])
def test_bayes_closed_form_and_monte_carlo(nbar, prior):
    v = es.bayes_min_mse(nbar, prior)
    assert v == pytest.approx(prior * (nbar + 1) / (prior + nbar + 1), rel=1e-14)
    assert v <= es.heterodyne_plain_bayes_mse(nbar)
    mc = es.bayes_mse_monte_carlo(nbar, prior, TRIALS, seed=7)
    assert mc == pytest.approx(v, rel=0.03)


def test_bayes_gap_closes_for_flat_prior():
    gaps = [es.heterodyne_plain_bayes_mse(1.0) - es.bayes_min_mse(1.0, p) for p in (1, 10, 1e3, 1e6)]
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-5


# ---------------------------------------------------------------- photon number

def test_photon_number_mse():
    assert es.photon_number_mse(1.0, 1) == (2.0, 4.0)
    assert es.photon_number_mse(0.0, 1).optimal == 0.0
    assert es.photon_number_mse(2.0, 4).heterodyne == pytest.approx(9 / 4)


@pytest.mark.parametrize("nbar", [0.5, 2.0])
def test_photon_number_mse_oracles(nbar):
    # photon counting: variance of the Bose-Einstein distribution
    p = thermal_probs(nbar, 2000)
    k = np.arange(p.size)
    var = np.sum(p * k ** 2) - np.sum(p * k) ** 2
    assert es.photon_number_mse(nbar).optimal == pytest.approx(var, rel=1e-10)
    # heterodyne: |alpha|^2 - 1 is unbiased with variance (N + 1)^2
    rng = np.random.default_rng(3)
    sd = np.sqrt((nbar + 1) / 2)
    a = sd * (rng.standard_normal(TRIALS) + 1j * rng.standard_normal(TRIALS))
    est = np.abs(a) ** 2 - 1
    assert np.mean((est - nbar) ** 2) == pytest.approx(es.photon_number_mse(nbar).heterodyne, rel=0.03)


# ---------------------------------------------------------------- distances

def test_distance_examples():
    assert es.relative_entropy(1j, 1j, 1.0) == 0.0
    assert es.bures_fidelity(0.3, 0.3, 2.0) == 1.0
    assert es.relative_entropy(0, 1, 1.0) == pytest.approx(np.log(2), abs=1e-15)
    assert es.stein_exponent(0, 1j, 1.0) == pytest.approx(0.6931471805599453, abs=1e-15)
    with pytest.raises(InvalidArgument):
        es.relative_entropy(0, 1, 0.0)
    with pytest.raises(InvalidArgument):
        es.stein_exponent(0, 1, 0.0)


def test_fidelity_coherent_limit():
    d = 0.7 + 0.2j
    assert es.bures_fidelity(0, d, 0.0) == pytest.approx(np.exp(-abs(d) ** 2 / 2), abs=1e-15)


@pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0])
def test_distances_against_fock_oracle(nbar):
    z0, z1 = 0.3 + 0.1j, -0.2 + 0.4j
    r0 = displaced_thermal_fock(z0, nbar, 120)
    r1 = displaced_thermal_fock(z1, nbar, 120)
    log0 = displaced_thermal_log(z0, nbar, 120)
    log1 = displaced_thermal_log(z1, nbar, 120)
    d = np.trace(r0 @ (log0 - log1)).real
    assert es.relative_entropy(z0, z1, nbar) == pytest.approx(d, abs=1e-8)
    s0 = sqrtm(r0)
    f = np.trace(sqrtm(s0 @ r1 @ s0)).real
    assert es.bures_fidelity(z0, z1, nbar) == pytest.approx(f, abs=1e-8)


@pytest.mark.parametrize("nbar", [0.2, 1.0, 4.0])
def test_relative_entropy_curvature_is_kmb(nbar):
    # D(theta || theta + h e_k) ~ h^2/2 * KMB_kk in theta = sqrt(2) (Re, Im) coordinates
    kmb = es.fisher_matrices(nbar).kmb
    for k, unit in enumerate((1.0, 1j)):
        for h in (1e-3, 1e-2):
            d = es.relative_entropy(0, unit * h / np.sqrt(2), nbar)
            assert d == pytest.approx(0.5 * h * h * kmb[k, k], rel=1e-10)


def test_fidelity_range():
    for nbar in (0.0, 1.0):
        f = es.bures_fidelity(0, 3 + 4j, nbar)
        assert 0 < f < 1

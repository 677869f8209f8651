import numpy as np
import pytest
from scipy.optimize import minimize_scalar

import gqit.gaussian_core as gc
import gqit.gaussian_ops as go
import gqit.protocols as pr
from gqit.errors import InvalidArgument

from oracles import fock_tmss_reduced_entropy

R_GRID = [0.0, 0.5, 1.0, 2.0]


def gaussian_overlap(a, b):
    """Tr(rho sigma) for a pure ``a``; vacuum covariance I."""
    s = a.cov + b.cov
    d = a.disp - b.disp
    return float(2.0 / np.sqrt(np.linalg.det(s)) * np.exp(-d @ np.linalg.solve(s, d)))


# ---------------------------------------------------------------- teleportation

@pytest.mark.parametrize("r", R_GRID)
def test_teleport_fidelity_formula_and_overlap(r):
    expected = 1.0 / (1.0 + np.exp(-2.0 * r))
    assert pr.teleport_fidelity(r) == pytest.approx(expected, abs=1e-12)
    inp = gc.coherent_state(0.3 - 1.1j)
    res = pr.teleport_ensemble(inp, r)
    assert res.fidelity_coherent == pytest.approx(expected, abs=1e-12)
    assert gaussian_overlap(inp, res.output) == pytest.approx(expected, abs=1e-12)


def test_teleport_examples():
    assert pr.teleport_fidelity(0.0) == 0.5
    res = pr.teleport_ensemble(gc.coherent_state(1), 1.0)
    assert res.fidelity_coherent == pytest.approx(0.8807970779778823, abs=1e-12)
    assert res.added_noise == pytest.approx(0.2706705664732254, abs=1e-12)
    big = pr.teleport_ensemble(gc.coherent_state(2j), 25.0)
    assert big.output.allclose(gc.coherent_state(2j), atol=1e-12)


def test_teleport_fidelity_independent_of_displacement():
    rng = np.random.default_rng(7)
    for _ in range(10):
        alpha = complex(rng.normal(scale=3), rng.normal(scale=3))
        inp = gc.coherent_state(alpha)
        out = pr.teleport_ensemble(inp, 0.8).output
        assert gaussian_overlap(inp, out) == pytest.approx(pr.teleport_fidelity(0.8), abs=1e-12)


@pytest.mark.parametrize("r", R_GRID)
def test_teleport_monte_carlo_within_5_sigma(r):
    rep = pr.teleport_consistency_check(gc.coherent_state(0.5 + 0.25j), r, seed=100 + int(10 * r))
    assert rep["shots"] == 100_000
    assert np.abs(rep["cov_z"]).max() <= 5.0
    assert np.abs(rep["mean_z"]).max() <= 5.0
    assert rep["var_x"] == pytest.approx(0.5 + np.exp(-2 * r), rel=0.03)


def test_teleport_monte_carlo_squeezed_input():
    rep = pr.teleport_consistency_check(gc.one_mode_squeezed_vacuum(0.6, 0.4), 1.0, seed=5)
    assert np.abs(rep["cov_z"]).max() <= 5.0


def test_teleport_needs_single_mode():
    with pytest.raises(InvalidArgument):
        pr.teleport_ensemble(gc.vacuum(2), 1.0)


# ---------------------------------------------------------------- swapping

def test_swap_examples():
    assert pr.swap_squeezing(1.3, 0.0) == 0.0
    # artanh(tanh(1)^2) evaluated with mpmath at 30 digits
    assert pr.swap_squeezing(1.0, 1.0) == pytest.approx(0.662501373678932, abs=1e-12)
    with pytest.raises(InvalidArgument):
        pr.swap_squeezing(-1, 1)


@pytest.mark.parametrize("ra,rb", [(1.0, 1.0), (0.5, 1.5), (2.0, 0.3)])
def test_swap_matches_bell_measurement_on_two_tmss(ra, rb):
    s = gc.tensor(gc.two_mode_squeezed_state(ra), gc.two_mode_squeezed_state(rb))
    cond = go.bell_sample(s, (1, 2), 1, seed=0).cond_cov
    nu = gc.symplectic_eigenvalues(cond[:2, :2])[0]
    assert np.arccosh(nu) / 2 == pytest.approx(pr.swap_squeezing(ra, rb), abs=1e-10)
    np.testing.assert_allclose(gc.symplectic_eigenvalues(cond), [1, 1], atol=1e-9)


def test_swap_symmetric_and_chains_decrease():
    for r in (0.2, 1.0, 3.0):
        once = pr.swap_squeezing(r, r)
        assert pr.swap_squeezing(once, r) <= once
    assert pr.swap_squeezing(0.4, 1.7) == pytest.approx(pr.swap_squeezing(1.7, 0.4), abs=1e-15)


# ---------------------------------------------------------------- dense coding

@pytest.mark.parametrize("r", np.linspace(0.05, 4, 12))
def test_dense_coding_identity(r):
    nbar = pr.dense_coding_nbar(r)
    sigma2 = pr.dense_coding_optimal_sigma2(r)
    assert sigma2 == pytest.approx(np.sinh(r) * np.cosh(r), abs=1e-12)
    assert pr.dense_coding_mutual_info(sigma2, r) == pytest.approx(pr.dense_coding_capacity(nbar), abs=1e-10)


@pytest.mark.parametrize("nbar", [0.5, 3.0, 40.0])
def test_dense_coding_optimum_by_search(nbar):
    # signal photons sigma^2 = nbar - sinh^2 r; maximize over r numerically
    r_max = np.arcsinh(np.sqrt(nbar))

    def neg(r):
        return -pr.dense_coding_mutual_info(max(nbar - np.sinh(r) ** 2, 0.0), r)

    res = minimize_scalar(neg, bounds=(0, r_max), method="bounded", options={"xatol": 1e-12})
    assert -res.fun == pytest.approx(pr.dense_coding_capacity(nbar), abs=1e-9)
    assert nbar - np.sinh(res.x) ** 2 == pytest.approx(np.sinh(res.x) * np.cosh(res.x), rel=1e-4)


def test_dense_coding_examples():
    assert pr.dense_coding_mutual_info(0.0, 1.0) == 0.0
    assert pr.dense_coding_capacity(0.0) == 0.0
    assert pr.single_mode_capacity(0.0) == 0.0
    s2 = pr.dense_coding_optimal_sigma2(1.0)
    assert s2 == pytest.approx(1.813430203923509, abs=1e-12)
    # ln(1 + sinh 1 cosh 1 e^2) evaluated with mpmath
    assert pr.dense_coding_mutual_info(s2, 1.0) == pytest.approx(2.667196, abs=1e-6)
    nbar = pr.dense_coding_nbar(1.0)
    assert nbar == pytest.approx(3.194528049465325, abs=1e-12)
    assert pr.single_mode_capacity(nbar) == pytest.approx(2.303783, abs=1e-6)


def test_dense_coding_ratio_tends_to_two():
    ratios = [pr.dense_coding_capacity(n) / pr.single_mode_capacity(n) for n in (1e2, 1e4, 1e8, 1e16)]
    assert 1.8 <= ratios[1] <= 2.0
    assert ratios[1] == pytest.approx(1.804121, abs=1e-6)
    assert np.all(np.diff(ratios) > 0)
    assert ratios[-1] < 2.0


# ---------------------------------------------------------------- entangler

def test_entangler_vacuum_inputs():
    assert pr.entangler_entanglement(0, 0, np.pi / 4) == 0.0


@pytest.mark.parametrize("r", [0.3, 1.0, 1.8])
def test_entangler_equals_tmss_entropy(r):
    e = pr.entangler_entanglement(r, -r, np.pi / 4)
    assert e == pytest.approx(fock_tmss_reduced_entropy(r), abs=1e-9)
    red = gc.partial_trace(pr.entangler_output(r, -r, np.pi / 4), [0])
    assert e == pytest.approx(gc.von_neumann_entropy(red), abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_entangler_two_routes_agree(seed):
    rng = np.random.default_rng(seed)
    za = rng.uniform(0, 1.5) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    zb = rng.uniform(0, 1.5) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    th, p0, p1 = rng.uniform(0, np.pi / 2), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)
    red = gc.partial_trace(pr.entangler_output(za, zb, th, p0, p1), [0])
    assert pr.entangler_entanglement(za, zb, th, p0, p1) == pytest.approx(gc.von_neumann_entropy(red), abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_entangler_phase_condition_on_grid(seed):
    rng = np.random.default_rng(seed + 40)
    r = rng.uniform(0.3, 1.2)
    phi_a, p0, p1 = rng.uniform(0, 2 * np.pi, 3)
    grid = np.linspace(0, 2 * np.pi, 721, endpoint=False)
    vals = [pr.entangler_entanglement(r * np.exp(1j * phi_a), r * np.exp(1j * pb), np.pi / 4, p0, p1)
            for pb in grid]
    best = grid[int(np.argmax(vals))]
    opt = pr.entangler_optimal_phase(phi_a, p0, p1)
    gap = abs((best - opt + np.pi) % (2 * np.pi) - np.pi)
    assert gap <= grid[1]
    at_opt = pr.entangler_entanglement(r * np.exp(1j * phi_a), r * np.exp(1j * opt), np.pi / 4, p0, p1)
    assert at_opt >= max(vals) - 1e-12
    assert at_opt == pytest.approx(fock_tmss_reduced_entropy(r), abs=1e-9)


# ---------------------------------------------------------------- bounds

def test_clone_fidelity():
    sigma2 = 0.5
    clone = gc.GaussianState(np.eye(2) * (1 + 2 * sigma2))
    assert pr.clone_fidelity_coherent() == pytest.approx(gaussian_overlap(gc.vacuum(), clone), abs=1e-15)
    assert pr.clone_fidelity_coherent() == pytest.approx(2 / 3, abs=1e-15)


def test_gkp_bound_values():
    d = 0.486
    assert pr.gkp_error_bound(d) == pytest.approx(d * np.exp(-np.pi / (4 * d * d)), abs=1e-15)
    assert pr.gkp_error_bound(d) == pytest.approx(0.0174792, abs=1e-6)
    assert pr.gkp_error_bound(1e-3) == 0.0
    assert pr.gkp_error_bound(50.0) == 1.0


def test_source_bitflip_bound_and_exact_tail():
    d = 0.486
    assert pr.squeezed_source_bitflip_bound(d) == pytest.approx(0.0111276, abs=1e-6)
    # the closed-form bound is slightly above 1% at the quoted width; the exact tail is below
    assert pr.squeezed_source_bitflip_bound(d) > 0.01
    assert pr.squeezed_source_bitflip_exact(d) == pytest.approx(0.00991339, abs=1e-7)
    assert pr.squeezed_source_bitflip_exact(d) < 0.01
    assert pr.squeezed_source_bitflip_bound(1e-3) == 0.0


def test_source_bound_dominates_exact_tail():
    for d in np.linspace(0.05, 0.8, 40):
        assert pr.squeezed_source_bitflip_exact(d) <= pr.squeezed_source_bitflip_bound(d)


def test_source_exact_tail_by_sampling():
    d = 0.6
    rng = np.random.default_rng(3)
    x = rng.normal(scale=d / np.sqrt(2), size=400_000)
    frac = np.mean(np.abs(x) > np.sqrt(np.pi) / 2)
    p = pr.squeezed_source_bitflip_exact(d)
    assert abs(frac - p) <= 5 * np.sqrt(p / x.size)


@pytest.mark.parametrize("fn", [pr.gkp_error_bound, pr.squeezed_source_bitflip_bound,
                                pr.squeezed_source_bitflip_exact])
def test_bounds_reject_nonpositive_delta(fn):
    with pytest.raises(InvalidArgument):
        fn(0.0)

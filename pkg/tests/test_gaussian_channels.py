import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import gqit.gaussian_channels as gch
import gqit.gaussian_core as gc
from gqit.errors import InvalidArgument
from gqit.gaussian_ops import apply, random_symplectic

from oracles import fock_thermal_entropy, grid_search_capacity


def random_cp_channel(n, rng):
    """Random X with the smallest isotropic Y making the channel CP, plus extra PSD noise."""
    x = rng.normal(scale=0.7, size=(2 * n, 2 * n))
    j = gc.symplectic_form(n)
    anti = j - x.T @ j @ x
    s = np.abs(np.linalg.eigvalsh(1j * anti)).max()
    extra = rng.normal(size=(2 * n, 2 * n))
    return gch.GaussianChannel(x, s * np.eye(2 * n) + 0.1 * extra @ extra.T)


def test_classical_noise_channel():
    assert gch.classical_noise_channel(np.zeros((2, 2))).X.tolist() == np.eye(2).tolist()
    out = gch.apply_channel(gch.classical_noise_channel(np.eye(2)), gc.vacuum())
    assert out.allclose(gc.thermal_state(2.0))
    with pytest.raises(InvalidArgument):
        gch.classical_noise_channel(-np.eye(2))


def test_thermal_channel_examples():
    ident = gch.thermal_channel(1.0, 3.0)
    np.testing.assert_array_equal(ident.X, np.eye(2))
    np.testing.assert_array_equal(ident.Y, np.zeros((2, 2)))
    out = gch.apply_channel(gch.thermal_channel(0.5), gc.coherent_state(1 + 1j))
    assert out.allclose(gc.coherent_state(np.sqrt(0.5) * (1 + 1j)))
    dead = gch.apply_channel(gch.thermal_channel(0.0, 2.0), gc.coherent_state(3))
    assert dead.allclose(gc.thermal_state(5.0))
    out = gch.apply_channel(gch.thermal_channel(0.6, 0.5), gc.vacuum())
    np.testing.assert_allclose(out.cov, 1.4 * np.eye(2), atol=1e-15)
    with pytest.raises(InvalidArgument):
        gch.thermal_channel(1.2)
    with pytest.raises(InvalidArgument):
        gch.thermal_channel(0.5, -1)


def test_thermal_channel_broadcasts_over_modes():
    c = gch.thermal_channel([0.2, 0.9], 1.0)
    assert c.n_modes == 2
    np.testing.assert_allclose(np.diag(c.Y), [2.4, 2.4, 0.3, 0.3])


def test_cp_examples():
    assert gch.is_completely_positive(gch.identity_channel(2))
    for eta in (0.0, 0.3, 1.0):
        for nbar in (0.0, 2.5):
            assert gch.is_completely_positive(gch.thermal_channel(eta, nbar))
    amp = gch.GaussianChannel(2 * np.eye(2), np.zeros((2, 2)))
    assert not gch.is_completely_positive(amp)
    with pytest.raises(InvalidArgument):
        gch.apply_channel(amp, gc.vacuum())
    # the quantum-limited amplifier needs Y = (g - 1) I
    assert gch.is_completely_positive(gch.GaussianChannel(np.sqrt(2) * np.eye(2), np.eye(2)))


def test_apply_identity_and_dimension_check():
    s = gc.coherent_state(0.4j)
    assert gch.apply_channel(gch.identity_channel(), s).allclose(s)
    with pytest.raises(InvalidArgument):
        gch.apply_channel(gch.identity_channel(2), s)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_cp_channels_preserve_physicality(n, seed):
    rng = np.random.default_rng(seed)
    c = random_cp_channel(n, rng)
    assert gch.is_completely_positive(c)
    s = apply(random_symplectic(n, rng), gc.tensor_all([gc.thermal_state(1 + rng.exponential()) for _ in range(n)]))
    assert gc.is_physical(gch.apply_channel(c, s))


@pytest.mark.parametrize("e1,e2", [(0.3, 0.8), (1.0, 0.5), (0.0, 0.7)])
def test_lossy_composition(e1, e2):
    comp = gch.compose_channels(gch.thermal_channel(e1), gch.thermal_channel(e2))
    ref = gch.thermal_channel(e1 * e2)
    np.testing.assert_allclose(comp.X, ref.X, atol=1e-15)
    np.testing.assert_allclose(comp.Y, ref.Y, atol=1e-15)


def test_compose_matches_sequential_application():
    rng = np.random.default_rng(3)
    a, b = random_cp_channel(2, rng), random_cp_channel(2, rng)
    s = gc.tensor(gc.coherent_state(1), gc.thermal_state(2))
    seq = gch.apply_channel(b, gch.apply_channel(a, s))
    assert gch.apply_channel(gch.compose_channels(a, b), s).allclose(seq, atol=1e-10)


def test_channel_round_trip():
    c = gch.thermal_channel([0.3, 0.7], [0.0, 1.5])
    back = gch.GaussianChannel.from_dict(c.to_dict())
    np.testing.assert_array_equal(back.X, c.X)
    np.testing.assert_array_equal(back.Y, c.Y)
    th = gch.GaussianChannel.from_dict({"kind": "thermal", "eta": 0.4, "nbar": 1.0})
    np.testing.assert_array_equal(th.Y, gch.thermal_channel(0.4, 1.0).Y)


# ---------------------------------------------------------------- capacity

@pytest.mark.parametrize("eta,nbar", [(0.5, 10.0), (0.9, 1.0)])
def test_single_mode_capacity_fock_oracle(eta, nbar):
    assert gch.lossy_capacity([eta], nbar) == pytest.approx(fock_thermal_entropy(eta * nbar, dim=2000), abs=1e-6)
    assert gch.holevo_coherent_ensemble(eta, nbar) == pytest.approx(gch.lossy_capacity(eta, nbar), abs=1e-15)


def test_capacity_examples():
    assert gch.lossy_capacity([0.5], 10.0) == pytest.approx(2.7033672531978, abs=1e-10)
    assert gch.lossy_capacity([0.5, 0.9], 0.0) == 0.0
    assert gch.lossy_capacity([0.0, 0.0], 5.0) == 0.0
    assert gch.holevo_coherent_ensemble(0.3, 0.0) == 0.0
    assert gch.holevo_coherent_ensemble(1.0, 1.0) == pytest.approx(2 * np.log(2), abs=1e-15)


@pytest.mark.parametrize("etas,energy", [
    ((0.9, 0.3), 2.0),
    ((0.5, 0.5), 4.0),
    ((1.0, 0.05), 0.7),
    ((0.8, 0.4, 0.1), 3.0),
])
def test_capacity_matches_grid_search(etas, energy):
    best = grid_search_capacity(etas, energy)
    got = gch.lossy_capacity(etas, energy)
    assert got >= best - 1e-12
    assert got - best <= 1e-5
    alloc = gch.lossy_capacity_allocation(etas, energy)
    assert alloc.sum() == pytest.approx(energy, rel=1e-13)
    assert np.all(alloc >= 0)


def test_allocation_satisfies_stationarity():
    etas = np.array([0.9, 0.4, 0.2])
    alloc = gch.lossy_capacity_allocation(etas, 5.0)
    lam = etas * gc.g_prime(etas * alloc)
    np.testing.assert_allclose(lam, lam[0], rtol=1e-10)


def test_allocation_with_dead_mode():
    alloc = gch.lossy_capacity_allocation([0.7, 0.0], 3.0)
    assert alloc[1] == 0.0
    assert alloc[0] == pytest.approx(3.0)


def test_capacity_monotone():
    energies = np.linspace(0, 20, 41)
    caps = [gch.lossy_capacity([0.8, 0.3], e) for e in energies]
    assert np.all(np.diff(caps) >= 0)
    etas = np.linspace(0.05, 1, 20)
    caps = [gch.lossy_capacity([e, 0.3], 4.0) for e in etas]
    assert np.all(np.diff(caps) >= -1e-12)


def test_capacity_errors():
    with pytest.raises(InvalidArgument):
        gch.lossy_capacity([0.5], -1.0)
    with pytest.raises(InvalidArgument):
        gch.lossy_capacity([1.5], 1.0)

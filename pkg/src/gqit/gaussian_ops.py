"""Symplectic transforms and Gaussian measurements.

Every sampler takes an explicit ``seed`` and draws from
``numpy.random.default_rng(seed)`` (PCG64). There is no module-level RNG.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgument, InvalidTransform, NumericalFailure
from .gaussian_core import (
    GaussianState,
    mode_indices,
    psd_tol,
    symplectic_form,
)

SYMPLECTIC_TOL = 1e-9


def make_rng(seed) -> np.random.Generator:
    """The package's single RNG contract: PCG64 via ``default_rng``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """Affine map ``xi -> M xi + shift`` with ``M J M^T = J``."""

    matrix: np.ndarray
    shift: Optional[np.ndarray] = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise InvalidArgument(f"transform matrix must be 2n x 2n, got {m.shape}")
        shift = np.zeros(m.shape[0]) if self.shift is None else np.array(self.shift, dtype=float).reshape(-1)
        if shift.shape != (m.shape[0],):
            raise InvalidArgument("shift length does not match matrix size")
        m.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "shift", shift)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def symplectic_residual(self) -> float:
        j = symplectic_form(self.n_modes)
        return float(np.max(np.abs(self.matrix @ j @ self.matrix.T - j)))

    def is_symplectic(self, tol: float = SYMPLECTIC_TOL) -> bool:
        scale = 1.0 + np.linalg.norm(self.matrix, np.inf) ** 2
        return self.symplectic_residual() <= tol * scale


def identity(n_modes: int) -> SymplecticTransform:
    return SymplecticTransform(np.eye(2 * n_modes), np.zeros(2 * n_modes))


def _embed(block: np.ndarray, modes: Sequence[int], n_modes: Optional[int]) -> np.ndarray:
    modes = [int(m) for m in modes]
    if n_modes is None:
        n_modes = max(modes) + 1
    if len(set(modes)) != len(modes):
        raise InvalidArgument(f"modes must be distinct, got {modes}")
    if min(modes) < 0 or max(modes) >= n_modes:
        raise InvalidArgument(f"modes {modes} out of range for {n_modes} modes")
    full = np.eye(2 * n_modes)
    idx = mode_indices(modes)
    full[np.ix_(idx, idx)] = block
    return full


def passive_block(u: np.ndarray) -> np.ndarray:
    """Quadrature matrix of the passive map ``a -> U a`` on interleaved modes.

    With ``U = A + iB`` each 2x2 block is ``[[A, -B], [B, A]]``.
    """
    u = np.asarray(u, dtype=complex)
    k = u.shape[0]
    out = np.zeros((2 * k, 2 * k))
    for i in range(k):
        for j in range(k):
            a, b = u[i, j].real, u[i, j].imag
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = [[a, -b], [b, a]]
    return out


def beam_splitter_unitary(theta: float, phi0: float = 0.0, phi1: float = 0.0) -> np.ndarray:
    """2x2 unitary acting on the annihilation operators of the two modes.

    Built as the adjoint of the matrix that maps the creation operators, so
    the phase-free case gives ``x1' = c x1 + s x2`` and ``x2' = -s x1 + c x2``.
    """
    c, s = np.cos(theta), np.sin(theta)
    creation = np.array([
        [c * np.exp(1j * phi0), -s * np.exp(-1j * phi1)],
        [s * np.exp(1j * phi1), c * np.exp(-1j * phi0)],
    ])
    return creation.conj().T


def beam_splitter(theta: float, phi0: float = 0.0, phi1: float = 0.0,
                  modes: Tuple[int, int] = (0, 1), n_modes: Optional[int] = None) -> SymplecticTransform:
    """Beam splitter with transmissivity ``cos^2 theta`` on modes ``(i, j)``."""
    if len(modes) != 2 or modes[0] == modes[1]:
        raise InvalidArgument(f"beam splitter needs two distinct modes, got {modes}")
    block = passive_block(beam_splitter_unitary(theta, phi0, phi1))
    m = _embed(block, modes, n_modes)
    return SymplecticTransform(m, np.zeros(m.shape[0]))


def phase_shift(phi: float, mode: int = 0, n_modes: Optional[int] = None) -> SymplecticTransform:
    """Rotation ``a -> e^{i phi} a`` of one mode."""
    block = passive_block(np.array([[np.exp(1j * phi)]]))
    m = _embed(block, [mode], n_modes)
    return SymplecticTransform(m, np.zeros(m.shape[0]))


def squeezer(r: float, mode: int = 0, n_modes: Optional[int] = None) -> SymplecticTransform:
    """Single-mode squeezer ``diag(e^-r, e^r)``."""
    m = _embed(np.diag([np.exp(-r), np.exp(r)]), [mode], n_modes)
    return SymplecticTransform(m, np.zeros(m.shape[0]))


def two_mode_squeezer(r: float, modes: Tuple[int, int] = (0, 1),
                      n_modes: Optional[int] = None) -> SymplecticTransform:
    """Two-mode squeezer whose action on vacuum gives the two-mode squeezed state.

    On vacuum this gives the same state as mixing an x-squeezed and a
    p-squeezed vacuum on a 50:50 beam splitter.
    """
    if len(modes) != 2 or modes[0] == modes[1]:
        raise InvalidArgument(f"two-mode squeezer needs two distinct modes, got {modes}")
    ch, sh = np.cosh(r), np.sinh(r)
    block = np.block([
        [ch * np.eye(2), np.diag([sh, -sh])],
        [np.diag([sh, -sh]), ch * np.eye(2)],
    ])
    m = _embed(block, modes, n_modes)
    return SymplecticTransform(m, np.zeros(m.shape[0]))


def displacement(dx: float, dp: float, mode: int = 0, n_modes: Optional[int] = None) -> SymplecticTransform:
    if n_modes is None:
        n_modes = mode + 1
    if not 0 <= mode < n_modes:
        raise InvalidArgument(f"mode {mode} out of range for {n_modes} modes")
    shift = np.zeros(2 * n_modes)
    shift[2 * mode:2 * mode + 2] = [dx, dp]
    return SymplecticTransform(np.eye(2 * n_modes), shift)


def local_symplectic(block: np.ndarray, mode: int, n_modes: int) -> SymplecticTransform:
    """Embed an arbitrary single-mode 2x2 symplectic matrix."""
    m = _embed(np.asarray(block, float), [mode], n_modes)
    return SymplecticTransform(m, np.zeros(m.shape[0]))


def apply(t: SymplecticTransform, s: GaussianState) -> GaussianState:
    """``cov -> M cov M^T`` and ``disp -> M disp + shift``."""
    if t.matrix.shape != s.cov.shape:
        raise InvalidArgument(f"transform acts on {t.n_modes} modes, state has {s.n_modes}")
    if not t.is_symplectic():
        raise InvalidTransform(f"matrix is not symplectic (residual {t.symplectic_residual():.3g})")
    m = t.matrix
    return GaussianState(m @ s.cov @ m.T, m @ s.disp + t.shift)


def compose(a: SymplecticTransform, b: SymplecticTransform) -> SymplecticTransform:
    """Transform equivalent to applying ``b`` first, then ``a``."""
    if a.matrix.shape != b.matrix.shape:
        raise InvalidArgument("cannot compose transforms of different size")
    return SymplecticTransform(a.matrix @ b.matrix, a.matrix @ b.shift + a.shift)


def random_symplectic(n_modes: int, seed, depth: int = 6, max_r: float = 0.8) -> SymplecticTransform:
    """Random symplectic built by composing squeezers, phase shifts and beam splitters."""
    rng = make_rng(seed)
    t = identity(n_modes)
    for _ in range(depth):
        for k in range(n_modes):
            t = compose(phase_shift(rng.uniform(0, 2 * np.pi), k, n_modes), t)
            t = compose(squeezer(rng.uniform(-max_r, max_r), k, n_modes), t)
        if n_modes > 1:
            i, j = rng.choice(n_modes, size=2, replace=False)
            bs = beam_splitter(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi),
                               rng.uniform(0, 2 * np.pi), (int(i), int(j)), n_modes)
            t = compose(bs, t)
    return t


# ---------------------------------------------------------------- measurements

@dataclass(frozen=True)
class MeasurementRecord:
    outcome: object
    conditional_state: Optional[GaussianState]


def _quadrature_vector(mode: int, theta: float, n_modes: int) -> np.ndarray:
    u = np.zeros(2 * n_modes)
    u[2 * mode:2 * mode + 2] = [np.cos(theta), np.sin(theta)]
    return u


def homodyne_variance(state: GaussianState, mode: int, theta: float = 0.0) -> float:
    """Variance of ``x cos(theta) + p sin(theta)``; 1/2 for the vacuum."""
    block = state.mode_block(mode)
    u = np.array([np.cos(theta), np.sin(theta)])
    return float(u @ block @ u / 2.0)


def homodyne_mean(state: GaussianState, mode: int, theta: float = 0.0) -> float:
    u = _quadrature_vector(mode, theta, state.n_modes)
    return float(u @ state.disp)


def homodyne_sample(state: GaussianState, mode: int, theta: float, count: int, seed) -> np.ndarray:
    """``count`` independent homodyne outcomes of one mode."""
    if count < 1:
        raise InvalidArgument("count must be at least 1")
    rng = make_rng(seed)
    mean = homodyne_mean(state, mode, theta)
    sd = np.sqrt(homodyne_variance(state, mode, theta))
    return mean + sd * rng.standard_normal(int(count))


def condition_on_homodyne(state: GaussianState, mode: int, theta: float, outcome: float) -> GaussianState:
    """State of the remaining modes after observing ``x(theta) = outcome`` on ``mode``."""
    if state.n_modes < 2:
        raise InvalidArgument("conditioning needs at least two modes")
    state.mode_block(mode)
    n = state.n_modes
    u = _quadrature_vector(mode, theta, n)
    rest = mode_indices([k for k in range(n) if k != mode])
    var = float(u @ state.cov @ u)
    if var <= psd_tol(state.cov):
        raise NumericalFailure("measured quadrature has vanishing variance")
    cross = state.cov[rest] @ u
    cov = state.cov[np.ix_(rest, rest)] - np.outer(cross, cross) / var
    disp = state.disp[rest] + cross * (outcome - u @ state.disp) / var
    return GaussianState(cov, disp)


def homodyne_measure(state: GaussianState, mode: int, theta: float, seed) -> MeasurementRecord:
    """Single homodyne shot with the conditional state of the other modes."""
    x = float(homodyne_sample(state, mode, theta, 1, seed)[0])
    cond = condition_on_homodyne(state, mode, theta, x) if state.n_modes > 1 else None
    return MeasurementRecord(x, cond)


def _bell_frame(state: GaussianState, modes: Tuple[int, int]) -> GaussianState:
    i, j = modes
    if i == j:
        raise InvalidArgument("Bell measurement needs two distinct modes")
    return apply(beam_splitter(np.pi / 4, modes=(i, j), n_modes=state.n_modes), state)


def bell_measure(state: GaussianState, modes: Tuple[int, int], seed):
    """Joint measurement of ``x_i - x_j`` and ``p_i + p_j``.

    A 50:50 beam splitter maps the pair to ``x_j' = (x_j - x_i)/sqrt 2`` and
    ``p_i' = (p_i + p_j)/sqrt 2``. These are sampled one after the other,
    conditioning in between. Returns ``(delta, sigma, remainder)`` with
    ``delta = x_i - x_j`` and ``sigma = p_i + p_j``; ``remainder`` is None when
    no modes are left.
    """
    i, j = modes
    rng = make_rng(seed)
    mixed = _bell_frame(state, (i, j))
    xj = float(homodyne_sample(mixed, j, 0.0, 1, rng)[0])
    if mixed.n_modes == 2:
        # the two output quadratures commute and are jointly Gaussian
        u = _quadrature_vector(j, 0.0, 2)
        v = _quadrature_vector(i, np.pi / 2, 2)
        var_u, var_v, cuv = u @ mixed.cov @ u, v @ mixed.cov @ v, u @ mixed.cov @ v
        mean_v = v @ mixed.disp + cuv * (xj - u @ mixed.disp) / var_u
        sd_v = np.sqrt(max(var_v - cuv ** 2 / var_u, 0.0) / 2.0)
        pi_ = float(mean_v + sd_v * rng.standard_normal())
        remainder = None
    else:
        cond = condition_on_homodyne(mixed, j, 0.0, xj)
        i_new = i if i < j else i - 1
        pi_ = float(homodyne_sample(cond, i_new, np.pi / 2, 1, rng)[0])
        remainder = condition_on_homodyne(cond, i_new, np.pi / 2, pi_)
    return -np.sqrt(2.0) * xj, np.sqrt(2.0) * pi_, remainder


@dataclass(frozen=True)
class BellSamples:
    """Vectorized Bell-measurement shots.

    ``cond_disp[k]`` is the displacement of the remaining modes after shot
    ``k``; the conditional covariance ``cond_cov`` is the same for all shots.
    """

    delta: np.ndarray
    sigma: np.ndarray
    cond_cov: Optional[np.ndarray]
    cond_disp: Optional[np.ndarray]


def bell_sample(state: GaussianState, modes: Tuple[int, int], count: int, seed) -> BellSamples:
    """``count`` independent Bell-measurement shots in one vectorized draw."""
    if count < 1:
        raise InvalidArgument("count must be at least 1")
    i, j = modes
    rng = make_rng(seed)
    mixed = _bell_frame(state, (i, j))
    n = mixed.n_modes
    meas = np.array([2 * j, 2 * i + 1])  # x_j', p_i'
    rest = mode_indices([k for k in range(n) if k not in (i, j)])
    g_mm = mixed.cov[np.ix_(meas, meas)]
    mean_m = mixed.disp[meas]
    chol = np.linalg.cholesky(g_mm / 2.0)
    draws = mean_m + rng.standard_normal((int(count), 2)) @ chol.T
    delta = -np.sqrt(2.0) * draws[:, 0]
    sigma = np.sqrt(2.0) * draws[:, 1]
    if rest.size == 0:
        return BellSamples(delta, sigma, None, None)
    g_rm = mixed.cov[np.ix_(rest, meas)]
    gain = g_rm @ np.linalg.inv(g_mm)
    cond_cov = mixed.cov[np.ix_(rest, rest)] - gain @ g_rm.T
    cond_disp = mixed.disp[rest] + (draws - mean_m) @ gain.T
    return BellSamples(delta, sigma, 0.5 * (cond_cov + cond_cov.T), cond_disp)


def heterodyne_sample(state: GaussianState, mode: int, count: int, seed) -> np.ndarray:
    """Complex heterodyne outcomes ``alpha`` of one mode.

    The outcome density is the Husimi function, i.e. a Gaussian in ``alpha``
    with quadrature covariance ``(cov + I)/2``.
    """
    if count < 1:
        raise InvalidArgument("count must be at least 1")
    rng = make_rng(seed)
    block = state.mode_block(mode)
    d = state.disp[2 * mode:2 * mode + 2]
    chol = np.linalg.cholesky((block + np.eye(2)) / 2.0)
    xp = d + rng.standard_normal((int(count), 2)) @ chol.T
    return (xp[:, 0] + 1j * xp[:, 1]) / np.sqrt(2.0)


def sample_wigner(cov: np.ndarray, means: np.ndarray, seed) -> np.ndarray:
    """One phase-space point per row of ``means`` from the Wigner density with covariance ``cov``."""
    rng = make_rng(seed)
    means = np.atleast_2d(means)
    chol = np.linalg.cholesky(np.asarray(cov) / 2.0)
    return means + rng.standard_normal(means.shape) @ chol.T

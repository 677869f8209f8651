"""Figures of merit for continuous-variable protocols."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import InvalidArgument, NumericalFailure
from .gaussian_core import (
    GaussianState,
    g_function,
    psd_tol,
    squeezed_vacuum_complex,
    tensor,
    two_mode_squeezed_state,
)
from .gaussian_ops import apply, beam_splitter, bell_sample, make_rng, sample_wigner


# ---------------------------------------------------------------- teleportation

@dataclass(frozen=True)
class TeleportResult:
    output: GaussianState
    added_noise: float
    fidelity_coherent: float


def teleport_fidelity(r: float) -> float:
    """Coherent-state teleportation fidelity ``1 / (1 + e^{-2r})``."""
    return float(1.0 / (1.0 + np.exp(-2.0 * r)))


def teleport_ensemble(state: GaussianState, r: float) -> TeleportResult:
    """Ensemble output of unity-gain teleportation with a TMSS resource of squeezing ``r``."""
    if state.n_modes != 1:
        raise InvalidArgument("teleportation input must be a single mode")
    noise = 2.0 * np.exp(-2.0 * r)
    out = GaussianState(state.cov + noise * np.eye(2), state.disp)
    return TeleportResult(out, float(noise), teleport_fidelity(r))


def teleport_consistency_check(state: GaussianState, r: float, seed, shots: int = 100_000) -> dict:
    """Monte-Carlo teleportation compared with :func:`teleport_ensemble`.

    Each shot Bell-measures the input (mode 0) together with half of a TMSS
    (mode 1), displaces the other half (mode 2) by the outcomes and draws a
    phase-space point from the resulting Wigner function. The empirical
    covariance is twice the sample covariance of those points.
    """
    if state.n_modes != 1:
        raise InvalidArgument("teleportation input must be a single mode")
    rng = make_rng(seed)
    full = tensor(state, two_mode_squeezed_state(r))
    bell = bell_sample(full, (0, 1), shots, rng)
    means = bell.cond_disp + np.column_stack([bell.delta, bell.sigma])
    points = sample_wigner(bell.cond_cov, means, rng)
    emp_cov = 2.0 * np.cov(points, rowvar=False)
    emp_mean = points.mean(axis=0)
    analytic = teleport_ensemble(state, r).output
    g = analytic.cov
    cov_se = np.sqrt((np.outer(np.diag(g), np.diag(g)) + g ** 2) / shots)
    mean_se = np.sqrt(np.diag(g) / 2.0 / shots)
    return {
        "shots": int(shots),
        "empirical_cov": emp_cov,
        "analytic_cov": g,
        "cov_stderr": cov_se,
        "cov_z": (emp_cov - g) / cov_se,
        "empirical_mean": emp_mean,
        "analytic_mean": analytic.disp,
        "mean_z": (emp_mean - analytic.disp) / mean_se,
        "var_x": float(emp_cov[0, 0] / 2.0),
    }


def swap_squeezing(r_a: float, r_b: float) -> float:
    """Effective squeezing after entanglement swapping, ``artanh(tanh r_a tanh r_b)``."""
    if r_a < 0 or r_b < 0:
        raise InvalidArgument("squeezing parameters must be nonnegative")
    return float(np.arctanh(np.tanh(r_a) * np.tanh(r_b)))


# ---------------------------------------------------------------- dense coding

def dense_coding_mutual_info(sigma2: float, r: float) -> float:
    """Mutual information ``ln(1 + sigma^2 e^{2r})`` in nats."""
    if sigma2 < 0 or r < 0:
        raise InvalidArgument("sigma2 and r must be nonnegative")
    return float(np.log1p(sigma2 * np.exp(2.0 * r)))


def dense_coding_optimal_sigma2(r: float) -> float:
    """Signal variance ``sinh r cosh r`` maximizing the mutual information at fixed ``nbar``."""
    return float(np.sinh(r) * np.cosh(r))


def dense_coding_nbar(r: float) -> float:
    """Mean photon number ``e^r sinh r`` of the optimal dense-coding signal."""
    return float(np.exp(r) * np.sinh(r))


def dense_coding_capacity(nbar: float) -> float:
    """``ln(1 + nbar + nbar^2)`` in nats."""
    if nbar < 0:
        raise InvalidArgument("nbar must be nonnegative")
    return float(np.log1p(nbar + nbar ** 2))


def single_mode_capacity(nbar: float) -> float:
    """Capacity ``g(nbar)`` of the noiseless single-mode channel."""
    if nbar < 0:
        raise InvalidArgument("nbar must be nonnegative")
    return float(g_function(nbar))


# ---------------------------------------------------------------- entangler

def entangler_output(zeta_a: complex, zeta_b: complex, theta: float,
                     phi0: float = 0.0, phi1: float = 0.0) -> GaussianState:
    """Two squeezed vacua mixed on a general beam splitter."""
    inp = tensor(squeezed_vacuum_complex(zeta_a), squeezed_vacuum_complex(zeta_b))
    return apply(beam_splitter(theta, phi0, phi1), inp)


def entangler_entanglement(zeta_a: complex, zeta_b: complex, theta: float,
                           phi0: float = 0.0, phi1: float = 0.0) -> float:
    """Entropy of entanglement of the beam-splitter output, in nats.

    From the output block ``m`` of mode a, ``nu = sqrt(m11 m22 - m12^2)`` and
    ``E = ln((nu+1)/2) - ((nu-1)/2) ln((nu-1)/(nu+1))``, with ``E = 0`` at
    ``nu = 1``.
    """
    out = entangler_output(zeta_a, zeta_b, theta, phi0, phi1)
    m = out.cov[:2, :2]
    nu2 = m[0, 0] * m[1, 1] - m[0, 1] ** 2
    eps = psd_tol(m)
    if nu2 < (1.0 - eps) ** 2:
        raise NumericalFailure(f"reduced symplectic eigenvalue below one: {np.sqrt(max(nu2, 0))}")
    nu = np.sqrt(max(nu2, 1.0))
    if nu - 1.0 <= 2e-14:
        return 0.0
    return float(np.log((nu + 1.0) / 2.0) - (nu - 1.0) / 2.0 * np.log((nu - 1.0) / (nu + 1.0)))


def entangler_optimal_phase(phi_a: float, phi0: float, phi1: float) -> float:
    """``phi_b`` in ``[0, 2 pi)`` satisfying ``2(phi1 - phi0) - (phi_b - phi_a) = pi`` (mod 2 pi)."""
    return float(np.mod(phi_a + 2.0 * (phi1 - phi0) - np.pi, 2.0 * np.pi))


# ---------------------------------------------------------------- misc bounds

def clone_fidelity_coherent() -> float:
    """Fidelity ``1/(1 + sigma^2)`` with ``sigma^2 = 1/2`` of each Gaussian clone."""
    return 2.0 / 3.0


def gkp_error_bound(delta: float) -> float:
    """Shift-error bound ``(2 delta / 2) exp(-pi / (4 delta^2))`` for finitely squeezed GKP codewords."""
    if delta <= 0:
        raise InvalidArgument("delta must be positive")
    return float(np.clip((2.0 * delta / 2.0) * np.exp(-np.pi / (4.0 * delta ** 2)), 0.0, 1.0))


def squeezed_source_bitflip_bound(delta: float) -> float:
    """Bound ``(2 delta / pi) exp(-pi / (4 delta^2))`` on source bit flips in squeezed-state QKD."""
    if delta <= 0:
        raise InvalidArgument("delta must be positive")
    return float(np.clip((2.0 * delta / np.pi) * np.exp(-np.pi / (4.0 * delta ** 2)), 0.0, 1.0))


def squeezed_source_bitflip_exact(delta: float) -> float:
    """Exact Gaussian tail ``erfc(sqrt(pi) / (2 delta))`` of a shift beyond ``sqrt(pi)/2``.

    A squeezed state with ``x`` variance ``delta^2 / 2`` flips its bit when the
    shift exceeds half the lattice spacing, on either side.
    """
    if delta <= 0:
        raise InvalidArgument("delta must be positive")
    return float(erfc(np.sqrt(np.pi) / (2.0 * delta)))

"""Gaussian channels ``cov -> X^T cov X + Y`` and lossy-channel capacity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidArgument
from .gaussian_core import GaussianState, g_function, psd_tol, symplectic_form


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Channel acting as ``cov -> X^T cov X + Y`` and ``disp -> X^T disp``."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        x = np.array(self.X, dtype=float)
        y = np.array(self.Y, dtype=float)
        if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] % 2 or x.shape != y.shape:
            raise InvalidArgument(f"X and Y must be equal 2n x 2n matrices, got {x.shape} and {y.shape}")
        if np.max(np.abs(y - y.T)) > 1e-10 * (1 + np.linalg.norm(y, np.inf)):
            raise InvalidArgument("Y must be symmetric")
        y = 0.5 * (y + y.T)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Y", y)

    @property
    def n_modes(self) -> int:
        return self.X.shape[0] // 2

    def to_dict(self) -> dict:
        return {"X": self.X.tolist(), "Y": self.Y.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "GaussianChannel":
        if doc.get("kind") == "thermal":
            return thermal_channel(doc["eta"], doc.get("nbar", 0.0))
        if "X" not in doc or "Y" not in doc:
            raise InvalidArgument("channel document needs X and Y, or kind=thermal")
        return cls(np.asarray(doc["X"], float), np.asarray(doc["Y"], float))


def identity_channel(n_modes: int = 1) -> GaussianChannel:
    return GaussianChannel(np.eye(2 * n_modes), np.zeros((2 * n_modes, 2 * n_modes)))


def classical_noise_channel(Y) -> GaussianChannel:
    """Additive Gaussian noise ``cov -> cov + Y``."""
    y = np.asarray(Y, dtype=float)
    if y.ndim != 2 or y.shape[0] != y.shape[1]:
        raise InvalidArgument("Y must be a square matrix")
    if np.max(np.abs(y - y.T)) > 1e-10 * (1 + np.linalg.norm(y, np.inf)):
        raise InvalidArgument("Y must be symmetric")
    if np.linalg.eigvalsh(0.5 * (y + y.T)).min() < -psd_tol(y):
        raise InvalidArgument("Y must be positive semidefinite")
    return GaussianChannel(np.eye(y.shape[0]), y)


def thermal_channel(eta, nbar=0.0) -> GaussianChannel:
    """Beam splitter coupling to a thermal reservoir, one ``(eta, nbar)`` per mode.

    ``eta`` and ``nbar`` may be scalars or sequences; a scalar is broadcast
    against the other argument.
    """
    eta, nbar = np.broadcast_arrays(np.atleast_1d(np.asarray(eta, float)),
                                    np.atleast_1d(np.asarray(nbar, float)))
    if np.any((eta < 0) | (eta > 1)):
        raise InvalidArgument("transmittivity must lie in [0, 1]")
    if np.any(nbar < 0):
        raise InvalidArgument("reservoir photon number must be nonnegative")
    x = np.kron(np.diag(np.sqrt(eta)), np.eye(2))
    y = np.kron(np.diag((2 * nbar + 1) * (1 - eta)), np.eye(2))
    return GaussianChannel(x, y)


def cp_matrix(c: GaussianChannel) -> np.ndarray:
    j = symplectic_form(c.n_modes)
    return c.Y + 1j * j - 1j * c.X.T @ j @ c.X


def is_completely_positive(c: GaussianChannel) -> bool:
    """True iff ``Y + iJ - i X^T J X >= 0`` within tolerance."""
    m = cp_matrix(c)
    scale = psd_tol(c.Y) + psd_tol(c.X.T @ c.X)
    return bool(np.linalg.eigvalsh(m).min() >= -scale)


def apply_channel(c: GaussianChannel, s: GaussianState) -> GaussianState:
    if c.X.shape != s.cov.shape:
        raise InvalidArgument(f"channel acts on {c.n_modes} modes, state has {s.n_modes}")
    if not is_completely_positive(c):
        raise InvalidArgument("channel is not completely positive")
    return GaussianState(c.X.T @ s.cov @ c.X + c.Y, c.X.T @ s.disp)


def compose_channels(first: GaussianChannel, second: GaussianChannel) -> GaussianChannel:
    """Channel equal to applying ``first`` and then ``second``."""
    if first.X.shape != second.X.shape:
        raise InvalidArgument("cannot compose channels of different size")
    x = first.X @ second.X
    y = second.X.T @ first.Y @ second.X + second.Y
    return GaussianChannel(x, y)


def holevo_coherent_ensemble(eta: float, nbar: float) -> float:
    """Holevo quantity of a Gaussian coherent-state ensemble sent through pure loss."""
    if not 0 < eta <= 1:
        raise InvalidArgument("eta must lie in (0, 1]")
    if nbar < 0:
        raise InvalidArgument("nbar must be nonnegative")
    return float(g_function(eta * nbar))


def _allocation(lam: float, etas: np.ndarray) -> np.ndarray:
    # photon number per mode solving eta * g'(eta N) = lam
    out = np.zeros_like(etas)
    live = etas > 0
    with np.errstate(over="ignore"):
        out[live] = 1.0 / (etas[live] * np.expm1(lam / etas[live]))
    return out


def lossy_capacity_allocation(etas: Sequence[float], energy: float) -> np.ndarray:
    """Optimal photon allocation maximizing ``sum g(eta_k N_k)`` with ``sum N_k = energy``.

    The stationarity condition ``eta_k g'(eta_k N_k) = lam`` gives
    ``N_k = 1 / (eta_k (exp(lam/eta_k) - 1))``, always positive since
    ``g'(0)`` diverges, so no mode is switched off. The multiplier is found
    by bracketing root search on ``log lam``.
    """
    etas = np.asarray(etas, dtype=float).reshape(-1)
    if energy < 0:
        raise InvalidArgument("energy must be nonnegative")
    if np.any((etas < 0) | (etas > 1)):
        raise InvalidArgument("transmittivities must lie in [0, 1]")
    if energy == 0 or not np.any(etas > 0):
        return np.zeros_like(etas)

    def excess(log_lam):
        return np.sum(_allocation(np.exp(log_lam), etas)) - energy

    lo, hi = -5.0, 5.0
    while excess(lo) < 0:
        lo -= 5.0
    while excess(hi) > 0:
        hi += 5.0
    log_lam = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    alloc = _allocation(np.exp(log_lam), etas)
    # remove the residual root-finding error proportionally
    return alloc * (energy / alloc.sum())


def lossy_capacity(etas, energy: float) -> float:
    """Energy-constrained classical capacity of parallel lossy channels, in nats."""
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    alloc = lossy_capacity_allocation(etas, energy)
    return float(np.sum(g_function(etas * alloc)))

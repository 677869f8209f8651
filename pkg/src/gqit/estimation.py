"""Estimation of the mean of displaced thermal states.

The family is ``rho_{zeta, nbar}``: covariance ``(2 nbar + 1) I`` and
displacement ``sqrt(2) (Re zeta, Im zeta)``. Fisher matrices refer to the
real parameters ``theta = sqrt(2) (Re zeta, Im zeta)``. All logarithms are
natural.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidArgument
from .gaussian_core import GaussianState
from .gaussian_ops import heterodyne_sample, make_rng


def family_state(zeta: complex, nbar: float) -> GaussianState:
    if nbar < 0:
        raise InvalidArgument("nbar must be nonnegative")
    zeta = complex(zeta)
    return GaussianState((2 * nbar + 1) * np.eye(2), np.sqrt(2.0) * np.array([zeta.real, zeta.imag]))


def _check_copies(n_copies: int) -> None:
    if int(n_copies) < 1:
        raise InvalidArgument("n_copies must be at least 1")


def heterodyne_mse(nbar: float, n_copies: int = 1) -> float:
    """``E|zeta_hat - zeta|^2 = (nbar + 1)/n`` for heterodyne on ``n`` copies."""
    _check_copies(n_copies)
    return (nbar + 1.0) / n_copies


def heterodyne_mse_monte_carlo(zeta: complex, nbar: float, n_copies: int, trials: int, seed) -> float:
    """Empirical MSE of heterodyning the concentrated mode and rescaling by ``1/sqrt(n)``."""
    _check_copies(n_copies)
    conc = concentrate_copies(zeta, nbar, n_copies)
    alpha = heterodyne_sample(conc, 0, trials, make_rng(seed))
    est = alpha / np.sqrt(n_copies)
    return float(np.mean(np.abs(est - zeta) ** 2))


class FisherMatrices(NamedTuple):
    sld: np.ndarray
    kmb: np.ndarray
    rld_inverse: np.ndarray


def fisher_matrices(nbar: float) -> FisherMatrices:
    """SLD, KMB Fisher matrices and the inverse RLD Fisher matrix."""
    if nbar <= 0:
        raise InvalidArgument("the KMB Fisher information diverges at nbar = 0")
    sld = np.eye(2) / (nbar + 0.5)
    kmb = np.log((1.0 + nbar) / nbar) * np.eye(2)
    rld_inv = np.array([[nbar + 0.5, 0.5j], [-0.5j, nbar + 0.5]])
    return FisherMatrices(sld, kmb, rld_inv)


def rld_weighted_bound(G, nbar: float) -> float:
    """Lower bound ``(nbar + 1/2) Tr G + sqrt(det G)`` on the weighted error ``Tr G V``."""
    G = np.asarray(G, dtype=float)
    if G.shape != (2, 2) or not np.allclose(G, G.T, atol=1e-12):
        raise InvalidArgument("G must be a symmetric 2x2 matrix")
    if np.linalg.eigvalsh(G).min() < -1e-12 * (1 + np.abs(G).max()):
        raise InvalidArgument("G must be positive semidefinite")
    return float((nbar + 0.5) * np.trace(G) + np.sqrt(max(np.linalg.det(G), 0.0)))


def rld_optimal_covariance(G, nbar: float) -> np.ndarray:
    """Error covariance ``(nbar + 1/2) I + (sqrt(det G)/2) G^-1`` attaining the weighted bound."""
    G = np.asarray(G, dtype=float)
    return (nbar + 0.5) * np.eye(2) + 0.5 * np.sqrt(np.linalg.det(G)) * np.linalg.inv(G)


def heterodyne_error_covariance(nbar: float) -> np.ndarray:
    """Error covariance of heterodyne in the ``theta`` parameters."""
    return (nbar + 1.0) * np.eye(2)


def bayes_min_mse(nbar: float, prior_nbar: float) -> float:
    """Minimum Bayes MSE for a Gaussian prior of mean photon number ``prior_nbar``.

    Equals ``N1 N / (N1 + N) + N1^2 / ((N1 + N + 1)(N1 + N))`` which simplifies
    to ``N1 (N + 1)/(N1 + N + 1)``, the error of heterodyne followed by
    shrinking the outcome by ``N1 / (N1 + N + 1)``.
    """
    n, n1 = float(nbar), float(prior_nbar)
    if n < 0 or n1 < 0:
        raise InvalidArgument("photon numbers must be nonnegative")
    if n == 0 and n1 == 0:
        raise InvalidArgument("nbar and prior_nbar cannot both vanish")
    return n1 * n / (n1 + n) + n1 ** 2 / ((n1 + n + 1.0) * (n1 + n))


def heterodyne_plain_bayes_mse(nbar: float) -> float:
    """Bayes MSE of using the raw heterodyne outcome, independent of the prior."""
    return float(nbar + 1.0)


def bayes_mse_monte_carlo(nbar: float, prior_nbar: float, trials: int, seed) -> float:
    """Sampled MSE of the shrunk heterodyne estimator under the Gaussian prior."""
    rng = make_rng(seed)
    sd_prior = np.sqrt(prior_nbar / 2.0)
    zeta = sd_prior * (rng.standard_normal(trials) + 1j * rng.standard_normal(trials))
    sd_noise = np.sqrt((nbar + 1.0) / 2.0)
    alpha = zeta + sd_noise * (rng.standard_normal(trials) + 1j * rng.standard_normal(trials))
    est = prior_nbar / (prior_nbar + nbar + 1.0) * alpha
    return float(np.mean(np.abs(est - zeta) ** 2))


class PhotonNumberMse(NamedTuple):
    optimal: float
    heterodyne: float


def photon_number_mse(nbar: float, n_copies: int = 1) -> PhotonNumberMse:
    """Optimal MSE ``N(N+1)/n`` for estimating ``nbar`` and the heterodyne value ``(N+1)^2/n``."""
    _check_copies(n_copies)
    if nbar < 0:
        raise InvalidArgument("nbar must be nonnegative")
    return PhotonNumberMse(nbar * (nbar + 1.0) / n_copies, (nbar + 1.0) ** 2 / n_copies)


def relative_entropy(zeta0: complex, zeta1: complex, nbar: float) -> float:
    """``D(rho_{zeta0} || rho_{zeta1}) = |zeta0 - zeta1|^2 ln((nbar + 1)/nbar)``."""
    if nbar <= 0:
        raise InvalidArgument("relative entropy diverges at nbar = 0")
    return float(abs(complex(zeta0) - complex(zeta1)) ** 2 * np.log((nbar + 1.0) / nbar))


def stein_exponent(zeta0: complex, zeta1: complex, nbar: float) -> float:
    """Optimal type-II error exponent, equal to the relative entropy."""
    return relative_entropy(zeta0, zeta1, nbar)


def bures_fidelity(zeta0: complex, zeta1: complex, nbar: float) -> float:
    """Root fidelity ``exp(-|zeta0 - zeta1|^2 / (2 (2 nbar + 1)))``."""
    if nbar < 0:
        raise InvalidArgument("nbar must be nonnegative")
    return float(np.exp(-abs(complex(zeta0) - complex(zeta1)) ** 2 / (2.0 * (2.0 * nbar + 1.0))))


def concentrate_copies(zeta: complex, nbar: float, n: int) -> GaussianState:
    """The single informative mode ``rho_{sqrt(n) zeta, nbar}`` left after concentrating ``n`` copies."""
    _check_copies(n)
    return family_state(np.sqrt(n) * complex(zeta), nbar)

"""Gaussian states in the covariance-matrix picture.

Conventions used throughout the package:

* quadratures are ordered ``x1, p1, x2, p2, ...`` (interleaved);
* the vacuum covariance matrix is the identity, so ``<x^2>_vac = 1/2``;
* a state is physical iff ``cov + iJ >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidArgument, InvalidState, NumericalFailure

# g(x) is set to zero below this argument
G_EPS = 1e-14
PURITY_TOL = 1e-8


def sym_tol(mat: np.ndarray) -> float:
    """Tolerance for symmetry checks, scaled by the infinity norm."""
    return 1e-10 * (1.0 + np.linalg.norm(mat, np.inf))


def psd_tol(mat: np.ndarray) -> float:
    """Tolerance for positive-semidefiniteness checks."""
    return 1e-9 * (1.0 + np.linalg.norm(mat, np.inf))


def symplectic_form(n: int) -> np.ndarray:
    """Block-diagonal J for ``n`` modes, each block ``[[0, 1], [-1, 0]]``."""
    if n < 1:
        raise InvalidArgument(f"number of modes must be positive, got {n}")
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def mode_indices(modes: Iterable[int]) -> np.ndarray:
    """Quadrature row indices for the given mode indices."""
    modes = np.asarray(list(modes), dtype=int)
    return np.ravel(np.column_stack([2 * modes, 2 * modes + 1]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Covariance matrix and displacement vector of an n-mode Gaussian state.

    The constructor validates shape and symmetry only. Physicality is a
    property that can be queried with :func:`is_physical`, since partial
    transposes and similar objects are legitimately unphysical.
    """

    cov: np.ndarray
    disp: Optional[np.ndarray] = None

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2 or cov.shape[0] == 0:
            raise InvalidState(f"covariance matrix must be 2n x 2n, got shape {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise InvalidState("covariance matrix has non-finite entries")
        if np.max(np.abs(cov - cov.T)) > sym_tol(cov):
            raise InvalidState("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if self.disp is None:
            disp = np.zeros(cov.shape[0])
        else:
            disp = np.array(self.disp, dtype=float).reshape(-1)
        if disp.shape != (cov.shape[0],):
            raise InvalidState(f"displacement must have length {cov.shape[0]}, got {disp.shape}")
        if not np.all(np.isfinite(disp)):
            raise InvalidState("displacement has non-finite entries")
        cov.setflags(write=False)
        disp.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "disp", disp)

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    def mode_block(self, mode: int) -> np.ndarray:
        """2x2 covariance block of a single mode."""
        _check_mode(self, mode)
        return self.cov[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2]

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "cov": self.cov.tolist(),
            "disp": self.disp.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GaussianState":
        try:
            cov = np.asarray(doc["cov"], dtype=float)
            disp = np.asarray(doc.get("disp", np.zeros(cov.shape[0])), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidState(f"malformed state document: {exc}") from exc
        state = cls(cov, disp)
        if "n_modes" in doc and int(doc["n_modes"]) != state.n_modes:
            raise InvalidState("n_modes does not match covariance shape")
        return state

    def allclose(self, other: "GaussianState", atol: float = 1e-10) -> bool:
        return (
            self.cov.shape == other.cov.shape
            and np.allclose(self.cov, other.cov, atol=atol, rtol=0)
            and np.allclose(self.disp, other.disp, atol=atol, rtol=0)
        )


def _check_mode(state: GaussianState, mode: int) -> None:
    if not 0 <= int(mode) < state.n_modes:
        raise InvalidArgument(f"mode {mode} out of range for {state.n_modes}-mode state")


# ---------------------------------------------------------------- constructors

def vacuum(n: int = 1) -> GaussianState:
    if n < 1:
        raise InvalidArgument(f"number of modes must be positive, got {n}")
    return GaussianState(np.eye(2 * n), np.zeros(2 * n))


def coherent_state(alpha: complex) -> GaussianState:
    """Coherent state ``|alpha>``; displacement is ``sqrt(2) (Re alpha, Im alpha)``."""
    alpha = complex(alpha)
    return GaussianState(np.eye(2), np.sqrt(2.0) * np.array([alpha.real, alpha.imag]))


def thermal_state(nu: float) -> GaussianState:
    """Thermal state with covariance ``nu * I``; mean photon number is ``(nu - 1)/2``."""
    nu = float(nu)
    if nu < 1.0 - psd_tol(np.array([[nu]])):
        raise InvalidState(f"thermal state requires nu >= 1, got {nu}")
    return GaussianState(nu * np.eye(2), np.zeros(2))


def thermal_nu(nbar: float) -> float:
    """Symplectic eigenvalue of a thermal state with mean photon number ``nbar``."""
    return 2.0 * nbar + 1.0


def thermal_beta(nu: float) -> float:
    """Inverse temperature (in units of the mode frequency) from ``e^-beta = (nu-1)/(nu+1)``."""
    if nu <= 1.0:
        return np.inf
    return -np.log((nu - 1.0) / (nu + 1.0))


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def one_mode_squeezed_vacuum(r: float, phi: float = 0.0) -> GaussianState:
    """Squeezed vacuum with squeezing ``zeta = r e^{i phi}``.

    For ``phi = 0`` the covariance is ``diag(e^{-2r}, e^{2r})``; a nonzero phase
    rotates the squeezed axis to the angle ``phi / 2``.
    """
    cov = np.diag([np.exp(-2 * r), np.exp(2 * r)])
    if phi:
        rot = rotation(phi / 2.0)
        cov = rot @ cov @ rot.T
    return GaussianState(cov, np.zeros(2))


def squeezed_vacuum_complex(zeta: complex) -> GaussianState:
    zeta = complex(zeta)
    return one_mode_squeezed_vacuum(abs(zeta), np.angle(zeta) if zeta != 0 else 0.0)


def two_mode_squeezed_state(r: float) -> GaussianState:
    """Two-mode squeezed vacuum, where ``x1 - x2`` and ``p1 + p2`` are squeezed."""
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    cov = np.block([
        [ch * np.eye(2), np.diag([sh, -sh])],
        [np.diag([sh, -sh]), ch * np.eye(2)],
    ])
    return GaussianState(cov, np.zeros(4))


# ------------------------------------------------------------------ predicates

def is_physical(state: GaussianState) -> bool:
    """True iff ``cov + iJ`` is positive semidefinite within tolerance."""
    herm = state.cov + 1j * symplectic_form(state.n_modes)
    return bool(np.linalg.eigvalsh(herm).min() >= -psd_tol(state.cov))


def require_physical(state: GaussianState) -> None:
    if not is_physical(state):
        raise InvalidState("state violates the uncertainty principle (cov + iJ is not PSD)")


def is_pure(state: GaussianState) -> bool:
    return is_physical(state) and abs(np.linalg.det(state.cov) - 1.0) <= PURITY_TOL


def symplectic_eigenvalues(state_or_cov) -> np.ndarray:
    """Williamson spectrum, one value per mode, sorted descending.

    Taken as the moduli of the eigenvalues of ``J cov``, which come in
    purely imaginary pairs ``+-i nu``.
    """
    cov = state_or_cov.cov if isinstance(state_or_cov, GaussianState) else np.asarray(state_or_cov, float)
    n = cov.shape[0] // 2
    if np.linalg.eigvalsh(cov).min() <= 0:
        raise InvalidState("symplectic spectrum requires a positive definite covariance matrix")
    try:
        ev = np.linalg.eigvals(symplectic_form(n) @ cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigen-solver failed: {exc}") from exc
    if np.max(np.abs(ev.real)) > psd_tol(cov):
        raise NumericalFailure("eigenvalues of J cov are not purely imaginary")
    nus = np.sort(np.abs(ev.imag))[::-1]
    # each nu appears twice
    return nus[::2].copy()


def g_function(x):
    """Entropy of a thermal mode with mean photon number ``x``, in nats."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    big = x > G_EPS
    xb = x[big]
    # (x+1) ln(x+1) - x ln x rearranged to avoid cancellation at large x
    out[big] = np.log1p(xb) + xb * np.log1p(1.0 / xb)
    return out if out.ndim else float(out)


def g_prime(x):
    """Derivative ``ln((x + 1)/x)`` of :func:`g_function`."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.log1p(1.0 / x)
    return out if out.ndim else float(out)


def von_neumann_entropy(state: GaussianState) -> float:
    """Entropy in nats, ``sum_j g((nu_j - 1)/2)``."""
    require_physical(state)
    nus = symplectic_eigenvalues(state)
    eps = psd_tol(state.cov)
    nus = np.where((nus < 1.0) & (nus >= 1.0 - eps), 1.0, nus)
    return float(np.sum(g_function((nus - 1.0) / 2.0)))


# ------------------------------------------------------------------ structure

def partial_trace(state: GaussianState, keep: Sequence[int]) -> GaussianState:
    """Reduced state on the modes listed in ``keep`` (in the given order)."""
    keep = [int(k) for k in keep]
    if not keep:
        raise InvalidArgument("keep must name at least one mode")
    if len(set(keep)) != len(keep):
        raise InvalidArgument("keep contains duplicate modes")
    for k in keep:
        _check_mode(state, k)
    idx = mode_indices(keep)
    return GaussianState(state.cov[np.ix_(idx, idx)], state.disp[idx])


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state, modes of ``a`` first."""
    n1, n2 = a.cov.shape[0], b.cov.shape[0]
    cov = np.zeros((n1 + n2, n1 + n2))
    cov[:n1, :n1] = a.cov
    cov[n1:, n1:] = b.cov
    return GaussianState(cov, np.concatenate([a.disp, b.disp]))


def tensor_all(states: Iterable[GaussianState]) -> GaussianState:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def permute_modes(state: GaussianState, order: Sequence[int]) -> GaussianState:
    """Reorder modes; ``order`` must be a permutation of all mode indices."""
    if sorted(order) != list(range(state.n_modes)):
        raise InvalidArgument(f"{order} is not a permutation of the modes")
    return partial_trace(state, order)


def mean_photon_number(state: GaussianState, mode: int = 0) -> float:
    block = state.mode_block(mode)
    d = state.disp[2 * mode:2 * mode + 2]
    return float(0.25 * (np.trace(block) - 2.0) + 0.5 * np.dot(d, d))


def wigner_value(state: GaussianState, point) -> float:
    """Wigner function ``exp[-(xi-d)^T cov^-1 (xi-d)] / (pi^n sqrt(det cov))``."""
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.shape != state.disp.shape:
        raise InvalidArgument(f"point must have length {state.disp.size}")
    det = np.linalg.det(state.cov)
    if not det > 0:
        raise NumericalFailure("covariance matrix is singular")
    try:
        diff = point - state.disp
        quad = diff @ np.linalg.solve(state.cov, diff)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"covariance matrix is singular: {exc}") from exc
    return float(np.exp(-quad) / (np.pi ** state.n_modes * np.sqrt(det)))

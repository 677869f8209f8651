"""Separability and distillability of Gaussian states.

A bipartite split is given either as an integer ``k`` (the first ``k`` modes
form party A) or as a sequence of party-A mode indices; party B is the rest.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.linalg import sqrtm

from .errors import InvalidArgument, NumericalFailure
from .gaussian_core import (
    GaussianState,
    mode_indices,
    permute_modes,
    psd_tol,
    require_physical,
    symplectic_form,
    tensor,
    vacuum,
)
from .gaussian_ops import (
    SymplecticTransform,
    apply,
    beam_splitter,
    condition_on_homodyne,
)

Split = Union[int, Sequence[int]]

SEPARABLE = "Separable"
ENTANGLED = "Entangled"
UNDECIDED = "Undecided"
DEFAULT_MAX_ITER = 200


def party_modes(split: Split, n_modes: int) -> Tuple[list, list]:
    """Resolve a split into sorted mode lists ``(A, B)``."""
    if isinstance(split, (int, np.integer)):
        a = list(range(int(split)))
    else:
        a = sorted(int(m) for m in split)
    if len(set(a)) != len(a) or any(m < 0 or m >= n_modes for m in a):
        raise InvalidArgument(f"invalid party A modes {a} for {n_modes} modes")
    b = [m for m in range(n_modes) if m not in a]
    if not a or not b:
        raise InvalidArgument("both parties must hold at least one mode")
    return a, b


def _flip_matrix(party_a, n_modes: int) -> np.ndarray:
    diag = np.ones(2 * n_modes)
    for m in party_a:
        diag[2 * m + 1] = -1.0
    return np.diag(diag)


def partial_transpose(state: GaussianState, split: Split) -> GaussianState:
    """Transpose on party A: the momenta of A change sign. The result may be unphysical."""
    a, _ = party_modes(split, state.n_modes)
    f = _flip_matrix(a, state.n_modes)
    return GaussianState(f @ state.cov @ f, f @ state.disp)


def is_ppt(state: GaussianState, split: Split) -> bool:
    """True iff ``cov + i J~ >= 0`` with ``J~ = (-J_A) + J_B``."""
    require_physical(state)
    a, _ = party_modes(split, state.n_modes)
    f = _flip_matrix(a, state.n_modes)
    jt = f @ symplectic_form(state.n_modes) @ f
    herm = state.cov + 1j * jt
    return bool(np.linalg.eigvalsh(herm).min() >= -psd_tol(state.cov))


def is_distillable(state: GaussianState, split: Split) -> bool:
    """Gaussian states are distillable exactly when they are NPPT."""
    return not is_ppt(state, split)


# --------------------------------------------------------------- standard form

@dataclass(frozen=True)
class TwoModeStandardForm:
    n_a: float
    n_b: float
    k_x: float
    k_p: float
    local_transforms: Tuple[np.ndarray, np.ndarray]

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.n_a, self.n_b, self.k_x, self.k_p)

    def matrix(self) -> np.ndarray:
        return np.array([
            [self.n_a, 0, self.k_x, 0],
            [0, self.n_a, 0, self.k_p],
            [self.k_x, 0, self.n_b, 0],
            [0, self.k_p, 0, self.n_b],
        ], dtype=float)


def _local_normalizer(block: np.ndarray) -> Tuple[np.ndarray, float]:
    # symplectic S with S block S^T = sqrt(det block) I
    det = np.linalg.det(block)
    if not det > 0 or np.linalg.eigvalsh(block).min() <= 0:
        raise NumericalFailure("local block is not positive definite")
    n = np.sqrt(det)
    inv_sqrt = np.linalg.inv(np.real(sqrtm(block)))
    return np.sqrt(n) * inv_sqrt, n


def standard_form_matrix(cov: np.ndarray) -> TwoModeStandardForm:
    """Standard form of any positive definite 4x4 matrix under local symplectics."""
    cov = np.asarray(cov, dtype=float)
    s_a, n_a = _local_normalizer(cov[:2, :2])
    s_b, n_b = _local_normalizer(cov[2:, 2:])
    c = s_a @ cov[:2, 2:] @ s_b.T
    u, sv, vt = np.linalg.svd(c)
    kp_sign = 1.0
    if np.linalg.det(u) < 0:
        u[:, 1] *= -1
        kp_sign = -kp_sign
    if np.linalg.det(vt) < 0:
        vt[1, :] *= -1
        kp_sign = -kp_sign
    k_x, k_p = sv[0], kp_sign * sv[1]
    if np.isclose(k_x, abs(k_p), rtol=1e-12, atol=0) and k_p > 0 and np.linalg.det(c) <= 0:
        k_p = -k_p
    t_a = u.T @ s_a
    t_b = vt @ s_b
    return TwoModeStandardForm(float(n_a), float(n_b), float(k_x), float(k_p), (t_a, t_b))


def standard_form(state: GaussianState) -> TwoModeStandardForm:
    """Local-symplectic normal form ``(n_a, n_b, k_x, k_p)`` with ``k_x >= |k_p|``."""
    if state.n_modes != 2:
        raise InvalidArgument("standard form is defined for two-mode states")
    return standard_form_matrix(state.cov)


# ------------------------------------------------------------ verdicts

@dataclass(frozen=True)
class SeparabilityVerdict:
    verdict: str
    iterations: int = 0
    witness: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def separable(self) -> bool:
        return self.verdict == SEPARABLE


def simon_separability(state: GaussianState) -> SeparabilityVerdict:
    """PPT test on the standard form of a two-mode state."""
    if state.n_modes != 2:
        raise InvalidArgument("the Simon test needs a two-mode state")
    require_physical(state)
    sf = standard_form(state)
    d_x = sf.n_a * sf.n_b - sf.k_x ** 2
    d_p = sf.n_a * sf.n_b - sf.k_p ** 2
    lhs = d_x * d_p + 1.0
    rhs = sf.n_a ** 2 + sf.n_b ** 2 - 2.0 * sf.k_x * sf.k_p
    tol = 1e-9 * (1.0 + abs(lhs) + abs(rhs))
    verdict = SEPARABLE if lhs >= rhs - tol else ENTANGLED
    return SeparabilityVerdict(verdict, 0, sf.matrix())


def _max_iter(max_iter: Optional[int]) -> int:
    if max_iter is not None:
        return int(max_iter)
    env = os.environ.get("GQIT_MAX_ITER")
    return int(env) if env else DEFAULT_MAX_ITER


def _is_psd(herm: np.ndarray, scale: np.ndarray) -> bool:
    return bool(np.linalg.eigvalsh(herm).min() >= -psd_tol(scale))


def giedke_separability(state: GaussianState, split: Split = 1,
                        max_iter: Optional[int] = None) -> SeparabilityVerdict:
    """Iterative separability test decisive for every bipartite Gaussian state.

    The map is ``A' = B' = A - Re X``, ``C' = -Im X`` with
    ``X = C (B - iJ)^-1 C^T``. Stops with Entangled when ``A - iJ`` (or the
    whole matrix minus ``iJ``) fails to be PSD and with Separable when
    ``A - ||C|| I - iJ >= 0``. Returns Undecided at the iteration cap, which
    defaults to 200 and can be overridden through ``GQIT_MAX_ITER``.
    """
    require_physical(state)
    a_modes, b_modes = party_modes(split, state.n_modes)
    cap = _max_iter(max_iter)
    idx_a, idx_b = mode_indices(a_modes), mode_indices(b_modes)
    a = state.cov[np.ix_(idx_a, idx_a)]
    b = state.cov[np.ix_(idx_b, idx_b)]
    c = state.cov[np.ix_(idx_a, idx_b)]
    j_a = symplectic_form(len(a_modes))
    for it in range(cap + 1):
        if not _is_psd(a - 1j * j_a, a):
            return SeparabilityVerdict(ENTANGLED, it, a)
        c_norm = np.linalg.norm(c, 2) if c.size else 0.0
        n_b = b.shape[0] // 2
        j_b = symplectic_form(n_b)
        # cov >= (A - |C| I) + (B - |C| I); B only differs from A before the first step
        if (_is_psd(a - c_norm * np.eye(a.shape[0]) - 1j * j_a, a)
                and _is_psd(b - c_norm * np.eye(b.shape[0]) - 1j * j_b, b)):
            return SeparabilityVerdict(SEPARABLE, it, a)
        if it == cap:
            break
        full = np.block([[a, c], [c.T, b]])
        j_full = symplectic_form(full.shape[0] // 2)
        if not _is_psd(full - 1j * j_full, full):
            return SeparabilityVerdict(ENTANGLED, it + 1, full)
        reg = 1e-12 * np.linalg.norm(b, 2)
        denom = b - 1j * j_b + reg * np.eye(b.shape[0])
        try:
            x = c @ np.linalg.solve(denom, c.T)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"Giedke map inversion failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise NumericalFailure("Giedke map produced non-finite entries")
        a_new = a - x.real
        a_new = 0.5 * (a_new + a_new.T)
        c = -x.imag
        a, b = a_new, a_new.copy()
    return SeparabilityVerdict(UNDECIDED, cap, None)


# ------------------------------------------------------------ symmetrization

def _local_det_gap(state: GaussianState) -> float:
    return float(np.linalg.det(state.cov[:2, :2]) - np.linalg.det(state.cov[2:, 2:]))


def _mix_with_vacuum(state: GaussianState, theta: float) -> GaussianState:
    # mode 1 meets a vacuum ancilla on a beam splitter; the ancilla's p is measured
    full = tensor(state, vacuum(1))
    mixed = apply(beam_splitter(theta, modes=(1, 2), n_modes=3), full)
    return condition_on_homodyne(mixed, 2, np.pi / 2, 0.0)


def symmetrization_angle(wigner_form: TwoModeStandardForm) -> float:
    """Beam-splitter angle from ``tan^2 theta = (N_a^2 - N_b^2)/(N_b - D_x N_a)``."""
    na, nb, kx = wigner_form.n_a, wigner_form.n_b, wigner_form.k_x
    dx = na * nb - kx ** 2
    den = nb - dx * na
    if den <= 0:
        raise NumericalFailure("symmetrization condition has no real solution")
    return float(np.arctan(np.sqrt((na ** 2 - nb ** 2) / den)))


def symmetrize(state: GaussianState, tol: float = 1e-8) -> Tuple[GaussianState, float]:
    """Make the two local blocks of an NPPT two-mode state equally mixed by LOCC.

    The state is first brought to standard form in the Wigner-correlation
    picture (inverse covariance). The mode with the larger local determinant
    is then mixed with a vacuum ancilla on a beam splitter, and the ancilla's
    momentum is measured. The angle comes from the closed-form condition; if
    that leaves the determinants unequal a root search on the angle is used.
    Returns the conditional state (modes in input order) and the angle.
    """
    if state.n_modes != 2:
        raise InvalidArgument("symmetrization needs a two-mode state")
    require_physical(state)
    det_a = np.linalg.det(state.cov[:2, :2])
    det_b = np.linalg.det(state.cov[2:, 2:])
    if abs(det_a - det_b) <= tol * max(1.0, det_a, det_b):
        return state, 0.0
    swapped = det_a > det_b
    work = permute_modes(state, [1, 0]) if swapped else state
    # bring the Wigner correlation matrix to standard form
    wf = standard_form_matrix(np.linalg.inv(work.cov))
    t_a, t_b = wf.local_transforms
    local = np.zeros((4, 4))
    local[:2, :2] = np.linalg.inv(t_a).T
    local[2:, 2:] = np.linalg.inv(t_b).T
    work = apply(SymplecticTransform(local, np.zeros(4)), work)
    theta = symmetrization_angle(wf)
    out = _mix_with_vacuum(work, theta)
    scale = max(1.0, np.linalg.det(work.cov[2:, 2:]))
    if abs(_local_det_gap(out)) > tol * scale:
        theta = brentq(lambda t: _local_det_gap(_mix_with_vacuum(work, t)),
                       0.0, np.pi / 2, xtol=1e-14)
        out = _mix_with_vacuum(work, theta)
    if swapped:
        out = permute_modes(out, [1, 0])
    return out, float(theta)


# ------------------------------------------------------------ tripartite

TRIPARTITE_CUTS = {"A|BC": [0], "B|AC": [1], "C|AB": [2]}


@dataclass(frozen=True)
class TripartiteClassification:
    class_id: int
    cuts: Dict[str, bool]  # True when the cut is NPPT
    iterations: int = 0
    giedke: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": f"Class {self.class_id}",
            "class": self.class_id,
            "iterations": self.iterations,
            "cuts": {name: {"nppt": nppt, "giedke": self.giedke.get(name)}
                     for name, nppt in self.cuts.items()},
        }


def classify_tripartite(state: GaussianState, with_giedke: bool = False,
                        max_iter: Optional[int] = None) -> TripartiteClassification:
    """Classes 1 to 4 from the number of NPPT single-mode cuts (3, 2, 1, 0).

    Class 4 is not split into its fully separable and bound-entangled parts.
    """
    if state.n_modes != 3:
        raise InvalidArgument("tripartite classification needs a three-mode state")
    require_physical(state)
    cuts = {name: not is_ppt(state, a) for name, a in TRIPARTITE_CUTS.items()}
    giedke = {}
    iters = 0
    if with_giedke:
        for name, a in TRIPARTITE_CUTS.items():
            v = giedke_separability(state, a, max_iter)
            giedke[name] = v.verdict
            iters += v.iterations
    n_nppt = sum(cuts.values())
    return TripartiteClassification(4 - n_nppt, cuts, iters, giedke)

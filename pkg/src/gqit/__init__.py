"""Gaussian quantum information toolkit.

States are covariance matrices (vacuum = identity) plus displacement
vectors in interleaved ``x1, p1, x2, p2, ...`` ordering.
"""
from .errors import (
    DegenerateInput,
    GqitError,
    InvalidArgument,
    InvalidState,
    InvalidTransform,
    NumericalFailure,
)
from .gaussian_core import (
    GaussianState,
    coherent_state,
    g_function,
    is_physical,
    is_pure,
    mean_photon_number,
    one_mode_squeezed_vacuum,
    partial_trace,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    thermal_state,
    two_mode_squeezed_state,
    vacuum,
    von_neumann_entropy,
    wigner_value,
)
from .gaussian_ops import (
    SymplecticTransform,
    apply,
    beam_splitter,
    bell_measure,
    compose,
    displacement,
    squeezer,
    two_mode_squeezer,
)

__version__ = "0.1.0"

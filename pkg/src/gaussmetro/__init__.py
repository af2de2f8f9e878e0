"""Quantum Fisher information and measurement compatibility for Gaussian states."""

from .channels import GaussianChannel, compose, identity_channel, phase_covariant, phase_rotation
from .errors import (
    ClosedFormSingularityError,
    DomainError,
    GaussMetroError,
    IncreaseCutoffError,
    InvalidArgumentError,
    NumericFailure,
    SingularInformationError,
)
from .estimation import compatibility_report, crb_covariance_bound, delta_ind, delta_sim, ratio
from .gaussian_state import (
    GaussianState,
    apply_channel,
    coherent,
    make_state,
    mean_energy_per_mode,
    thermal,
    tmdss,
    vacuum,
)
from .metrology import ParametrizedFamily, QFIReport, j_matrix, qfi_matrix, sld_coefficients
from .symplectic import symplectic_eigenvalues, symplectic_form, williamson

__version__ = "0.1.0"

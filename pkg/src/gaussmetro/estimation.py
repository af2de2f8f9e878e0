"""Cramer-Rao bounds, total variances and compatibility checks from (F, J)."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgumentError, SingularInformationError

TOL_J = 1e-8
TOL_F = 1e-6
SINGULAR_RATIO = 1e-12


def _square(F, name="F"):
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise InvalidArgumentError(f"{name} must be a square matrix, got shape {F.shape}")
    return F


def _inverse(F):
    ev, U = np.linalg.eigh(F)
    if ev[-1] <= 0 or ev[0] <= SINGULAR_RATIO * ev[-1]:
        null = U[:, ev <= SINGULAR_RATIO * max(ev[-1], 0.0)].T
        raise SingularInformationError(
            f"information matrix is singular (eigenvalues {ev.tolist()})",
            null_directions=null.tolist())
    return np.linalg.inv(F)


def crb_covariance_bound(F, M=1):
    """(M F)^-1, the lower bound on the estimator covariance after M repetitions."""
    if M < 1:
        raise InvalidArgumentError("number of repetitions must be >= 1")
    return _inverse(_square(F)) / M


def delta_ind(F):
    """sum_i 1 / F_ii."""
    diag = np.diag(_square(F))
    if np.any(diag <= 0):
        raise SingularInformationError("a diagonal information entry is not positive",
                                       null_directions=np.flatnonzero(diag <= 0).tolist())
    return float(np.sum(1.0 / diag))


def delta_sim(F):
    """tr(F^-1) / kappa."""
    F = _square(F)
    return float(np.trace(_inverse(F)) / F.shape[0])


def ratio(F):
    return delta_ind(F) / delta_sim(F)


@dataclass
class CompatibilityReport:
    kappa: int
    condition_i: bool
    max_abs_J: float
    condition_iii: bool
    max_normalized_offdiag: float
    condition_ii: str = "not-evaluated"
    tol_J: float = TOL_J
    tol_F: float = TOL_F

    def to_record(self):
        return asdict(self)


def compatibility_report(F, J, tol_J=TOL_J, tol_F=TOL_F):
    F = _square(F)
    J = _square(J, "J")
    if F.shape != J.shape:
        raise InvalidArgumentError(f"F and J shapes differ: {F.shape} vs {J.shape}")
    max_j = float(np.max(np.abs(J)))
    diag = np.sqrt(np.abs(np.diag(F)))
    norm = np.outer(diag, diag)
    off = np.abs(F) / np.where(norm > 0, norm, np.inf)
    off[np.diag_indices_from(off)] = 0.0
    max_off = float(np.max(off))
    return CompatibilityReport(F.shape[0], max_j <= tol_J, max_j, max_off <= tol_F, max_off,
                               tol_J=tol_J, tol_F=tol_F)

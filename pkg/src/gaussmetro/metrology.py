"""Quantum Fisher information and mean SLD commutators for Gaussian families.

The SLD of a Gaussian state is quadratic in the quadratures,

    L = L0 + L1 . R + R^T L2 R,

with L2 expanded over the basis S^{-T} M_l^{jk} S^{-1} of the Williamson frame
and L1, L0 fixed by the first moments. The information matrix and the
commutator matrix then follow from (d, V), their derivatives and L2 alone.
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DomainError, GaussMetroError, InvalidArgumentError, NumericFailure
from .symplectic import COND_LIMIT, symplectic_form, williamson

EPS_PURE = 1e-8
# denominators below this are treated as exactly singular
EPS_SINGULAR = 1e-12
FD_STEP = 1e-6
RESIDUAL_WARN = 1e-6

_SQ2 = np.sqrt(2.0)
# 2x2 blocks of M_l^{jk}: i*sigma_y, sigma_z, identity, sigma_x, all / sqrt(2)
_BLOCKS = np.array([
    [[0.0, 1.0], [-1.0, 0.0]],
    [[1.0, 0.0], [0.0, -1.0]],
    [[1.0, 0.0], [0.0, 1.0]],
    [[0.0, 1.0], [1.0, 0.0]],
]) / _SQ2
_PARITY = np.array([1.0, -1.0, 1.0, -1.0])  # (-1)^l

# callables notified with every QFIReport built; used by the test suite
report_observers = []


@dataclass
class ParametrizedFamily:
    """theta -> GaussianState, optionally with analytic derivatives.

    `derivs(theta)` returns (list of dd/dtheta_i, list of dV/dtheta_i).
    """

    dim_theta: int
    eval: Callable
    derivs: Optional[Callable] = None
    names: Optional[Sequence[str]] = None

    def name(self, i):
        return self.names[i] if self.names else f"theta[{i}]"

    def __call__(self, theta):
        return self.eval(np.asarray(theta, dtype=float))


@dataclass
class SLDCoefficients:
    L0: float
    L1: np.ndarray
    L2: np.ndarray
    regularized_terms: int = 0
    near_singular_terms: int = 0


@dataclass
class QFIReport:
    F: np.ndarray
    J: np.ndarray
    nu: np.ndarray
    derivative_method: str
    diagnostics: dict = field(default_factory=dict)
    sld: list = field(default_factory=list, repr=False)

    def to_record(self):
        return {
            "F": self.F.ravel().tolist(),
            "J": self.J.ravel().tolist(),
            "shape": list(self.F.shape),
            "nu": self.nu.tolist(),
            "derivative_method": self.derivative_method,
            "diagnostics": self.diagnostics,
        }


class _Inverse:
    """Cholesky-based solver for V with a condition-number guard."""

    def __init__(self, V):
        ev = np.linalg.eigvalsh(V)
        if ev[0] <= 0 or ev[0] < ev[-1] / COND_LIMIT:
            raise NumericFailure("covariance matrix is singular or too ill-conditioned to invert",
                                 {"min_eigenvalue": float(ev[0]), "max_eigenvalue": float(ev[-1])})
        self._cf = cho_factor(V)

    def solve(self, b):
        return cho_solve(self._cf, b)


def _fd_step(t, step):
    if step is not None:
        return step
    return max(FD_STEP, FD_STEP * abs(t))


def _eval_at(family, theta, i):
    try:
        return family(theta)
    except GaussMetroError as exc:
        raise DomainError(f"family cannot be evaluated when varying {family.name(i)}: {exc}",
                          parameter=family.name(i)) from exc


def state_derivatives(family, theta, method="auto", step=None, richardson=False):
    """Derivatives of (d, V) with respect to every parameter.

    method: "analytic", "finite-difference" or "auto" (analytic when available).
    `step` may be a scalar or one step per parameter; the default per-parameter
    step is max(1e-6, 1e-6 |theta_i|). With `richardson`, two central
    differences (h and h/2) are combined to cancel the O(h^2) term.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (family.dim_theta,):
        raise InvalidArgumentError(f"expected {family.dim_theta} parameters, got shape {theta.shape}")
    if method == "auto":
        method = "analytic" if family.derivs is not None else "finite-difference"
    if method == "analytic":
        if family.derivs is None:
            raise InvalidArgumentError("family provides no analytic derivatives")
        dds, dVs = family.derivs(theta)
        return [np.asarray(v, dtype=float) for v in dds], [0.5 * (np.asarray(a) + np.asarray(a).T) for a in dVs]
    if method != "finite-difference":
        raise InvalidArgumentError(f"unknown derivative method {method!r}")

    steps = np.broadcast_to(np.asarray([np.nan] if step is None else step, dtype=float), (family.dim_theta,))
    dds, dVs = [], []
    for i in range(family.dim_theta):
        h = _fd_step(theta[i], None if np.isnan(steps[i]) else float(steps[i]))

        def central(h):
            e = np.zeros_like(theta)
            e[i] = h
            plus, minus = _eval_at(family, theta + e, i), _eval_at(family, theta - e, i)
            return (plus.d - minus.d) / (2 * h), (plus.V - minus.V) / (2 * h)

        dd, dV = central(h)
        if richardson:
            dd2, dV2 = central(h / 2)
            dd, dV = (4 * dd2 - dd) / 3, (4 * dV2 - dV) / 3
        dds.append(dd)
        dVs.append(0.5 * (dV + dV.T))
    return dds, dVs


def _l2_matrix(wd, dV, eps_pure=EPS_PURE):
    """Second-order SLD coefficient for one parameter; returns (L2, dropped, near_singular)."""
    S_inv = wd.S_inv
    nu = wd.nu
    m = nu.size
    A = S_inv @ dV @ S_inv.T
    scale = np.max(np.abs(dV)) if dV.size else 0.0
    Lt = np.zeros_like(A)
    dropped = near = 0
    for j in range(m):
        for k in range(m):
            # tr(A M_l^{jk}) only sees the (k, j) block of A
            Akj = A[2 * k:2 * k + 2, 2 * j:2 * j + 2]
            for l in range(4):
                a = np.sum(Akj * _BLOCKS[l].T)
                den = nu[j] * nu[k] - _PARITY[l]
                if abs(den) < eps_pure:
                    if abs(a) <= eps_pure * scale:
                        dropped += 1
                        continue
                    if abs(den) < EPS_SINGULAR:
                        raise NumericFailure(
                            "non-smooth pure-state direction: singular SLD term with non-vanishing numerator",
                            {"modes": (j, k), "l": l, "numerator": float(a), "denominator": float(den)})
                    near += 1
                Lt[2 * j:2 * j + 2, 2 * k:2 * k + 2] += (a / den) * _BLOCKS[l]
    L2 = S_inv.T @ Lt @ S_inv
    return 0.5 * (L2 + L2.T), dropped, near


def sld_coefficients(state, dV, dd, eps_pure=EPS_PURE, *, _wd=None, _inv=None):
    """SLD coefficients (L0, L1, L2) for a single parameter direction."""
    dV = np.asarray(dV, dtype=float)
    dd = np.asarray(dd, dtype=float)
    n = state.d.size
    if dV.shape != (n, n) or dd.shape != (n,):
        raise InvalidArgumentError("derivative shapes do not match the state")
    if np.max(np.abs(dV - dV.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(dV))):
        raise InvalidArgumentError("dV must be symmetric")
    wd = _wd if _wd is not None else williamson(state.V)
    inv = _inv if _inv is not None else _Inverse(state.V)
    L2, dropped, near = _l2_matrix(wd, 0.5 * (dV + dV.T), eps_pure)
    d = state.d
    L1 = 2 * inv.solve(dd) - 2 * L2 @ d
    L0 = -0.5 * np.trace(state.V @ L2) - L1 @ d - d @ L2 @ d
    return SLDCoefficients(float(L0), L1, L2, dropped, near)


def _validate(report):
    F, J = report.F, report.J
    scale = max(1.0, np.max(np.abs(F)))
    min_eig = float(np.linalg.eigvalsh(F)[0]) if F.size else 0.0
    report.diagnostics["min_eigenvalue"] = min_eig
    if min_eig < -1e-10 * scale:
        report.diagnostics.setdefault("warnings", []).append(
            f"information matrix not positive semidefinite (min eigenvalue {min_eig:.3e})")
    for obs in report_observers:
        obs(report)
    return report


def qfi_from_derivatives(state, dds, dVs, derivative_method="analytic", eps_pure=EPS_PURE):
    """Information matrix F and commutator matrix J from (d, V) and their derivatives."""
    kappa = len(dds)
    if len(dVs) != kappa or kappa == 0:
        raise InvalidArgumentError("need one displacement and one covariance derivative per parameter")
    wd = williamson(state.V)
    inv = _Inverse(state.V)
    Om = symplectic_form(state.m)
    V = state.V
    slds = [sld_coefficients(state, dVs[i], dds[i], eps_pure, _wd=wd, _inv=inv) for i in range(kappa)]
    L2 = [s.L2 for s in slds]
    Vinv_dd = [inv.solve(dd) for dd in dds]

    F = np.empty((kappa, kappa))
    J = np.empty((kappa, kappa))
    for a in range(kappa):
        for b in range(kappa):
            F[a, b] = 0.5 * np.sum(dVs[b] * L2[a].T) + 2 * dds[a] @ Vinv_dd[b]
            J[a, b] = (2 * np.trace(Om @ L2[b] @ V @ L2[a])
                       + 2 * Vinv_dd[a] @ Om @ Vinv_dd[b])

    f_res = float(np.max(np.abs(F - F.T)))
    j_res = float(np.max(np.abs(J + J.T)))
    F = 0.5 * (F + F.T)
    J = 0.5 * (J - J.T)
    warn = []
    if f_res > RESIDUAL_WARN * max(1.0, np.max(np.abs(F))):
        warn.append(f"information matrix asymmetry residual {f_res:.3e}")
    if j_res > RESIDUAL_WARN * max(1.0, np.max(np.abs(F))):
        warn.append(f"commutator matrix symmetric residual {j_res:.3e}")
    regularized = [s.regularized_terms for s in slds]
    near = [s.near_singular_terms for s in slds]
    if any(near):
        warn.append("near pure-state boundary: SLD denominators below the purity threshold")
    diagnostics = {
        "regularized_terms": regularized,
        "near_singular_terms": near,
        "F_asymmetry_residual": f_res,
        "J_symmetric_residual": j_res,
        "warnings": warn,
    }
    report = QFIReport(F, J, wd.nu.copy(), derivative_method, diagnostics, slds)
    return _validate(report)


def qfi_matrix(family, theta, method="auto", step=None, richardson=False, eps_pure=EPS_PURE):
    """Evaluate the family at theta and return F, J and diagnostics."""
    theta = np.asarray(theta, dtype=float)
    state = family(theta)
    if method == "auto":
        method = "analytic" if family.derivs is not None else "finite-difference"
    dds, dVs = state_derivatives(family, theta, method, step, richardson)
    report = qfi_from_derivatives(state, dds, dVs, method, eps_pure)
    report.diagnostics["parameters"] = [family.name(i) for i in range(family.dim_theta)]
    for w in report.diagnostics["warnings"]:
        warnings.warn(w, RuntimeWarning, stacklevel=2)
    return report


def j_matrix(family, theta, method="auto", step=None, richardson=False):
    return qfi_matrix(family, theta, method, step, richardson).J

"""Joint estimation of a phase and phase-covariant noise with two-mode probes.

Each mode of a two-mode displaced squeezed probe is rotated by +phi/2 and
-phi/2 and then sent through the noisy channel Lambda_{x,y}. The probe energy
per mode nbar = sinh(r)^2 + |alpha|^2 is split by p = |alpha|^2 / nbar.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import ClosedFormSingularityError, InvalidArgumentError, NumericFailure
from .estimation import delta_ind, delta_sim
from .gaussian_state import GaussianState, tmdss, tmdss_covariance
from .metrology import ParametrizedFamily, qfi_matrix
from .channels import rotation_matrix

KAPPA = 3
PARAMETERS = ("phi", "x", "y")
CHANNEL_MARGIN = 1e-9
P_TOL = 1e-8
PRESCAN_POINTS = 33
_INVPHI = (np.sqrt(5.0) - 1) / 2


@dataclass(frozen=True)
class SchemeConfig:
    nbar: float
    p: float
    phi: float = 0.0
    x: float = 1.0
    y: float = 0.0

    @property
    def alpha_sq(self):
        return self.p * self.nbar

    @property
    def r(self):
        return float(np.arcsinh(np.sqrt((1 - self.p) * self.nbar)))


def channel_is_valid(x, y, margin=0.0):
    return x >= 0 and y >= abs(1 - x) + margin


def _check_energy(nbar, p):
    if nbar < 0:
        raise InvalidArgumentError(f"nbar must be non-negative, got {nbar}")
    if not 0 <= p <= 1:
        raise InvalidArgumentError(f"p must lie in [0, 1], got {p}")


def probe(nbar, p):
    """Optimal-form probe: Re alpha = Re beta = 0, Im alpha = Im beta, r >= 0."""
    _check_energy(nbar, p)
    a = np.sqrt(p * nbar)
    return tmdss(1j * a, 1j * a, np.arcsinh(np.sqrt((1 - p) * nbar)))


def _rotation(phi):
    return block_diag(rotation_matrix(phi / 2), rotation_matrix(-phi / 2))


def _drotation(phi):
    c, s = np.cos(phi / 2) / 2, np.sin(phi / 2) / 2
    # d/dphi of R(+phi/2) and R(-phi/2)
    return block_diag(np.array([[-s, c], [-c, -s]]), np.array([[-s, -c], [c, -s]]))


def scheme_family(nbar, p, margin=0.0, initial=None):
    """Family theta = (phi, x, y) -> output state, with analytic derivatives.

    `initial` replaces the optimal-form probe (used for compatibility studies).
    """
    state0 = probe(nbar, p) if initial is None else initial
    d0, V0 = state0.d, state0.V

    def check(theta):
        _, x, y = theta
        if not channel_is_valid(x, y, margin):
            raise InvalidArgumentError(f"channel (x={x}, y={y}) violates y >= |1 - x|"
                                       + (f" + {margin}" if margin else ""))

    def evaluate(theta):
        check(theta)
        phi, x, y = theta
        R = _rotation(phi)
        return GaussianState(np.sqrt(x) * R @ d0, x * R @ V0 @ R.T + y * np.eye(4))

    def derivs(theta):
        check(theta)
        phi, x, y = theta
        if x <= 0:
            raise InvalidArgumentError("analytic x-derivative needs x > 0")
        R, dR = _rotation(phi), _drotation(phi)
        RV0R = R @ V0 @ R.T
        dd = [np.sqrt(x) * dR @ d0, R @ d0 / (2 * np.sqrt(x)), np.zeros(4)]
        dV = [x * (dR @ V0 @ R.T + R @ V0 @ dR.T), RV0R, np.eye(4)]
        return dd, dV

    return ParametrizedFamily(3, evaluate, derivs, PARAMETERS)


def analytic_qfi(x, y, r, alpha_sq):
    """Closed-form 3x3 information matrix of the scheme for optimal-form probes."""
    if x == 0 or x + y == 0:
        raise ClosedFormSingularityError(f"closed form is singular at x={x}, y={y}")
    c2, c4 = np.cosh(2 * r), np.cosh(4 * r)
    s2, e2 = np.sinh(2 * r), np.exp(2 * r)
    a2 = alpha_sq
    big = 2 * x * y * (2 * c2 * (x**2 + y**2) + x * y * c4) + x**4 + 4 * x**2 * y**2 + y**4 - 1
    den_m = 2 * x * y * c2 + x**2 + y**2 - 1
    den_p = 2 * x * y * c2 + x**2 + y**2 + 1
    if big == 0 or den_m == 0:
        raise ClosedFormSingularityError(f"closed form is singular at x={x}, y={y}, r={r}")
    F = np.zeros((3, 3))
    F[0, 0] = 2 * a2 * x * (x * s2 + x * c2 + y) / (2 * x * y * c2 + x**2 + y**2)
    F[1, 1] = (1 / (2 * x**2)) * (
        (x**2 - y**2 + 1) ** 2 / den_m
        - ((x - y) ** 2 + 1) * ((x + y) ** 2 + 1) / den_p
        + 4 * a2 * x / (x + y)
        + 2
    ) + 2 * a2 * (e2 - 1) / ((x + y) * (e2 * y + x))
    F[2, 2] = 2 * (x**2 * c4 + 2 * x * y * c2 + y**2 + 1) / big
    F[1, 2] = F[2, 1] = (2 * (x**2 + y**2 + 1) * c2 + 4 * x * y) / big
    return F


def analytic_qfi_energy(nbar, p, x, y):
    return analytic_qfi(x, y, np.arcsinh(np.sqrt((1 - p) * nbar)), p * nbar)


def scheme_qfi(nbar, p, x, y, phi=0.0, engine="closed-form"):
    """3x3 information matrix of the scheme from the closed form or the generic engine."""
    if engine == "closed-form":
        return analytic_qfi_energy(nbar, p, x, y)
    if engine == "generic":
        return qfi_matrix(scheme_family(nbar, p), [phi, x, y], "analytic").F
    raise InvalidArgumentError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------- optimization

def _objective(kind, nbar, x, y, phi=0.0, engine="closed-form"):
    def f(p):
        try:
            F = scheme_qfi(nbar, p, x, y, phi, engine)
            if kind == "ind-combined":
                return delta_ind(F)
            if kind == "sim":
                return delta_sim(F)
            if kind in PARAMETERS:
                i = PARAMETERS.index(kind)
                return 1.0 / F[i, i] if F[i, i] > 0 else np.inf
        except NumericFailure:
            return np.inf
        raise InvalidArgumentError(f"unknown objective {kind!r}")
    return f


def golden_section(f, a, b, tol=P_TOL):
    """Minimize a unimodal f on [a, b]; returns (x, f(x))."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _polish(f, p, lo, hi, h=1e-3):
    """One Newton step on f' with 5-point differences.

    Golden-section search can only place a flat minimum to about sqrt(eps);
    the difference quotients resolve it to near machine precision.
    """
    if p - 2 * h < 0 or p + 2 * h > 1:
        return p
    fm2, fm1, f0, fp1, fp2 = (f(p + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    if not (np.isfinite(d1) and np.isfinite(d2)) or d2 <= 0:
        return p
    step = d1 / d2
    return p - step if abs(step) < 1e-5 and lo <= p - step <= hi else p


@dataclass
class OptimizationResult:
    p_opt: float
    delta_opt: float
    multimodal: bool = False


def minimize_over_p(f, tol=P_TOL):
    """Global minimum of f over [0, 1].

    A uniform pre-scan brackets every discrete local minimum; each bracket is
    refined by golden-section search plus one Newton step, and the endpoints
    are kept as candidates.
    Ties go to the larger p.
    """
    grid = np.linspace(0.0, 1.0, PRESCAN_POINTS)
    vals = np.array([f(p) for p in grid])
    if not np.any(np.isfinite(vals)):
        raise NumericFailure("objective is undefined over the whole interval p in [0, 1]")
    candidates = [(1.0, vals[-1]), (0.0, vals[0])]
    n_local = 0
    for i in range(PRESCAN_POINTS):
        left = vals[i - 1] if i > 0 else np.inf
        right = vals[i + 1] if i < PRESCAN_POINTS - 1 else np.inf
        if np.isfinite(vals[i]) and vals[i] <= left and vals[i] <= right:
            n_local += 1
            lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, PRESCAN_POINTS - 1)]
            p_star, _ = golden_section(f, lo, hi, tol)
            p_star = _polish(f, p_star, lo, hi)
            candidates.append((p_star, f(p_star)))
    best_p, best_v = candidates[0]
    for p, v in candidates[1:]:
        if v < best_v or (v == best_v and p > best_p):
            best_p, best_v = p, v
    return OptimizationResult(float(best_p), float(best_v), n_local > 1)


def optimize_p(nbar, x, y, objective="ind-combined", phi=0.0, engine="closed-form"):
    """Energy split minimizing the individual-combined or simultaneous total variance."""
    if nbar <= 0:
        raise InvalidArgumentError("nbar must be positive")
    if not channel_is_valid(x, y):
        raise InvalidArgumentError(f"channel (x={x}, y={y}) is not completely positive")
    if objective not in ("ind-combined", "sim"):
        raise InvalidArgumentError(f"objective must be 'ind-combined' or 'sim', got {objective!r}")
    res = minimize_over_p(_objective(objective, nbar, x, y, phi, engine))
    if res.multimodal:
        warnings.warn(f"several local minima in p for {objective} at x={x}, y={y}", RuntimeWarning)
    return res


def delta_ind_independent(nbar, x, y, phi=0.0, engine="closed-form"):
    """Sum over parameters of min_p 1/F_ii; returns (delta, per-parameter p_opt)."""
    if nbar <= 0:
        raise InvalidArgumentError("nbar must be positive")
    if not channel_is_valid(x, y):
        raise InvalidArgumentError(f"channel (x={x}, y={y}) is not completely positive")
    results = [minimize_over_p(_objective(name, nbar, x, y, phi, engine)) for name in PARAMETERS]
    return sum(r.delta_opt for r in results), tuple(r.p_opt for r in results)


def asymptotic_ratio(nbar, x, y):
    if nbar <= 0 or x <= 0 or y <= 0:
        raise InvalidArgumentError("asymptotic ratio needs nbar, x, y > 0")
    return 3 * (1 - (x**2 + y**2 + 1) ** 2 / (4 * x**3 * y) * nbar**-3.0)


SCAN_COLUMNS = (
    "x", "y", "nbar", "p_opt_ind_com", "p_opt_ind_ind_phi", "p_opt_ind_ind_x", "p_opt_ind_ind_y",
    "p_opt_sim", "delta_ind_com", "delta_ind_ind", "delta_sim", "ratio",
)
OBJECTIVES = ("ind-combined", "ind-independent", "sim")


def scan_point(nbar, x, y, objectives=OBJECTIVES, phi=0.0, engine="closed-form"):
    """Optimal energy splits, total variances and their ratio at one (x, y).

    Columns of objectives that are not requested are NaN.
    """
    nan = OptimizationResult(np.nan, np.nan)
    com = optimize_p(nbar, x, y, "ind-combined", phi, engine) if "ind-combined" in objectives else nan
    sim = optimize_p(nbar, x, y, "sim", phi, engine) if "sim" in objectives else nan
    if "ind-independent" in objectives:
        ind_ind, p_ind = delta_ind_independent(nbar, x, y, phi, engine)
    else:
        ind_ind, p_ind = np.nan, (np.nan,) * 3
    return {
        "x": x,
        "y": y,
        "nbar": nbar,
        "p_opt_ind_com": com.p_opt,
        "p_opt_ind_ind_phi": p_ind[0],
        "p_opt_ind_ind_x": p_ind[1],
        "p_opt_ind_ind_y": p_ind[2],
        "p_opt_sim": sim.p_opt,
        "delta_ind_com": com.delta_opt,
        "delta_ind_ind": ind_ind,
        "delta_sim": sim.delta_opt,
        "ratio": com.delta_opt / sim.delta_opt,
    }

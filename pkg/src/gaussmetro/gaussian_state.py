"""Gaussian states (d, V) with vacuum covariance equal to the identity.

Displacements follow d = sqrt(2) (Re a_1, Im a_1, ..., Re a_m, Im a_m).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import InvalidArgumentError
from .symplectic import DEFAULT_TOL, is_physical_covariance


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GaussianState:
    d: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).ravel()
        V = np.asarray(self.V, dtype=float)
        n = d.size
        if n == 0 or n % 2 or V.shape != (n, n):
            raise InvalidArgumentError(f"need d of length 2m and V of shape (2m, 2m), got {d.shape}, {V.shape}")
        if np.max(np.abs(V - V.T)) > 1e-10 * max(1.0, np.max(np.abs(V))):
            raise InvalidArgumentError("covariance matrix is not symmetric")
        object.__setattr__(self, "d", _frozen(d))
        object.__setattr__(self, "V", _frozen(0.5 * (V + V.T)))

    @property
    def m(self):
        return self.d.size // 2

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return np.array_equal(self.d, other.d) and np.array_equal(self.V, other.V)

    def allclose(self, other, atol=1e-12):
        return (self.m == other.m and np.allclose(self.d, other.d, rtol=0, atol=atol)
                and np.allclose(self.V, other.V, rtol=0, atol=atol))

    def to_text(self):
        """Line-oriented record: mode count, then d and row-major V, 17 significant digits."""
        fmt = lambda xs: " ".join(f"{float(v):.17g}" for v in xs)
        return f"m {self.m}\nd {fmt(self.d)}\nV {fmt(self.V.ravel())}\n"

    @classmethod
    def from_text(cls, text):
        fields = {}
        for line in text.strip().splitlines():
            key, _, rest = line.strip().partition(" ")
            fields[key] = rest.split()
        try:
            m = int(fields["m"][0])
            d = np.array([float(v) for v in fields["d"]])
            V = np.array([float(v) for v in fields["V"]]).reshape(2 * m, 2 * m)
        except (KeyError, IndexError, ValueError) as exc:
            raise InvalidArgumentError(f"malformed state record: {exc}") from None
        return make_state(d, V)


def make_state(d, V, tol=DEFAULT_TOL):
    """Construct a state, rejecting covariance matrices that violate V + i Omega >= 0."""
    state = GaussianState(d, V)
    if not is_physical_covariance(state.V, tol):
        raise InvalidArgumentError("covariance matrix violates the uncertainty relation")
    return state


def vacuum(m):
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"mode count must be a positive integer, got {m!r}")
    return GaussianState(np.zeros(2 * m), np.eye(2 * m))


def thermal(nbar_per_mode):
    nbar = np.atleast_1d(np.asarray(nbar_per_mode, dtype=float))
    if nbar.size == 0 or np.any(nbar < 0):
        raise InvalidArgumentError("thermal occupations must be non-negative")
    return GaussianState(np.zeros(2 * nbar.size), np.diag(np.repeat(2 * nbar + 1, 2)))


def _displacement(alphas):
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    return np.sqrt(2.0) * np.column_stack([alphas.real, alphas.imag]).ravel()


def coherent(alphas):
    d = _displacement(alphas)
    return GaussianState(d, np.eye(d.size))


def tmdss_covariance(r):
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    return np.array([
        [c, 0, s, 0],
        [0, c, 0, -s],
        [s, 0, c, 0],
        [0, -s, 0, c],
    ])


def tmdss(alpha, beta, r):
    """Two-mode displaced squeezed state with per-mode displacements alpha, beta."""
    return GaussianState(_displacement([alpha, beta]), tmdss_covariance(r))


def mean_energy_per_mode(state):
    """Mean excitation number per mode, (tr V / 2 + |d|^2) / (2m) - 1/2."""
    return (np.trace(state.V) / 2 + state.d @ state.d) / (2 * state.m) - 0.5


def tensor(a, b):
    return GaussianState(np.concatenate([a.d, b.d]), block_diag(a.V, b.V))


def apply_channel(state, channel):
    if channel.m != state.m:
        raise InvalidArgumentError(f"{channel.m}-mode channel applied to a {state.m}-mode state")
    if not channel.completely_positive:
        warnings.warn("applying a channel that is not completely positive", RuntimeWarning, stacklevel=2)
    X = channel.X
    return GaussianState(X @ state.d + channel.dshift, X @ state.V @ X.T + channel.Y)

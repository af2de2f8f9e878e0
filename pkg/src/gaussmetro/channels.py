"""Gaussian channels as (X, Y) pairs acting as d -> X d, V -> X V X^T + Y."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .errors import InvalidArgumentError
from .symplectic import DEFAULT_TOL, symplectic_form


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def cp_margin(X, Y):
    """Smallest eigenvalue of the Hermitian matrix Y + i X Omega X^T - i Omega."""
    m = X.shape[0] // 2
    Om = symplectic_form(m)
    H = Y + 1j * (X @ Om @ X.T - Om)
    return float(np.linalg.eigvalsh(H)[0])


@dataclass(frozen=True)
class GaussianChannel:
    """Mode-preserving Gaussian channel.

    `completely_positive` is evaluated once at construction. Channels that fail
    the test are still usable (boundary studies) but carry the flag.
    """

    X: np.ndarray
    Y: np.ndarray
    dshift: np.ndarray = None
    tol: float = DEFAULT_TOL
    completely_positive: bool = field(init=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        n = X.shape[0]
        if X.ndim != 2 or X.shape != (n, n) or Y.shape != (n, n) or n % 2 or n == 0:
            raise InvalidArgumentError(f"X and Y must be matching 2m x 2m matrices, got {X.shape}, {Y.shape}")
        if np.max(np.abs(Y - Y.T)) > 1e-12 * max(1.0, np.max(np.abs(Y))):
            raise InvalidArgumentError("Y must be symmetric")
        dshift = np.zeros(n) if self.dshift is None else np.asarray(self.dshift, dtype=float)
        if dshift.shape != (n,):
            raise InvalidArgumentError(f"dshift must have length {n}")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "Y", _frozen(0.5 * (Y + Y.T)))
        object.__setattr__(self, "dshift", _frozen(dshift))
        object.__setattr__(self, "completely_positive", cp_margin(X, Y) >= -self.tol)

    @property
    def m(self):
        return self.X.shape[0] // 2


def identity_channel(m):
    return GaussianChannel(np.eye(2 * m), np.zeros((2 * m, 2 * m)))


def phase_covariant(x, y):
    """Single-mode channel Lambda_{x,y}: X = sqrt(x) 1, Y = y 1."""
    if x < 0 or y < 0:
        raise InvalidArgumentError(f"phase-covariant channel needs x, y >= 0, got x={x}, y={y}")
    return GaussianChannel(np.sqrt(x) * np.eye(2), y * np.eye(2))


def rotation_matrix(theta):
    """[[cos, sin], [-sin, cos]]: a -> a exp(-i theta) for a = (q + ip)/sqrt(2)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def phase_rotation(phi, mode_signs):
    """Mode i is rotated by sign_i * phi / 2."""
    signs = np.asarray(mode_signs, dtype=float).ravel()
    if signs.size == 0 or not np.all(np.isin(signs, (-1.0, 1.0))):
        raise InvalidArgumentError("mode_signs must be a non-empty sequence of +1/-1")
    X = block_diag(*[rotation_matrix(s * phi / 2) for s in signs])
    return GaussianChannel(X, np.zeros_like(X))


def is_completely_positive(channel, tol=DEFAULT_TOL):
    return cp_margin(channel.X, channel.Y) >= -tol


def compose(second, first):
    """Channel applying `first`, then `second`."""
    if second.m != first.m:
        raise InvalidArgumentError(f"cannot compose {second.m}-mode and {first.m}-mode channels")
    X2 = second.X
    return GaussianChannel(
        X2 @ first.X,
        X2 @ first.Y @ X2.T + second.Y,
        X2 @ first.dshift + second.dshift,
    )


def tensor_channels(a, b):
    return GaussianChannel(
        block_diag(a.X, b.X),
        block_diag(a.Y, b.Y),
        np.concatenate([a.dshift, b.dshift]),
    )

"""Symplectic linear algebra in the (q1, p1, ..., qm, pm) quadrature ordering."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import InvalidArgumentError, NumericFailure

DEFAULT_TOL = 1e-9
# V is rejected when min eig < COND_LIMIT^-1 * max eig
COND_LIMIT = 1e12

_OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(m):
    """Return the 2m x 2m matrix Omega = diag([[0, 1], [-1, 0]], ...)."""
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"mode count must be a positive integer, got {m!r}")
    return block_diag(*([_OMEGA_1] * int(m)))


def _as_square_even(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2 or M.shape[0] == 0:
        raise InvalidArgumentError(f"{name} must be square with even dimension, got shape {M.shape}")
    return M


def _check_symmetric(V, tol=1e-12):
    V = _as_square_even(V, "covariance matrix")
    scale = max(1.0, np.max(np.abs(V)))
    if np.max(np.abs(V - V.T)) > tol * scale:
        raise InvalidArgumentError("covariance matrix is not symmetric")
    return 0.5 * (V + V.T)


def _cholesky(V):
    try:
        return np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        raise InvalidArgumentError("covariance matrix is not positive definite") from None


def symplectic_eigenvalues(V):
    """Symplectic spectrum of a positive definite V, sorted descending.

    The spectrum is the set of positive eigenvalues of i*Omega*V. We use the
    similar Hermitian matrix i * L^T Omega L, with V = L L^T.
    """
    V = _check_symmetric(V)
    L = _cholesky(V)
    m = V.shape[0] // 2
    H = 1j * (L.T @ symplectic_form(m) @ L)
    ev = np.linalg.eigvalsh(H)
    return ev[::-1][:m].copy()


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """V = S diag(nu_1, nu_1, ..., nu_m, nu_m) S^T with S symplectic."""

    S: np.ndarray
    nu: np.ndarray

    @property
    def S_inv(self):
        # symplectic inverse, exact for S Omega S^T = Omega
        Om = symplectic_form(len(self.nu))
        return -Om @ self.S.T @ Om

    @property
    def diagonal(self):
        return np.diag(np.repeat(self.nu, 2))


def williamson(V):
    """Williamson normal form of a symmetric positive definite matrix.

    With V = L L^T, the Hermitian matrix i * L^T Omega L has eigenpairs
    (+nu_j, w_j), (-nu_j, conj(w_j)). Writing w_j = (a_j - i b_j)/sqrt(2) gives
    orthonormal real vectors with L^T Omega L [a_j b_j] = [a_j b_j] nu_j Omega_1,
    so S = L [a_1 b_1 ... a_m b_m] diag(nu)^(-1/2) is symplectic and
    S diag(nu) S^T = V.

    Each w_j is fixed up to a phase by making its largest-magnitude component
    real and positive. Modes are ordered by descending nu; inside a degenerate
    cluster the eigensolver's order is kept.
    """
    V = _check_symmetric(V)
    m = V.shape[0] // 2
    ev = np.linalg.eigvalsh(V)
    if ev[0] <= 0:
        raise InvalidArgumentError("covariance matrix is not positive definite")
    if ev[0] < ev[-1] / COND_LIMIT:
        raise NumericFailure(
            "covariance matrix is too ill-conditioned for a Williamson decomposition",
            {"min_eigenvalue": float(ev[0]), "max_eigenvalue": float(ev[-1]),
             "condition_number": float(ev[-1] / ev[0])},
        )
    L = _cholesky(V)
    H = 1j * (L.T @ symplectic_form(m) @ L)
    lam, W = np.linalg.eigh(H)
    order = np.arange(2 * m - 1, m - 1, -1)  # positive half, descending
    nu = lam[order]
    O = np.empty((2 * m, 2 * m))
    for j, idx in enumerate(order):
        w = W[:, idx]
        k = np.argmax(np.abs(w))
        w = w * (np.conj(w[k]) / np.abs(w[k]))
        O[:, 2 * j] = np.sqrt(2.0) * w.real
        O[:, 2 * j + 1] = -np.sqrt(2.0) * w.imag
    S = L @ O @ np.diag(np.repeat(nu, 2) ** -0.5)
    return WilliamsonDecomposition(S=S, nu=nu)


def is_symplectic(S, tol=DEFAULT_TOL):
    S = _as_square_even(S, "S")
    Om = symplectic_form(S.shape[0] // 2)
    return bool(np.max(np.abs(S @ Om @ S.T - Om)) <= tol)


def is_physical_covariance(V, tol=DEFAULT_TOL):
    """True iff V + i*Omega >= 0, i.e. every symplectic eigenvalue is >= 1 - tol."""
    V = _check_symmetric(V)
    if np.linalg.eigvalsh(V)[0] <= 0:
        return False
    return bool(symplectic_eigenvalues(V)[-1] >= 1.0 - tol)


def random_symplectic(m, rng, scale=1.0):
    """Random symplectic matrix: passive unitary, single-mode squeezers, passive unitary."""
    def passive():
        Z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        U, _ = np.linalg.qr(Z)
        # complex unitary U acting on a = (q + ip)/sqrt(2) in interleaved real form
        R = np.empty((2 * m, 2 * m))
        R[0::2, 0::2] = U.real
        R[0::2, 1::2] = -U.imag
        R[1::2, 0::2] = U.imag
        R[1::2, 1::2] = U.real
        return R

    r = rng.uniform(-scale, scale, size=m)
    sq = np.diag(np.ravel(np.column_stack([np.exp(-r), np.exp(r)])))
    return passive() @ sq @ passive()

"""Brute-force single-mode checks in a truncated number basis.

States are built as D(alpha) S(r) rho_th S(r)^dag D(alpha)^dag and then sent
through Lambda_{x,y}, realized as a pure-loss channel with transmissivity
eta = 2x / (x + y + 1) followed by a quantum-limited amplifier with gain
G = (x + y + 1) / 2. Any completely positive phase-covariant channel splits
this way (eta <= 1 iff y >= x - 1, G >= 1 iff y >= 1 - x).

This module is a slow correctness oracle, not a simulation backend.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import IncreaseCutoffError, InvalidArgumentError
from .gaussian_state import GaussianState
from .metrology import ParametrizedFamily
from .symplectic import symplectic_form

LEAKAGE_BOUND = 1e-8
SLD_FLOOR = 1e-12
MAX_CUTOFF = 256
START_CUTOFF = 16
# quartic moments weight the lost tail by about cutoff^2, so they need a tighter bound
MOMENT_LEAKAGE_BOUND = 1e-13


@dataclass
class TruncatedState:
    cutoff: int
    rho: np.ndarray
    leakage: float


@dataclass(frozen=True)
class SingleModeModel:
    """alpha = amplitude * exp(i * phase); squeezing r along q; thermal seed nth."""

    amplitude: float = 0.0
    phase: float = 0.0
    r: float = 0.0
    nth: float = 0.0
    x: float = 1.0
    y: float = 0.0

    def __post_init__(self):
        if self.nth < 0 or self.amplitude < 0:
            raise InvalidArgumentError("amplitude and thermal occupation must be non-negative")

    @property
    def alpha(self):
        return self.amplitude * np.exp(1j * self.phase)

    def gaussian(self):
        a = self.alpha
        d = np.sqrt(2.0) * np.array([a.real, a.imag])
        V = (2 * self.nth + 1) * np.diag([np.exp(-2 * self.r), np.exp(2 * self.r)])
        return GaussianState(np.sqrt(self.x) * d, self.x * V + self.y * np.eye(2))


# ------------------------------------------------------------------ operators

def displacement_matrix(alpha, dim):
    """<m|D(alpha)|n>, from D[m, 0] = exp(-|a|^2/2) a^m / sqrt(m!) and
    sqrt(n) D[m, n] = sqrt(m) D[m-1, n-1] - conj(a) D[m, n-1]."""
    D = np.zeros((dim, dim), dtype=complex)
    D[0, 0] = np.exp(-abs(alpha) ** 2 / 2)
    for m in range(1, dim):
        D[m, 0] = D[m - 1, 0] * alpha / np.sqrt(m)
    sq = np.sqrt(np.arange(dim))
    for n in range(1, dim):
        D[1:, n] = (sq[1:] * D[:-1, n - 1] - np.conj(alpha) * D[1:, n - 1]) / sq[n]
        D[0, n] = -np.conj(alpha) * D[0, n - 1] / sq[n]
    return D


def squeezing_matrix(r, dim):
    """<m|S(r)|n> for S(r) = exp(r (a^2 - a^dag^2) / 2), which squeezes q for r > 0.

    The column recurrence for squeezed number states amplifies rounding by
    about exp(|r| n), so this exponentiates the generator in a larger space
    instead. Squeezing moves weight from n to about n exp(2|r|), which sets
    the padding. S only couples equal parities, so each parity is done apart.
    """
    big = int(dim * np.exp(2 * abs(r))) + 64
    S = np.zeros((dim, dim))
    for parity in (0, 1):
        n = np.arange(parity, big, 2)
        # <n|a^2|n+2> = sqrt((n+1)(n+2))
        c = np.sqrt((n[:-1] + 1) * (n[:-1] + 2))
        gen = 0.5 * r * (np.diag(c, 1) - np.diag(c, -1))
        keep = n < dim
        S[np.ix_(n[keep], n[keep])] = expm(gen)[np.ix_(keep, keep)]
    return S


def thermal_diagonal(nth, dim):
    k = np.arange(dim)
    if nth == 0:
        return (k == 0).astype(float)
    return np.exp(k * np.log(nth) - (k + 1) * np.log1p(nth))


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def apply_loss(rho, eta):
    """Pure-loss channel, Kraus A_k|n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k>."""
    if eta == 1:
        return rho.copy()
    N = rho.shape[0]
    out = np.zeros_like(rho)
    n = np.arange(N)
    for k in range(N):
        nk = n[k:]
        with np.errstate(divide="ignore"):
            logc = 0.5 * (_log_binom(nk, k) + (nk - k) * np.log(eta) + k * np.log1p(-eta))
        c = np.exp(logc)
        out[: N - k, : N - k] += np.outer(c, c) * rho[k:, k:]
    return out


def apply_amplifier(rho, G):
    """Quantum-limited amplifier, Kraus B_k|n> = sqrt(C(n+k,k) G^-(n+1) (1-1/G)^k) |n+k>."""
    if G == 1:
        return rho.copy()
    N = rho.shape[0]
    out = np.zeros_like(rho)
    for k in range(N):
        n = np.arange(N - k)
        logb = 0.5 * (_log_binom(n + k, k) - (n + 1) * np.log(G) + k * np.log1p(-1 / G))
        b = np.exp(logb)
        out[k:, k:] += np.outer(b, b) * rho[: N - k, : N - k]
    return out


def channel_split(x, y):
    """(eta, G) with loss(eta) followed by amplifier(G) equal to Lambda_{x,y}."""
    if x < 0 or y < abs(1 - x) - 1e-12:
        raise InvalidArgumentError(f"(x={x}, y={y}) is not a completely positive phase-covariant channel")
    G = (x + y + 1) / 2
    eta = min(1.0, x / G)
    return eta, G


# --------------------------------------------------------------------- states

def _build(model, cutoff):
    dim = 2 * (cutoff + 1) + 16
    S = squeezing_matrix(model.r, dim)
    rho = (S * thermal_diagonal(model.nth, dim)) @ S.T
    D = displacement_matrix(model.alpha, dim)
    rho = D @ rho @ D.conj().T
    eta, G = channel_split(model.x, model.y)
    rho = apply_amplifier(apply_loss(rho, eta), G)
    block = rho[: cutoff + 1, : cutoff + 1]
    leakage = 1.0 - float(np.trace(block).real)
    block = 0.5 * (block + block.conj().T)
    return TruncatedState(cutoff, block / np.trace(block).real, leakage)


def fock_density(alpha=0.0, r=0.0, nth=0.0, channel=(1.0, 0.0), cutoff=None,
                 leakage_bound=LEAKAGE_BOUND):
    """Truncated density matrix of Lambda_{x,y}(D S rho_th S^dag D^dag).

    Without an explicit cutoff, the cutoff doubles from 16 until the leakage
    is below the bound (at most 256).
    """
    alpha = complex(alpha)
    model = SingleModeModel(abs(alpha), float(np.angle(alpha)), r, nth, *channel)
    return model_density(model, cutoff, leakage_bound)


def model_density(model, cutoff=None, leakage_bound=LEAKAGE_BOUND):
    if cutoff is not None:
        st = _build(model, int(cutoff))
        if st.leakage >= leakage_bound:
            raise IncreaseCutoffError(
                f"cutoff {cutoff} loses {st.leakage:.3e} of the probability (bound {leakage_bound:.1e})",
                {"cutoff": cutoff, "leakage": st.leakage})
        return st
    c = START_CUTOFF
    while True:
        st = _build(model, c)
        if st.leakage < leakage_bound:
            return st
        if c >= MAX_CUTOFF:
            raise IncreaseCutoffError(f"leakage {st.leakage:.3e} above bound at the maximal cutoff {c}",
                                      {"cutoff": c, "leakage": st.leakage})
        c = min(2 * c, MAX_CUTOFF)


# ----------------------------------------------------------------- QFI oracle

def sld_products(rho, drhos, floor=SLD_FLOOR):
    """tr(rho L_a L_b) for SLDs solved in the eigenbasis of rho, plus tr(rho L_a)."""
    lam, U = np.linalg.eigh(rho)
    denom = lam[:, None] + lam[None, :]
    keep = denom >= floor
    Ls = []
    for drho in drhos:
        dt = U.conj().T @ drho @ U
        Ls.append(np.where(keep, 2 * dt / np.where(keep, denom, 1.0), 0.0))
    k = len(Ls)
    Q = np.empty((k, k), dtype=complex)
    for a in range(k):
        for b in range(k):
            Q[a, b] = np.sum(lam[:, None] * Ls[a] * Ls[b].T)
    means = np.array([np.sum(lam * np.diag(L)).real for L in Ls])
    return Q, means


@dataclass
class OracleResult:
    F: np.ndarray
    J: np.ndarray
    sld_means: np.ndarray
    cutoff: int
    leakage: float


def oracle_qfi_j(model, names, cutoff=None, h=1e-4, leakage_bound=LEAKAGE_BOUND):
    """F and J by central differences of the truncated density matrix.

    `names` selects which fields of `model` are the parameters.
    """
    if cutoff is None:
        cutoff = model_density(model, None, leakage_bound).cutoff
    base = model_density(model, cutoff, leakage_bound)
    drhos = []
    for name in names:
        v = getattr(model, name)
        plus = model_density(replace(model, **{name: v + h}), cutoff, leakage_bound).rho
        minus = model_density(replace(model, **{name: v - h}), cutoff, leakage_bound).rho
        drhos.append((plus - minus) / (2 * h))
    Q, means = sld_products(base.rho, drhos)
    return OracleResult(Q.real, Q.imag, means, cutoff, base.leakage)


def gaussian_family(model, names):
    """The same single-mode model as a ParametrizedFamily for the Gaussian engine."""
    names = tuple(names)

    def evaluate(theta):
        return replace(model, **dict(zip(names, map(float, theta)))).gaussian()

    return ParametrizedFamily(len(names), evaluate, None, names)


# ------------------------------------------------------------ moment identities

def quadratures(dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    q = (a + a.conj().T) / np.sqrt(2)
    p = (a - a.conj().T) / (1j * np.sqrt(2))
    return [q, p]


def moments_closed_form(d, V):
    """Appendix-style formulas for tr(rho R_j R_k), tr(rho R_l R_p R_q), tr(rho R_j R_k R_p R_q)."""
    n = d.size
    Om = symplectic_form(n // 2)
    C = V + 1j * Om
    m2 = np.outer(d, d) + 0.5 * C
    m3 = np.empty((n, n, n), dtype=complex)
    for l in range(n):
        for p in range(n):
            for q in range(n):
                m3[l, p, q] = (d[p] * d[l] * d[q]
                               + 0.5 * (C[l, p] * d[q] + C[p, q] * d[l] + C[l, q] * d[p]))
    m4 = np.empty((n, n, n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            for p in range(n):
                for q in range(n):
                    real = (d[j] * d[k] * d[p] * d[q]
                            + 0.5 * (d[p] * d[q] * V[j, k] + d[k] * d[q] * V[j, p] + d[j] * d[q] * V[k, p]
                                     + d[k] * d[p] * V[j, q] + d[j] * d[p] * V[k, q] + d[j] * d[k] * V[p, q])
                            + 0.25 * (V[j, q] * V[k, p] + V[j, p] * V[k, q] + V[j, k] * V[p, q])
                            - 0.25 * (Om[j, q] * Om[k, p] + Om[j, p] * Om[k, q] + Om[j, k] * Om[p, q]))
                    imag = 0.5 * (Om[j, k] * (d[p] * d[q] + V[p, q] / 2)
                                  + Om[j, p] * (d[k] * d[q] + V[k, q] / 2)
                                  + Om[k, p] * (d[j] * d[q] + V[j, q] / 2)
                                  + Om[j, q] * (d[k] * d[p] + V[k, p] / 2)
                                  + Om[k, q] * (d[j] * d[p] + V[j, p] / 2)
                                  + Om[p, q] * (d[j] * d[k] + V[j, k] / 2))
                    m4[j, k, p, q] = real + 1j * imag
    return m2, m3, m4


def moments_numeric(rho, pad=4):
    """The same moments evaluated with truncated quadrature operators."""
    dim = rho.shape[0] + pad
    big = np.zeros((dim, dim), dtype=complex)
    big[: rho.shape[0], : rho.shape[0]] = rho
    R = quadratures(dim)
    n = 2
    m2 = np.array([[np.trace(big @ R[a] @ R[b]) for b in range(n)] for a in range(n)])
    m3 = np.empty((n, n, n), dtype=complex)
    m4 = np.empty((n, n, n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            RR = R[a] @ R[b]
            for c in range(n):
                RRR = RR @ R[c]
                m3[a, b, c] = np.trace(big @ RRR)
                for e in range(n):
                    m4[a, b, c, e] = np.trace(big @ RRR @ R[e])
    return m2, m3, m4


def moment_check(model, cutoff=None, leakage_bound=None):
    """Max |numeric - closed form| of the second, third and fourth moments.

    An automatic cutoff is grown until the leakage is below 1e-13; an explicit
    cutoff only has to meet the usual bound.
    """
    if leakage_bound is None:
        leakage_bound = MOMENT_LEAKAGE_BOUND if cutoff is None else LEAKAGE_BOUND
    st = model_density(model, cutoff, leakage_bound)
    g = model.gaussian()
    exact = moments_closed_form(g.d, g.V)
    num = moments_numeric(st.rho)
    return {order: float(np.max(np.abs(a - b))) for order, a, b in zip((2, 3, 4), num, exact)}

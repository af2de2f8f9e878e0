import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.stats import poisson

from gaussmetro import fock_oracle as fo
from gaussmetro.errors import IncreaseCutoffError, InvalidArgumentError
from gaussmetro.metrology import qfi_matrix


def ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def test_vacuum_density():
    st_ = fo.fock_density(0, 0, 0, (1, 0), cutoff=10)
    ref = np.zeros((11, 11))
    ref[0, 0] = 1
    assert np.allclose(st_.rho, ref, atol=1e-14)


def test_thermal_density_is_geometric():
    rho = fo.fock_density(nth=0.5).rho
    n = np.arange(rho.shape[0])
    assert np.allclose(np.diag(rho).real, 0.5**n / 1.5 ** (n + 1), atol=1e-12)
    # the truncated tail carries at most the leakage bound times the cutoff
    assert np.sum(n * np.diag(rho).real) == pytest.approx(0.5, abs=1e-8 * n[-1])


def test_coherent_density_is_poisson():
    rho = fo.fock_density(alpha=0.6).rho
    n = np.arange(rho.shape[0])
    assert np.allclose(np.diag(rho).real, poisson.pmf(n, 0.36), atol=1e-12)


@pytest.mark.parametrize("alpha", [0.4 + 0.3j, -1.1j])
def test_displacement_matrix_matches_exponential(alpha):
    big = 120
    a = ladder(big)
    ref = expm(alpha * a.conj().T - np.conj(alpha) * a)[:40, :40]
    assert np.allclose(fo.displacement_matrix(alpha, big)[:40, :40], ref, atol=1e-12)


@pytest.mark.parametrize("r", [0.3, 0.9, -0.6])
def test_squeezing_matrix_matches_exponential(r):
    # S(r) = exp(r (a^2 - a^dag^2) / 2) squeezes q; the reference is padded well past the cutoff
    a = ladder(800)
    ref = expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))[:60, :60].real
    assert np.allclose(fo.squeezing_matrix(r, 60), ref, atol=1e-12)


def test_squeezing_matrix_is_orthogonal_on_low_block():
    S = fo.squeezing_matrix(0.5, 200)
    assert np.allclose((S @ S.T)[:20, :20], np.eye(20), atol=1e-12)


def test_channel_split_recombines():
    for x, y in [(0.5, 0.5), (2.0, 1.0), (0.7, 0.9), (1.3, 0.6)]:
        eta, G = fo.channel_split(x, y)
        # loss then amplifier: X^2 = G eta, Y = G (1 - eta) + (G - 1)
        assert G * eta == pytest.approx(x)
        assert G * (1 - eta) + G - 1 == pytest.approx(y)


def test_channel_split_rejects_non_cp():
    with pytest.raises(InvalidArgumentError):
        fo.channel_split(0.5, 0.1)


def test_loss_on_coherent_state():
    eta = 0.6
    rho = fo.fock_density(alpha=0.8, channel=(eta, 1 - eta)).rho
    n = np.arange(rho.shape[0])
    assert np.allclose(np.diag(rho).real, poisson.pmf(n, eta * 0.64), atol=1e-12)


def test_model_rejects_negative_occupation():
    with pytest.raises(InvalidArgumentError):
        fo.SingleModeModel(nth=-0.1)


def test_small_cutoff_raises():
    with pytest.raises(IncreaseCutoffError):
        fo.fock_density(alpha=1.0, cutoff=5)


def test_truncated_state_invariants():
    st_ = fo.model_density(fo.SingleModeModel(0.5, 0.7, 0.4, 0.2, 0.8, 0.5))
    rho = st_.rho
    assert np.allclose(rho, rho.conj().T)
    assert np.linalg.eigvalsh(rho)[0] >= -1e-10
    assert np.trace(rho).real == pytest.approx(1)
    assert st_.leakage < fo.LEAKAGE_BOUND


def test_coherent_phase_information():
    model = fo.SingleModeModel(amplitude=np.sqrt(0.5), phase=0.2)
    res = fo.oracle_qfi_j(model, ["phase"], cutoff=30)
    assert res.F[0, 0] == pytest.approx(2.0, abs=1e-6)
    assert abs(res.J[0, 0]) < 1e-12


def test_channel_family_matches_engine():
    model = fo.SingleModeModel(amplitude=0.5, r=0.3, x=0.7, y=0.5)
    res = fo.oracle_qfi_j(model, ["x", "y"], cutoff=40)
    eng = qfi_matrix(fo.gaussian_family(model, ["x", "y"]), [0.7, 0.5])
    assert np.allclose(res.F, eng.F, atol=1e-4) and np.allclose(res.J, eng.J, atol=1e-4)


def test_commutator_sign_matches_engine():
    model = fo.SingleModeModel(amplitude=0.6, phase=0.3, r=0.4, x=0.9, y=0.3)
    names = ["amplitude", "phase", "r"]
    res = fo.oracle_qfi_j(model, names, cutoff=40)
    eng = qfi_matrix(fo.gaussian_family(model, names), [0.6, 0.3, 0.4])
    assert np.max(np.abs(eng.J)) > 0.1
    assert np.allclose(res.J, eng.J, atol=1e-6)


def test_vacuum_moments():
    m2, _, _ = fo.moments_numeric(fo.fock_density(cutoff=10).rho)
    assert m2[0, 1] == pytest.approx(0.5j, abs=1e-14)


def test_coherent_second_moment():
    m2, _, _ = fo.moments_numeric(fo.fock_density(alpha=1.0).rho)
    assert m2[0, 0].real == pytest.approx(2.5, abs=1e-10)


def test_squeezed_quartic_identity():
    model = fo.SingleModeModel(amplitude=abs(0.3 + 0.2j), phase=np.angle(0.3 + 0.2j), r=0.4)
    assert fo.moment_check(model, cutoff=60)[4] <= 1e-6


def test_closed_form_moments_at_vacuum():
    m2, m3, m4 = fo.moments_closed_form(np.zeros(2), np.eye(2))
    assert np.allclose(m2, [[0.5, 0.5j], [-0.5j, 0.5]])
    assert np.allclose(m3, 0)
    assert m4[0, 0, 0, 0] == pytest.approx(0.75)


models = st.builds(
    lambda a, ph, r, x, dy: fo.SingleModeModel(a, ph, r, 0.0, x, abs(1 - x) + dy),
    st.floats(0.05, 0.7), st.floats(0, 2 * np.pi), st.floats(0.05, 0.5), st.floats(0.3, 1.3), st.floats(0.05, 0.5),
)


@settings(max_examples=10, deadline=None)
@given(model=models, names=st.sampled_from([["amplitude", "r"], ["x", "y"], ["amplitude", "phase", "y"],
                                            ["r", "x"]]))
def test_oracle_agrees_with_engine(model, names):
    res = fo.oracle_qfi_j(model, names, cutoff=40)
    eng = qfi_matrix(fo.gaussian_family(model, names), [getattr(model, n) for n in names])
    assert np.allclose(res.F, eng.F, atol=1e-4)
    assert np.allclose(res.J, eng.J, atol=1e-4)
    assert np.max(np.abs(res.sld_means)) <= 1e-8


@settings(max_examples=10, deadline=None)
@given(model=models)
def test_moment_identities(model):
    assert max(fo.moment_check(model).values()) <= 1e-6

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussmetro.channels import GaussianChannel, identity_channel, phase_covariant, tensor_channels
from gaussmetro.errors import InvalidArgumentError
from gaussmetro.gaussian_state import (
    GaussianState,
    apply_channel,
    coherent,
    make_state,
    mean_energy_per_mode,
    tensor,
    thermal,
    tmdss,
    vacuum,
)
from gaussmetro.symplectic import is_physical_covariance, random_symplectic, symplectic_eigenvalues

SQ2 = np.sqrt(2.0)


def test_vacuum():
    s = vacuum(2)
    assert np.array_equal(s.d, np.zeros(4)) and np.array_equal(s.V, np.eye(4))


def test_vacuum_rejects_zero_modes():
    with pytest.raises(InvalidArgumentError):
        vacuum(0)


def test_thermal():
    assert np.array_equal(thermal([1]).V, 3 * np.eye(2))


def test_thermal_rejects_negative():
    with pytest.raises(InvalidArgumentError):
        thermal([-0.1])


def test_coherent_convention():
    s = coherent([1j])
    assert np.allclose(s.d, [0, SQ2]) and np.array_equal(s.V, np.eye(2))


def test_tmdss_vacuum():
    assert tmdss(0, 0, 0).allclose(vacuum(2))


def test_tmdss_pure_displacement():
    s = tmdss(1j, 1j, 0)
    assert np.allclose(s.d, [0, SQ2, 0, SQ2]) and np.allclose(s.V, np.eye(4))


@pytest.mark.parametrize("state, expected", [
    (vacuum(1), 0.0),
    (tmdss(1j, 1j, 0), 1.0),
    (tmdss(1j, 1j, 1), np.sinh(1) ** 2 + 1),
])
def test_mean_energy_examples(state, expected):
    assert mean_energy_per_mode(state) == pytest.approx(expected, abs=1e-12)


def test_mean_energy_value():
    assert mean_energy_per_mode(tmdss(1j, 1j, 1)) == pytest.approx(2.3811, abs=1e-4)


def test_tensor_blocks():
    s = tensor(thermal([1]), coherent([1]))
    assert np.allclose(s.d, [0, 0, SQ2, 0])
    assert np.allclose(s.V, np.diag([3, 3, 1, 1]))


def test_identity_channel_leaves_state():
    s = tmdss(0.3 + 0.2j, -0.1j, 0.4)
    assert apply_channel(s, identity_channel(2)).allclose(s)


def test_vacuum_through_phase_covariant():
    x, y = 0.7, 0.5
    ch = tensor_channels(phase_covariant(x, y), phase_covariant(x, y))
    assert np.allclose(apply_channel(vacuum(2), ch).V, (x + y) * np.eye(4))


def test_coherent_through_half_loss():
    s = apply_channel(coherent([1]), phase_covariant(0.5, 0.5))
    assert np.allclose(s.d, [1, 0]) and np.allclose(s.V, np.eye(2))


def test_channel_mode_mismatch():
    with pytest.raises(InvalidArgumentError):
        apply_channel(vacuum(2), phase_covariant(0.5, 0.5))


def test_non_cp_channel_warns():
    with pytest.warns(RuntimeWarning):
        apply_channel(vacuum(1), phase_covariant(0.5, 0.1))


def test_states_are_immutable():
    s = vacuum(1)
    with pytest.raises(ValueError):
        s.V[0, 0] = 2.0
    with pytest.raises(AttributeError):
        s.d = np.ones(2)


def test_make_state_checks_physicality():
    with pytest.raises(InvalidArgumentError):
        make_state(np.zeros(2), 0.5 * np.eye(2))


def test_shape_validation():
    with pytest.raises(InvalidArgumentError):
        GaussianState(np.zeros(3), np.eye(3))
    with pytest.raises(InvalidArgumentError):
        GaussianState(np.zeros(2), np.array([[1.0, 0.3], [0.0, 1.0]]))


def test_text_roundtrip_is_exact():
    s = tmdss(0.31 + 0.27j, -0.11j, 0.43)
    text = s.to_text()
    assert text.splitlines()[0] == "m 2"
    assert GaussianState.from_text(text) == s


def test_from_text_malformed():
    with pytest.raises(InvalidArgumentError):
        GaussianState.from_text("m 1\nd 0 0\n")


@settings(max_examples=100, deadline=None)
@given(re=st.floats(-2, 2), im=st.floats(-2, 2), r=st.floats(0, 2))
def test_tmdss_energy_identity(re, im, r):
    a = complex(re, im)
    assert mean_energy_per_mode(tmdss(a, a, r)) == pytest.approx(np.sinh(r) ** 2 + abs(a) ** 2, abs=1e-12, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(r=st.floats(0, 2))
def test_tmdss_is_pure(r):
    assert np.allclose(symplectic_eigenvalues(tmdss(0, 0, r).V), [1, 1], atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_cp_channels_preserve_physicality(seed):
    rng = np.random.default_rng(seed)
    T = random_symplectic(2, rng)
    nu = rng.uniform(1, 3, size=2)
    state = GaussianState(rng.normal(size=4), T @ np.diag(np.repeat(nu, 2)) @ T.T)
    x = rng.uniform(0, 3)
    y = abs(1 - x) + rng.uniform(0, 1)
    ch = tensor_channels(phase_covariant(x, y), phase_covariant(x, y))
    assert ch.completely_positive
    assert is_physical_covariance(apply_channel(state, ch).V)


def test_general_channel_with_shift():
    ch = GaussianChannel(np.eye(2), np.zeros((2, 2)), dshift=[1.0, -1.0])
    assert np.allclose(apply_channel(vacuum(1), ch).d, [1, -1])

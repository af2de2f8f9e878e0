import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussmetro.channels import (
    GaussianChannel,
    compose,
    identity_channel,
    is_completely_positive,
    phase_covariant,
    phase_rotation,
    rotation_matrix,
    tensor_channels,
)
from gaussmetro.errors import InvalidArgumentError
from gaussmetro.gaussian_state import GaussianState, apply_channel, coherent
from gaussmetro.symplectic import random_symplectic, symplectic_eigenvalues


def random_channel(rng, m=1):
    X = rng.normal(size=(2 * m, 2 * m))
    A = rng.normal(size=(2 * m, 2 * m))
    return GaussianChannel(X, A @ A.T, dshift=rng.normal(size=2 * m))


def test_identity_is_special_case():
    ch = phase_covariant(1, 0)
    assert np.array_equal(ch.X, np.eye(2)) and np.array_equal(ch.Y, np.zeros((2, 2)))


@pytest.mark.parametrize("x, y, cp", [(0.5, 0.5, True), (0.5, 0.4, False), (2, 1, True), (2, 0.5, False)])
def test_phase_covariant_cp(x, y, cp):
    assert phase_covariant(x, y).completely_positive is cp
    assert is_completely_positive(phase_covariant(x, y)) is cp


def test_phase_covariant_rejects_negative():
    with pytest.raises(InvalidArgumentError):
        phase_covariant(-0.1, 1)


def test_symplectic_unitary_channel_is_cp():
    S = random_symplectic(2, np.random.default_rng(0))
    assert GaussianChannel(S, np.zeros((4, 4))).completely_positive


def test_rotation_zero_and_full_turn():
    for signs in ([1], [1, -1], [-1, -1, 1]):
        n = 2 * len(signs)
        assert np.allclose(phase_rotation(0, signs).X, np.eye(n))
        # phi/2 per mode, so a full turn of each mode needs phi = 4 pi
        assert np.allclose(phase_rotation(4 * np.pi, signs).X, np.eye(n), atol=1e-12)


def test_rotation_full_turn_of_phase():
    # phi = 2 pi rotates every mode by pi: the identity on covariances
    ch = phase_rotation(2 * np.pi, [1, -1])
    V = np.diag([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(ch.X @ V @ ch.X.T, V, atol=1e-12)


def test_rotation_sign_convention():
    # a -> a exp(-i theta)
    theta = 0.3
    out = apply_channel(coherent([1.0]), GaussianChannel(rotation_matrix(theta), np.zeros((2, 2))))
    alpha = (out.d[0] + 1j * out.d[1]) / np.sqrt(2)
    assert np.isclose(alpha, np.exp(-1j * theta))


def test_rotation_rejects_bad_signs():
    with pytest.raises(InvalidArgumentError):
        phase_rotation(0.1, [2])


def test_compose_order():
    loss, amp = phase_covariant(0.5, 0.5), phase_covariant(2, 1)
    ch = compose(amp, loss)
    assert np.allclose(ch.X, np.eye(2)) and np.allclose(ch.Y, (2 * 0.5 + 1) * np.eye(2))


def test_compose_mode_mismatch():
    with pytest.raises(InvalidArgumentError):
        compose(identity_channel(1), identity_channel(2))


def test_tensor_channels():
    ch = tensor_channels(phase_covariant(0.5, 0.5), identity_channel(1))
    assert ch.m == 2 and np.allclose(np.diag(ch.Y), [0.5, 0.5, 0, 0])


def test_shape_validation():
    with pytest.raises(InvalidArgumentError):
        GaussianChannel(np.eye(2), np.eye(4))
    with pytest.raises(InvalidArgumentError):
        GaussianChannel(np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_cp_grid_agrees_with_closed_form():
    xs = np.linspace(0, 3, 100)
    mismatches = 0
    for x in xs:
        for y in xs:
            # stay clear of the boundary where the tolerance decides
            if abs(y - abs(1 - x)) < 1e-6:
                continue
            mismatches += phase_covariant(x, y).completely_positive != (y >= abs(1 - x))
    assert mismatches == 0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_compose_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_channel(rng, 2) for _ in range(3))
    left, right = compose(a, compose(b, c)), compose(compose(a, b), c)
    for attr in ("X", "Y", "dshift"):
        ref = getattr(left, attr)
        assert np.allclose(ref, getattr(right, attr), rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(ref))))


@settings(max_examples=60, deadline=None)
@given(phi=st.floats(-10, 10), seed=st.integers(0, 2**32 - 1))
def test_rotations_are_cp_and_preserve_spectrum(phi, seed):
    rng = np.random.default_rng(seed)
    ch = phase_rotation(phi, [1, -1])
    assert ch.completely_positive
    T = random_symplectic(2, rng)
    state = GaussianState(np.zeros(4), T @ np.diag([1.5, 1.5, 2.5, 2.5]) @ T.T)
    out = apply_channel(state, ch)
    assert np.allclose(symplectic_eigenvalues(out.V), symplectic_eigenvalues(state.V), atol=1e-10)


def test_compose_matches_sequential_application():
    rng = np.random.default_rng(7)
    a, b = random_channel(rng), random_channel(rng)
    state = coherent([0.3 - 0.4j])
    seq = GaussianState(b.X @ (a.X @ state.d + a.dshift) + b.dshift,
                        b.X @ (a.X @ state.V @ a.X.T + a.Y) @ b.X.T + b.Y)
    ch = compose(b, a)
    direct = GaussianState(ch.X @ state.d + ch.dshift, ch.X @ state.V @ ch.X.T + ch.Y)
    assert direct.allclose(seq, atol=1e-12)



def test_half_turn_is_minus_identity():
    # X = R(phi/2), so phi = 2 pi is a rotation by pi on each mode
    assert np.allclose(phase_rotation(2 * np.pi, [1, -1]).X, -np.eye(4), atol=1e-12)


def test_quarter_phase_rotates_displacement_by_eighth_turn():
    out = apply_channel(coherent([1.0]), phase_rotation(np.pi / 2, [1]))
    c = np.cos(np.pi / 4)
    assert np.allclose(out.d, np.sqrt(2) * np.array([c, -c]))


def test_compose_with_identity():
    c = phase_covariant(0.7, 0.6)
    ch = compose(identity_channel(1), c)
    assert np.allclose(ch.X, c.X) and np.allclose(ch.Y, c.Y)


@pytest.mark.parametrize("x1, y1, x2, y2", [(0.5, 0.5, 2, 1), (0.3, 0.9, 1.4, 0.6)])
def test_compose_scalar_channels(x1, y1, x2, y2):
    ch = compose(phase_covariant(x1, y1), phase_covariant(x2, y2))
    ref = phase_covariant(x1 * x2, x1 * y2 + y1)
    assert np.allclose(ch.X, ref.X) and np.allclose(ch.Y, ref.Y)

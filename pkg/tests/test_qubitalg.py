import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qkdopt.qubitalg import (
    COS_PI_8,
    I2,
    SIGMA_X,
    SIGMA_Z,
    SIN_PI_8,
    apply_local,
    bell_states,
    depolarizing_qber,
    filter_op,
    ket0x,
    ket1x,
    multiphoton_state,
    phi_states,
    reduced_density,
    rotation_ops,
    schmidt_coefficients,
)


def test_half_angle_constants():
    assert SIN_PI_8 == pytest.approx(math.sin(math.pi / 8), abs=1e-15)
    assert COS_PI_8 == pytest.approx(math.cos(math.pi / 8), abs=1e-15)


def test_rotations_unitary():
    for U in rotation_ops():
        np.testing.assert_allclose(U @ U.conj().T, I2, atol=1e-14)


def test_t0_identity_and_r_fourth_power():
    R, T0, _, _ = rotation_ops()
    np.testing.assert_array_equal(T0, I2)
    np.testing.assert_allclose(np.linalg.matrix_power(R, 4), -I2, atol=1e-14)


def test_t_rotations_square_to_half_turns():
    _, _, T1, T2 = rotation_ops()
    for T, axis in ((T1, SIGMA_Z + SIGMA_X), (T2, SIGMA_Z - SIGMA_X)):
        sq = T @ T
        np.testing.assert_allclose(sq @ sq.conj().T, I2, atol=1e-14)
        assert abs(np.trace(sq)) < 1e-14
        np.testing.assert_allclose(sq, -1j * axis / math.sqrt(2), atol=1e-14)


def test_filter_spectrum():
    F = filter_op()
    np.testing.assert_allclose(F, F.conj().T, atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(F), [SIN_PI_8, COS_PI_8], atol=1e-14)
    np.testing.assert_allclose(F @ ket0x, SIN_PI_8 * ket0x, atol=1e-15)
    np.testing.assert_allclose(F @ ket1x, COS_PI_8 * ket1x, atol=1e-15)


def test_phi_overlap():
    phi0, phi1 = phi_states()
    assert np.vdot(phi0, phi1).real == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_multiphoton_state_shape_and_norm():
    assert np.linalg.norm(multiphoton_state(1)) == pytest.approx(1.0, abs=1e-15)
    assert multiphoton_state(2).size == 8
    with pytest.raises(ValueError):
        multiphoton_state(11)
    with pytest.raises(ValueError):
        multiphoton_state(0)


def test_bell_basis_orthonormal():
    states = list(bell_states().values())
    gram = np.array([[np.vdot(a, b) for b in states] for a in states])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-15)
    rho = reduced_density(bell_states()["phi+"])
    np.testing.assert_allclose(np.linalg.eigvalsh(rho), [0.5, 0.5], atol=1e-15)


def test_filter_success_probability_and_entanglement():
    psi = multiphoton_state(1)
    out = apply_local(psi, filter_op(), [1])
    p = np.vdot(out, out).real
    assert p == pytest.approx(0.25, abs=1e-12)
    coeffs = schmidt_coefficients(out / math.sqrt(p))
    np.testing.assert_allclose(coeffs, [1 / math.sqrt(2)] * 2, atol=1e-12)
    np.testing.assert_allclose(coeffs**2, [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("nu", [1, 2, 3, 4])
def test_filtering_every_photon_restores_maximal_entanglement(nu):
    psi = multiphoton_state(nu)
    out = apply_local(psi, filter_op(), range(1, nu + 1))
    out /= np.linalg.norm(out)
    np.testing.assert_allclose(np.linalg.eigvalsh(reduced_density(out)), [0.5, 0.5], atol=1e-12)


def test_apply_local_rejects_bad_dimension():
    with pytest.raises(ValueError):
        apply_local(np.ones(3), I2, [0])


def test_depolarizing_qber():
    assert depolarizing_qber("bb84", 0.0) == 0.0
    assert depolarizing_qber("sarg04", 0.0) == 0.0
    assert depolarizing_qber("sarg04", 0.1) == pytest.approx(0.16667, abs=5e-6)
    assert depolarizing_qber("sarg04", 0.1) == 0.1 / 0.6
    with pytest.raises(ValueError):
        depolarizing_qber("bb84", 1.5)
    with pytest.raises(ValueError):
        depolarizing_qber("e91", 0.1)


@given(st.floats(0.0, 1.0))
def test_bb84_qber_is_identity(D):
    assert depolarizing_qber("bb84", D) == D


@given(st.floats(1e-9, 0.49))
def test_sarg04_qber_exceeds_bb84(D):
    assert depolarizing_qber("sarg04", D) > depolarizing_qber("bb84", D)

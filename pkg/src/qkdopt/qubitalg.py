"""Exact 2x2 operators and few-qubit states behind the SARG04 construction.

Only used to check the rotation/filtering algebra; nothing here feeds a rate.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np

__all__ = [
    "I2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIN_PI_8",
    "COS_PI_8",
    "ket0",
    "ket1",
    "ket0x",
    "ket1x",
    "rotation_ops",
    "filter_op",
    "phi_states",
    "multiphoton_state",
    "bell_states",
    "apply_local",
    "schmidt_coefficients",
    "reduced_density",
    "depolarizing_qber",
]

_SQRT2 = math.sqrt(2.0)
# Half-angle forms: sin(pi/8) = sqrt(2 - sqrt 2)/2, cos(pi/8) = sqrt(2 + sqrt 2)/2.
SIN_PI_8 = math.sqrt(2.0 - _SQRT2) / 2.0
COS_PI_8 = math.sqrt(2.0 + _SQRT2) / 2.0
_C4 = _SQRT2 / 2.0  # cos(pi/4) = sin(pi/4)

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

ket0 = np.array([1, 0], dtype=complex)
ket1 = np.array([0, 1], dtype=complex)
ket0x = (ket0 + ket1) / _SQRT2
ket1x = (-ket0 + ket1) / _SQRT2

MAX_PHOTONS = 10


def _quarter_turn(axis: np.ndarray) -> np.ndarray:
    return _C4 * I2 - 1j * _C4 * axis


def rotation_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """R (pi/2 about Y) and T0 = I, T1, T2 (pi/2 about (Z +/- X)/sqrt 2)."""
    R = _quarter_turn(SIGMA_Y)
    T0 = I2.copy()
    T1 = _quarter_turn((SIGMA_Z + SIGMA_X) / _SQRT2)
    T2 = _quarter_turn((SIGMA_Z - SIGMA_X) / _SQRT2)
    return R, T0, T1, T2


def filter_op() -> np.ndarray:
    """F = sin(pi/8)|0x><0x| + cos(pi/8)|1x><1x|."""
    return SIN_PI_8 * np.outer(ket0x, ket0x.conj()) + COS_PI_8 * np.outer(ket1x, ket1x.conj())


def phi_states() -> tuple[np.ndarray, np.ndarray]:
    phi0 = COS_PI_8 * ket0x + SIN_PI_8 * ket1x
    phi1 = COS_PI_8 * ket0x - SIN_PI_8 * ket1x
    return phi0, phi1


def _kron_all(vectors):
    return reduce(np.kron, vectors)


def multiphoton_state(nu: int) -> np.ndarray:
    """(|0>_A |phi0>^nu + |1>_A |phi1>^nu)/sqrt 2 on nu + 1 qubits, Alice first."""
    if not 1 <= nu <= MAX_PHOTONS:
        raise ValueError(f"nu must be in [1, {MAX_PHOTONS}], got {nu}")
    phi0, phi1 = phi_states()
    return (np.kron(ket0, _kron_all([phi0] * nu)) + np.kron(ket1, _kron_all([phi1] * nu))) / _SQRT2


def bell_states() -> dict[str, np.ndarray]:
    k00, k01 = np.kron(ket0, ket0), np.kron(ket0, ket1)
    k10, k11 = np.kron(ket1, ket0), np.kron(ket1, ket1)
    return {
        "psi+": (k01 + k10) / _SQRT2,
        "psi-": (k01 - k10) / _SQRT2,
        "phi+": (k00 + k11) / _SQRT2,
        "phi-": (k00 - k11) / _SQRT2,
    }


def apply_local(state: np.ndarray, op: np.ndarray, qubits) -> np.ndarray:
    """Apply a one-qubit operator to each listed qubit (0 = leftmost factor)."""
    k = int(round(math.log2(state.size)))
    if 2**k != state.size:
        raise ValueError("state dimension must be a power of two")
    targets = set(qubits)
    full = _kron_all([op if q in targets else I2 for q in range(k)])
    return full @ state


def schmidt_coefficients(state: np.ndarray, split: int = 1) -> np.ndarray:
    """Schmidt coefficients across the cut after the first ``split`` qubits."""
    mat = state.reshape(2**split, -1)
    return np.linalg.svd(mat, compute_uv=False)


def reduced_density(state: np.ndarray, keep: int = 1) -> np.ndarray:
    """Density matrix of the first ``keep`` qubits."""
    mat = state.reshape(2**keep, -1)
    return mat @ mat.conj().T


def depolarizing_qber(protocol: str, D: float) -> float:
    """Sifted-key QBER through a depolarizing channel of disturbance D.

    BB84 keeps right bits with probability 1 - D, so the QBER is D itself;
    SARG04 keeps right bits with probability 1/2, giving D / (1/2 + D).
    """
    if not 0.0 <= D <= 1.0:
        raise ValueError(f"disturbance must be in [0, 1], got {D}")
    if protocol == "bb84":
        return D
    if protocol == "sarg04":
        return D / (0.5 + D)
    raise ValueError(f"unknown protocol {protocol!r}")

"""Dense statevector simulator.

Qubit 0 is the most significant bit of the amplitude index, i.e. the basis
state |q0 q1 ... q(n-1)> lives at integer index q0*2^(n-1) + ... + q(n-1).
All kernels operate on arrays of shape (batch, 2^n) so that minibatches of
states can be pushed through a circuit in one numpy call per gate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, StructuralError

MAX_QUBITS = 14

# kind -> number of rotation angles
GATE_ANGLES = {
    "X": 0,
    "H": 0,
    "RX": 1,
    "RY": 1,
    "RZ": 1,
    "ROT": 3,
    "CNOT": 0,
    "CRZ": 1,
    "CRX": 1,
}

SINGLE_QUBIT_KINDS = frozenset({"X", "H", "RX", "RY", "RZ", "ROT"})
CONTROLLED_KINDS = frozenset({"CNOT", "CRZ", "CRX"})

_SQ2 = 1.0 / np.sqrt(2.0)
_X_MAT = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_Y_MAT = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_Z_MAT = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_H_MAT = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128)


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    For controlled kinds ``targets`` is (control, target).  A gate carries
    either fixed angles in ``params`` or slot indices into a circuit's
    parameter vector in ``slots``, never both.
    """

    kind: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    slots: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_ANGLES:
            raise StructuralError(f"unknown gate kind {self.kind!r}")
        n_targets = 2 if self.kind in CONTROLLED_KINDS else 1
        if len(self.targets) != n_targets:
            raise StructuralError(
                f"{self.kind} expects {n_targets} target(s), got {self.targets}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise StructuralError(f"{self.kind} targets must be distinct: {self.targets}")
        n_angles = GATE_ANGLES[self.kind]
        if self.slots and self.params:
            raise StructuralError("gate cannot carry both fixed params and slots")
        if self.slots:
            if len(self.slots) != n_angles:
                raise StructuralError(
                    f"{self.kind} takes {n_angles} angle(s), got slots {self.slots}"
                )
        elif len(self.params) != n_angles:
            raise StructuralError(
                f"{self.kind} takes {n_angles} angle(s), got params {self.params}"
            )

    @property
    def is_parametric(self) -> bool:
        return bool(self.slots)


class Statevector:
    """Complex amplitude vector over ``n_qubits`` qubits."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n_qubits,):
            raise StructuralError(
                f"expected {1 << n_qubits} amplitudes, got shape {amplitudes.shape}"
            )
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def init_zero(n_qubits: int) -> Statevector:
    """|0...0> on ``n_qubits`` qubits."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


# ---------------------------------------------------------------------------
# gate matrices


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]], dtype=np.complex128
    )


def _rot(phi: float, theta: float, omega: float) -> np.ndarray:
    # general rotation, fixed as the RZ(phi) . RY(theta) . RZ(omega) product
    return _rz(phi) @ _ry(theta) @ _rz(omega)


def gate_matrix(kind: str, angles: tuple[float, ...]) -> np.ndarray:
    """2x2 block of the gate (for controlled kinds: the target block)."""
    if kind == "X" or kind == "CNOT":
        return _X_MAT
    if kind == "H":
        return _H_MAT
    if kind == "RX" or kind == "CRX":
        return _rx(angles[0])
    if kind == "RY":
        return _ry(angles[0])
    if kind == "RZ" or kind == "CRZ":
        return _rz(angles[0])
    if kind == "ROT":
        return _rot(*angles)
    raise StructuralError(f"unknown gate kind {kind!r}")


def gate_matrix_deriv(kind: str, angles: tuple[float, ...], which: int) -> np.ndarray:
    """Derivative of the gate's 2x2 block w.r.t. angle ``which``."""
    if kind in ("RX", "CRX"):
        return -0.5j * _X_MAT @ _rx(angles[0])
    if kind == "RY":
        return -0.5j * _Y_MAT @ _ry(angles[0])
    if kind in ("RZ", "CRZ"):
        return -0.5j * _Z_MAT @ _rz(angles[0])
    if kind == "ROT":
        phi, theta, omega = angles
        if which == 0:
            return (-0.5j * _Z_MAT @ _rz(phi)) @ _ry(theta) @ _rz(omega)
        if which == 1:
            return _rz(phi) @ (-0.5j * _Y_MAT @ _ry(theta)) @ _rz(omega)
        return _rz(phi) @ _ry(theta) @ (-0.5j * _Z_MAT @ _rz(omega))
    raise StructuralError(f"gate kind {kind!r} has no angle derivative")


# ---------------------------------------------------------------------------
# batched kernels (amps shape: (batch, 2^n))


def apply_1q(amps: np.ndarray, u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    psi = amps.reshape(-1, 1 << qubit, 2, 1 << (n - qubit - 1))
    a0 = psi[:, :, 0, :]
    a1 = psi[:, :, 1, :]
    out = np.empty_like(psi)
    out[:, :, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    out[:, :, 1, :] = u[1, 0] * a0 + u[1, 1] * a1
    return out.reshape(amps.shape)


def apply_controlled(
    amps: np.ndarray,
    u: np.ndarray,
    control: int,
    target: int,
    n: int,
    zero_uncontrolled: bool = False,
) -> np.ndarray:
    """Apply u on ``target`` within the control=1 subspace.

    With ``zero_uncontrolled`` the control=0 block of the output is zeroed,
    which is what the derivative of a controlled rotation looks like.
    """
    psi = amps.reshape((-1,) + (2,) * n)
    out = np.zeros_like(psi) if zero_uncontrolled else psi.copy()
    sel = [slice(None)] * (n + 1)
    sel[1 + control] = 1
    sub = psi[tuple(sel)]
    t_axis = 1 + (target if target < control else target - 1)
    sub = np.moveaxis(sub, t_axis, 1)
    osub = np.moveaxis(out[tuple(sel)], t_axis, 1)
    osub[:, 0] = u[0, 0] * sub[:, 0] + u[0, 1] * sub[:, 1]
    osub[:, 1] = u[1, 0] * sub[:, 0] + u[1, 1] * sub[:, 1]
    return out.reshape(amps.shape)


def apply_gate_batched(
    amps: np.ndarray, gate: Gate, angles: tuple[float, ...], n: int
) -> np.ndarray:
    for t in gate.targets:
        if not 0 <= t < n:
            raise StructuralError(f"gate target {t} out of range for {n} qubits")
    u = gate_matrix(gate.kind, angles)
    if gate.kind in SINGLE_QUBIT_KINDS:
        return apply_1q(amps, u, gate.targets[0], n)
    control, target = gate.targets
    return apply_controlled(amps, u, control, target, n)


def apply_gate_inverse_batched(
    amps: np.ndarray, gate: Gate, angles: tuple[float, ...], n: int
) -> np.ndarray:
    u = gate_matrix(gate.kind, angles).conj().T
    if gate.kind in SINGLE_QUBIT_KINDS:
        return apply_1q(amps, u, gate.targets[0], n)
    control, target = gate.targets
    return apply_controlled(amps, u, control, target, n)


def apply_gate_deriv_batched(
    amps: np.ndarray, gate: Gate, angles: tuple[float, ...], which: int, n: int
) -> np.ndarray:
    du = gate_matrix_deriv(gate.kind, angles, which)
    if gate.kind in SINGLE_QUBIT_KINDS:
        return apply_1q(amps, du, gate.targets[0], n)
    control, target = gate.targets
    return apply_controlled(amps, du, control, target, n, zero_uncontrolled=True)


# ---------------------------------------------------------------------------
# measurement


def z_signs(n: int, qubit: int) -> np.ndarray:
    """+1/-1 eigenvalue of Z on ``qubit`` for every basis index."""
    if not 0 <= qubit < n:
        raise StructuralError(f"qubit {qubit} out of range for {n} qubits")
    bits = (np.arange(1 << n) >> (n - 1 - qubit)) & 1
    return 1.0 - 2.0 * bits


def expectations_z_batched(amps: np.ndarray, qubits, n: int) -> np.ndarray:
    """<Z_q> per qubit in ``qubits``; shape (batch, len(qubits))."""
    probs = np.abs(amps) ** 2
    signs = np.stack([z_signs(n, q) for q in qubits])
    return probs @ signs.T


# ---------------------------------------------------------------------------
# single-state convenience API


def apply_gate(state: Statevector, gate: Gate, resolved_params: tuple[float, ...] = ()) -> Statevector:
    """Apply one gate, mutating the statevector in place.

    ``resolved_params`` supplies angles for slotted gates; fixed-angle gates
    use their own params.
    """
    angles = tuple(resolved_params) if gate.slots else gate.params
    if len(angles) != GATE_ANGLES[gate.kind]:
        raise StructuralError(
            f"{gate.kind} needs {GATE_ANGLES[gate.kind]} resolved angle(s), got {angles}"
        )
    out = apply_gate_batched(state.amplitudes[None, :], gate, angles, state.n_qubits)
    state.amplitudes = out[0]
    return state


def expectation_z(state: Statevector, qubit: int) -> float:
    """<Z> on one qubit; in [-1, 1]."""
    signs = z_signs(state.n_qubits, qubit)
    return float(np.sum(np.abs(state.amplitudes) ** 2 * signs))


def prob_one(state: Statevector, qubit: int) -> float:
    """Probability of measuring |1> on one qubit."""
    return (1.0 - expectation_z(state, qubit)) / 2.0

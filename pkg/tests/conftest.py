"""Shared test fixtures and the brute-force dense-matrix oracle.

The oracle builds every gate as an explicit 2^n x 2^n unitary from its own
matrix definitions (kept independent of the simulator kernels) and applies
it by plain matrix-vector multiplication.
"""

import numpy as np
import pytest

# independent 2x2 definitions, qubit 0 = most significant bit


def oracle_rx(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def oracle_ry(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]])


def oracle_rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


ORACLE_BLOCKS = {
    "X": lambda: np.array([[0, 1], [1, 0]], dtype=complex),
    "H": lambda: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "RX": oracle_rx,
    "RY": oracle_ry,
    "RZ": oracle_rz,
    "ROT": lambda phi, th, om: oracle_rz(phi) @ oracle_ry(th) @ oracle_rz(om),
    "CNOT": lambda: np.array([[0, 1], [1, 0]], dtype=complex),
    "CRX": oracle_rx,
    "CRZ": oracle_rz,
}

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def _kron_chain(factors):
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def dense_unitary(kind, targets, angles, n):
    """Full 2^n x 2^n matrix of one gate."""
    block = ORACLE_BLOCKS[kind](*angles)
    if kind in ("CNOT", "CRZ", "CRX"):
        control, target = targets
        off = [_I2] * n
        off[control] = _P0
        on = [_I2] * n
        on[control] = _P1
        on[target] = block
        return _kron_chain(off) + _kron_chain(on)
    factors = [_I2] * n
    factors[targets[0]] = block
    return _kron_chain(factors)


def dense_apply(amps, kind, targets, angles, n):
    return dense_unitary(kind, targets, angles, n) @ amps


def dense_circuit_matrix(circuit, theta):
    """Product of all gate unitaries in application order."""
    mat = np.eye(1 << circuit.n_qubits, dtype=complex)
    for gate in circuit.gates:
        angles = (
            tuple(theta[s] for s in gate.slots) if gate.slots else gate.params
        )
        mat = dense_unitary(gate.kind, gate.targets, angles, circuit.n_qubits) @ mat
    return mat


def random_state(n, rng):
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return amps / np.linalg.norm(amps)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_parametric_circuit(rng, max_qubits=4, max_params=30):
    """Random circuit over every parametric gate kind, for gradient checks."""
    from aqram.circuits import circuit_from_gates
    from aqram.simulator import Gate

    kinds = ["RX", "RY", "RZ", "ROT", "CRZ", "CRX"]
    n = int(rng.integers(2, max_qubits + 1))
    budget = int(rng.integers(4, max_params + 1))
    gates, slot = [], 0
    while slot < budget - 2:
        kind = kinds[int(rng.integers(len(kinds)))]
        qubits = rng.permutation(n)[:2]
        if kind in ("CRZ", "CRX"):
            gates.append(Gate(kind, (int(qubits[0]), int(qubits[1])), slots=(slot,)))
            slot += 1
        elif kind == "ROT":
            gates.append(Gate(kind, (int(qubits[0]),), slots=(slot, slot + 1, slot + 2)))
            slot += 3
        else:
            gates.append(Gate(kind, (int(qubits[0]),), slots=(slot,)))
            slot += 1
    return circuit_from_gates(n, gates)

"""Parametric circuit templates: embeddings, convolution/pooling blocks,
strongly entangling layers, and the full QRAM architecture built from them."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, StructuralError
from .simulator import Gate, Statevector


@dataclass(frozen=True)
class ParamCircuit:
    """Ordered gate list over a fixed qubit count with ``n_params`` slots."""

    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        seen = set()
        for g in self.gates:
            for t in g.targets:
                if not 0 <= t < self.n_qubits:
                    raise StructuralError(f"gate target {t} out of range")
            for s in g.slots:
                if not 0 <= s < self.n_params:
                    raise StructuralError(f"slot {s} out of range [0, {self.n_params})")
                seen.add(s)
        if len(seen) != self.n_params:
            missing = sorted(set(range(self.n_params)) - seen)
            raise StructuralError(f"unreferenced parameter slots: {missing}")


@dataclass(frozen=True)
class QramArchitectureSpec:
    """Shape of the QRAM circuit: qubit count plus layer counts."""

    n_qubits: int
    n_conv_layers: int = 1
    n_sel_layers: int = 3

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ConfigurationError("QRAM needs at least 2 qubits")
        if self.n_conv_layers < 0 or self.n_sel_layers < 1:
            raise ConfigurationError("need n_conv_layers >= 0 and n_sel_layers >= 1")


def basis_embed(address: str) -> list[Gate]:
    """X gates preparing the computational basis state |address>."""
    if not address or any(c not in "01" for c in address):
        raise StructuralError(f"address must be a non-empty bitstring, got {address!r}")
    return [Gate("X", (i,)) for i, bit in enumerate(address) if bit == "1"]


def angle_embed(values, axis: str = "Y") -> list[Gate]:
    """One fixed-angle rotation per qubit; values[i] drives qubit i."""
    kind = {"X": "RX", "Y": "RY", "Z": "RZ"}.get(axis)
    if kind is None:
        raise StructuralError(f"axis must be X, Y or Z, got {axis!r}")
    return [Gate(kind, (i,), params=(float(v),)) for i, v in enumerate(values)]


def amplitude_embed(pixels, n_qubits: int) -> Statevector:
    """Zero-pad to 2^n, L2-normalize, and install as real amplitudes."""
    vec = np.asarray(pixels, dtype=np.float64).ravel()
    dim = 1 << n_qubits
    if vec.size > dim:
        raise StructuralError(f"{vec.size} values do not fit on {n_qubits} qubits")
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise DegenerateInputError("cannot amplitude-embed an all-zero vector")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[: vec.size] = vec / norm
    return Statevector(n_qubits, amps)


def conv_block(qubit_a: int, qubit_b: int, slot_a: int, slot_b: int) -> list[Gate]:
    """Two-qubit convolution ansatz: RY on each qubit, then an entangling CNOT."""
    if qubit_a == qubit_b:
        raise StructuralError("conv_block needs two distinct qubits")
    return [
        Gate("RY", (qubit_a,), slots=(slot_a,)),
        Gate("RY", (qubit_b,), slots=(slot_b,)),
        Gate("CNOT", (qubit_a, qubit_b)),
    ]


def pool_block(qubit_keep: int, qubit_ctrl: int, slot_a: int, slot_b: int) -> list[Gate]:
    """Unitary pooling block {CRZ, X, CRX}; no qubit is discarded."""
    if qubit_keep == qubit_ctrl:
        raise StructuralError("pool_block needs two distinct qubits")
    return [
        Gate("CRZ", (qubit_ctrl, qubit_keep), slots=(slot_a,)),
        Gate("X", (qubit_ctrl,)),
        Gate("CRX", (qubit_ctrl, qubit_keep), slots=(slot_b,)),
    ]


def strongly_entangling_layers(n_qubits: int, n_layers: int, starting_slot: int = 0) -> list[Gate]:
    """Per layer: a three-angle rotation on every qubit, then a CNOT ring.

    The ring range for layer l is (l mod (n_qubits - 1)) + 1, so consecutive
    layers entangle at increasing distance.
    """
    if n_qubits < 2:
        raise StructuralError("strongly entangling layers need at least 2 qubits")
    if n_layers < 1:
        raise ConfigurationError("n_layers must be >= 1")
    gates: list[Gate] = []
    slot = starting_slot
    for layer in range(n_layers):
        for q in range(n_qubits):
            gates.append(Gate("ROT", (q,), slots=(slot, slot + 1, slot + 2)))
            slot += 3
        r = (layer % (n_qubits - 1)) + 1
        for q in range(n_qubits):
            gates.append(Gate("CNOT", (q, (q + r) % n_qubits)))
    return gates


def circular_pairs(n_qubits: int) -> list[tuple[int, int]]:
    """(0,1), (1,2), ..., (n-1,0); the wrap-around duplicate is dropped at n=2."""
    if n_qubits == 2:
        return [(0, 1)]
    return [(i, (i + 1) % n_qubits) for i in range(n_qubits)]


def build_qram_circuit(spec: QramArchitectureSpec) -> ParamCircuit:
    """Convolution+pooling rounds over circular pairs, then entangling layers."""
    pairs = circular_pairs(spec.n_qubits)
    gates: list[Gate] = []
    slot = 0
    for _ in range(spec.n_conv_layers):
        for a, b in pairs:
            gates += conv_block(a, b, slot, slot + 1)
            slot += 2
        for a, b in pairs:
            gates += pool_block(a, b, slot, slot + 1)
            slot += 2
    gates += strongly_entangling_layers(spec.n_qubits, spec.n_sel_layers, slot)
    slot += 3 * spec.n_sel_layers * spec.n_qubits
    return ParamCircuit(spec.n_qubits, tuple(gates), slot)


def circuit_from_gates(n_qubits: int, gates) -> ParamCircuit:
    """Assemble a circuit, inferring the parameter count from the slots used."""
    gates = tuple(gates)
    slots = sorted({s for g in gates for s in g.slots})
    n_params = (max(slots) + 1) if slots else 0
    return ParamCircuit(n_qubits, gates, n_params)


def freeze_circuit(circuit: ParamCircuit, params) -> ParamCircuit:
    """Resolve every slot to a fixed angle; the result has zero parameters."""
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circuit.n_params,):
        raise StructuralError(
            f"expected {circuit.n_params} parameters, got shape {params.shape}"
        )
    frozen = []
    for g in circuit.gates:
        if g.slots:
            frozen.append(Gate(g.kind, g.targets, params=tuple(float(params[s]) for s in g.slots)))
        else:
            frozen.append(g)
    return ParamCircuit(circuit.n_qubits, tuple(frozen), 0)


def concat_circuits(first: ParamCircuit, second: ParamCircuit) -> ParamCircuit:
    """Run ``first`` then ``second``; second's slots are shifted after first's."""
    if first.n_qubits != second.n_qubits:
        raise StructuralError("cannot concatenate circuits with different qubit counts")
    shifted = []
    for g in second.gates:
        if g.slots:
            shifted.append(
                Gate(g.kind, g.targets, slots=tuple(s + first.n_params for s in g.slots))
            )
        else:
            shifted.append(g)
    return ParamCircuit(
        first.n_qubits, first.gates + tuple(shifted), first.n_params + second.n_params
    )


# ---------------------------------------------------------------------------
# JSON description, used for debugging and golden-file tests


def circuit_to_json(circuit: ParamCircuit) -> str:
    records = [
        {
            "kind": g.kind,
            "targets": list(g.targets),
            "params": list(g.params),
            "slots": list(g.slots),
        }
        for g in circuit.gates
    ]
    return json.dumps(
        {"n_qubits": circuit.n_qubits, "n_params": circuit.n_params, "gates": records}
    )


def circuit_from_json(text: str) -> ParamCircuit:
    doc = json.loads(text)
    gates = tuple(
        Gate(
            r["kind"],
            tuple(r["targets"]),
            params=tuple(r["params"]),
            slots=tuple(r["slots"]),
        )
        for r in doc["gates"]
    )
    return ParamCircuit(doc["n_qubits"], gates, doc["n_params"])

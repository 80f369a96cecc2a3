import itertools

import numpy as np
import pytest

from aqram.circuits import (
    ParamCircuit,
    QramArchitectureSpec,
    amplitude_embed,
    angle_embed,
    basis_embed,
    build_qram_circuit,
    circuit_from_gates,
    circuit_from_json,
    circuit_to_json,
    concat_circuits,
    conv_block,
    freeze_circuit,
    pool_block,
    strongly_entangling_layers,
)
from aqram.errors import ConfigurationError, DegenerateInputError, StructuralError
from aqram.simulator import Gate, Statevector, apply_gate, init_zero, prob_one
from aqram.training import run_circuit

from conftest import random_state


def _apply_fragment(gates, state, params=None):
    circuit = circuit_from_gates(state.n_qubits, gates)
    theta = np.zeros(circuit.n_params) if params is None else np.asarray(params)
    return run_circuit(circuit, theta, state)


class TestBasisEmbed:
    def test_101(self):
        gates = basis_embed("101")
        assert [(g.kind, g.targets) for g in gates] == [("X", (0,)), ("X", (2,))]
        state = _apply_fragment(gates, init_zero(3))
        assert np.argmax(np.abs(state.amplitudes)) == 0b101

    def test_zero_address_is_empty(self):
        assert basis_embed("000") == []

    def test_11(self):
        state = _apply_fragment(basis_embed("11"), init_zero(2))
        assert np.allclose(state.amplitudes, [0, 0, 0, 1])

    def test_bad_address(self):
        with pytest.raises(StructuralError):
            basis_embed("10x")

    def test_self_inverse(self):
        # applying the same X pattern twice is the identity, all addresses n<=4
        for n in range(1, 5):
            for bits in itertools.product("01", repeat=n):
                address = "".join(bits)
                state = init_zero(n)
                _ = [apply_gate(state, g) for g in basis_embed(address) * 2]
                assert np.allclose(state.amplitudes, init_zero(n).amplitudes)


class TestAngleEmbed:
    def test_pi_zero(self):
        state = _apply_fragment(angle_embed([np.pi, 0.0]), init_zero(2))
        assert prob_one(state, 0) == pytest.approx(1.0)
        assert prob_one(state, 1) == pytest.approx(0.0)

    def test_all_zero_is_identity(self):
        state = _apply_fragment(angle_embed([0.0, 0.0, 0.0]), init_zero(3))
        assert np.allclose(state.amplitudes, init_zero(3).amplitudes)

    def test_bad_axis(self):
        with pytest.raises(StructuralError):
            angle_embed([0.0], axis="Q")

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_pi_times_bit_matches_basis_embed(self, n):
        # angle pi*b reproduces the basis-embed measurement statistics
        for value in range(1 << n):
            address = format(value, f"0{n}b")
            via_angle = _apply_fragment(
                angle_embed([np.pi * int(b) for b in address]), init_zero(n)
            )
            via_basis = _apply_fragment(basis_embed(address), init_zero(n))
            for q in range(n):
                assert prob_one(via_angle, q) == pytest.approx(prob_one(via_basis, q), abs=1e-12)


class TestAmplitudeEmbed:
    def test_basis_vector(self):
        state = amplitude_embed([1, 0, 0, 0], 2)
        assert np.allclose(state.amplitudes, [1, 0, 0, 0])

    def test_normalization(self):
        state = amplitude_embed([3, 4], 1)
        assert np.allclose(state.amplitudes, [0.6, 0.8])

    def test_padding_on_nine_qubits(self, rng):
        vec = rng.uniform(0.1, 16.0, 64)
        state = amplitude_embed(vec, 9)
        assert state.amplitudes.shape == (512,)
        assert abs(state.norm_sq() - 1.0) < 1e-12
        assert np.all(state.amplitudes[64:] == 0)

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateInputError):
            amplitude_embed([0.0, 0.0], 1)

    def test_too_long(self):
        with pytest.raises(StructuralError):
            amplitude_embed(np.ones(5), 2)

    def test_norm_one_many_random_vectors(self, rng):
        for _ in range(1000):
            size = int(rng.integers(1, 17))
            state = amplitude_embed(rng.normal(size=size), 4)
            assert abs(state.norm_sq() - 1.0) < 1e-12


class TestConvBlock:
    def test_zero_params_identity_on_00(self):
        state = _apply_fragment(conv_block(0, 1, 0, 1), init_zero(2), [0.0, 0.0])
        assert np.allclose(state.amplitudes, [1, 0, 0, 0])

    def test_pi_flips_both(self):
        state = _apply_fragment(conv_block(0, 1, 0, 1), init_zero(2), [np.pi, 0.0])
        assert abs(abs(state.amplitudes[3]) - 1.0) < 1e-12

    def test_half_pi_bell_weights(self):
        # RY(pi/2) on qubit 0, then CNOT: equal weight on |00> and |11>
        state = _apply_fragment(conv_block(0, 1, 0, 1), init_zero(2), [np.pi / 2, 0.0])
        probs = np.abs(state.amplitudes) ** 2
        assert probs[0] == pytest.approx(0.5, abs=1e-12)
        assert probs[3] == pytest.approx(0.5, abs=1e-12)

    def test_equal_qubits_rejected(self):
        with pytest.raises(StructuralError):
            conv_block(1, 1, 0, 1)


class TestPoolBlock:
    def test_zero_params(self):
        # only the deterministic X on the control survives: |00> -> |01>
        state = _apply_fragment(pool_block(0, 1, 0, 1), init_zero(2), [0.0, 0.0])
        assert abs(abs(state.amplitudes[0b01]) - 1.0) < 1e-12

    def test_crx_pi_flips_keep(self):
        # ctrl starts in |0>, X drives it to |1>, CRX(pi) then flips the kept qubit
        state = _apply_fragment(pool_block(0, 1, 0, 1), init_zero(2), [0.0, np.pi])
        assert prob_one(state, 0) == pytest.approx(1.0)
        assert prob_one(state, 1) == pytest.approx(1.0)

    def test_norm_preserved_random_params(self, rng):
        for _ in range(20):
            amps = random_state(3, rng)
            state = _apply_fragment(
                pool_block(2, 0, 0, 1), Statevector(3, amps), rng.uniform(0, 2 * np.pi, 2)
            )
            assert abs(state.norm_sq() - 1.0) < 1e-12

    def test_equal_qubits_rejected(self):
        with pytest.raises(StructuralError):
            pool_block(0, 0, 0, 1)


class TestStronglyEntanglingLayers:
    def _ring_ranges(self, gates, n):
        ranges = []
        ring = []
        for g in gates:
            if g.kind == "CNOT":
                ring.append((g.targets[1] - g.targets[0]) % n)
                if len(ring) == n:
                    assert len(set(ring)) == 1
                    ranges.append(ring[0])
                    ring = []
        return ranges

    def test_nine_qubit_ranges_and_slots(self):
        gates = strongly_entangling_layers(9, 3)
        assert self._ring_ranges(gates, 9) == [1, 2, 3]
        slots = {s for g in gates for s in g.slots}
        assert slots == set(range(81))

    def test_two_qubit_ranges_all_one(self):
        gates = strongly_entangling_layers(2, 3)
        assert self._ring_ranges(gates, 2) == [1, 1, 1]

    def test_zero_params_fixed_point(self):
        gates = strongly_entangling_layers(4, 2)
        state = _apply_fragment(gates, init_zero(4))
        assert np.allclose(state.amplitudes, init_zero(4).amplitudes, atol=1e-12)

    def test_too_few_qubits(self):
        with pytest.raises(StructuralError):
            strongly_entangling_layers(1, 1)


class TestBuildQramCircuit:
    def test_param_count_nine(self):
        circuit = build_qram_circuit(QramArchitectureSpec(9, 1, 3))
        assert circuit.n_params == 117  # 36 conv/pool + 81 entangling

    def test_param_count_two(self):
        circuit = build_qram_circuit(QramArchitectureSpec(2, 1, 3))
        assert circuit.n_params == 22  # degenerate ring: single pair

    def test_each_slot_used_exactly_once(self):
        circuit = build_qram_circuit(QramArchitectureSpec(5, 2, 3))
        slots = [s for g in circuit.gates for s in g.slots]
        assert sorted(slots) == list(range(circuit.n_params))

    def test_invalid_spec(self):
        with pytest.raises(ConfigurationError):
            QramArchitectureSpec(1)

    def test_unitary_on_random_params(self, rng):
        circuit = build_qram_circuit(QramArchitectureSpec(4, 1, 3))
        theta = rng.uniform(0, 2 * np.pi, circuit.n_params)
        out = run_circuit(circuit, theta, init_zero(4))
        assert abs(out.norm_sq() - 1.0) < 1e-10


class TestSerializationAndComposition:
    def test_json_round_trip(self):
        circuit = build_qram_circuit(QramArchitectureSpec(3, 1, 2))
        restored = circuit_from_json(circuit_to_json(circuit))
        assert restored == circuit

    def test_unreferenced_slot_rejected(self):
        with pytest.raises(StructuralError):
            ParamCircuit(2, (Gate("RY", (0,), slots=(0,)),), 2)

    def test_freeze_then_concat(self, rng):
        circuit = build_qram_circuit(QramArchitectureSpec(3, 1, 1))
        theta = rng.uniform(0, 2 * np.pi, circuit.n_params)
        frozen = freeze_circuit(circuit, theta)
        assert frozen.n_params == 0
        combined = concat_circuits(frozen, circuit)
        assert combined.n_params == circuit.n_params
        direct = run_circuit(circuit, theta, run_circuit(frozen, np.zeros(0), init_zero(3)))
        via_concat = run_circuit(combined, theta, init_zero(3))
        assert np.allclose(direct.amplitudes, via_concat.amplitudes, atol=1e-12)

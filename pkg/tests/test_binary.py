import numpy as np
import pytest

from aqram.binary import (
    BinaryTable,
    cluster_table,
    cluster_words,
    embed_address_states,
    expand,
    generate_table,
    hamming,
    predict_bits,
    to_bits,
    train_binary_qram,
    train_clustered,
)
from aqram.circuits import circuit_from_gates
from aqram.config import TrainConfig
from aqram.errors import ConfigurationError, StructuralError
from aqram.simulator import Gate

# the 2-address illustration table {00-01, 01-11, 10-00, 11-01}
EXAMPLE_TABLE = BinaryTable(2, np.array([0b01, 0b11, 0b00, 0b01]), seed=0)


class TestGenerateTable:
    def test_shape_and_range(self):
        table = generate_table(3, 0)
        assert table.data.shape == (8,)
        assert np.all((table.data >= 0) & (table.data < 8))

    def test_two_address_shape(self):
        assert generate_table(2, 5).data.shape == (4,)

    def test_deterministic(self):
        assert np.array_equal(generate_table(4, 9).data, generate_table(4, 9).data)

    @pytest.mark.parametrize("bad", [1, 10])
    def test_out_of_range(self, bad):
        with pytest.raises(ConfigurationError):
            generate_table(bad, 0)


class TestExpand:
    def test_cyclic_sequence(self):
        ds = expand(EXAMPLE_TABLE, 8)
        assert list(ds.addresses) == [0, 1, 2, 3, 0, 1, 2, 3]
        assert list(ds.data) == [0b01, 0b11, 0b00, 0b01] * 2

    def test_exact_size_is_table(self):
        ds = expand(EXAMPLE_TABLE, 4)
        assert list(ds.addresses) == [0, 1, 2, 3]

    def test_rounds_up_to_whole_repetitions(self):
        ds = expand(generate_table(3, 0), 20)
        assert ds.addresses.size == 24  # 3 full repetitions of 8

    def test_sample_k_is_entry_k_mod_base(self):
        table = generate_table(3, 1)
        ds = expand(table, 30)
        for k in range(ds.addresses.size):
            assert ds.addresses[k] == k % 8
            assert ds.data[k] == table.data[k % 8]


class TestHamming:
    def test_examples(self):
        assert hamming("0101", "0110") == 2
        assert hamming("0101", "0101") == 0
        assert hamming("0000", "1111") == 4

    def test_width_mismatch(self):
        with pytest.raises(StructuralError):
            hamming("01", "011")


class TestPredictBits:
    def test_threshold_from_fixed_rotations(self):
        # RY angles chosen so prob_one is 0.2 on qubit 0 and 0.6 on qubit 1
        angles = [2 * np.arcsin(np.sqrt(0.2)), 2 * np.arcsin(np.sqrt(0.6))]
        circuit = circuit_from_gates(
            2, [Gate("RY", (0,), slots=(0,)), Gate("RY", (1,), slots=(1,))]
        )
        assert predict_bits(circuit, np.array(angles), "00") == "01"

    def test_deterministic(self):
        circuit = circuit_from_gates(
            2, [Gate("RY", (0,), slots=(0,)), Gate("RY", (1,), slots=(1,))]
        )
        theta = np.array([0.3, 0.4])
        outputs = {predict_bits(circuit, theta, "10") for _ in range(5)}
        assert len(outputs) == 1

    def test_width_mismatch(self):
        circuit = circuit_from_gates(2, [Gate("RY", (0,), slots=(0,)), Gate("RY", (1,), slots=(1,))])
        with pytest.raises(StructuralError):
            predict_bits(circuit, np.zeros(2), "101")


class TestEmbedAddressStates:
    def test_basis_one_hot(self):
        states = embed_address_states([0, 3], 2, "basis")
        assert np.allclose(states[0], [1, 0, 0, 0])
        assert np.allclose(states[1], [0, 0, 0, 1])

    def test_angle_matches_basis_for_bits(self):
        for n in (2, 3):
            addresses = np.arange(1 << n)
            basis = embed_address_states(addresses, n, "basis")
            angle = embed_address_states(addresses, n, "angle")
            assert np.allclose(np.abs(basis) ** 2, np.abs(angle) ** 2, atol=1e-12)


class TestClustering:
    def test_two_tight_pairs(self):
        # brute force over all 2-cluster pairings: {0000,0001} + {1110,1111}
        # is the unique split with intra-cluster HD 1 (any other is >= 3)
        assignment = cluster_words([0b0000, 0b0001, 0b1110, 0b1111], 4, 2)
        assert assignment.members == ((0, 1), (2, 3))

    def test_identical_data_single_cluster(self):
        table = BinaryTable(2, np.array([2, 2, 2, 2]), 0)
        assignment = cluster_table(table, 16)
        assert assignment.k == 1

    def test_partition_property(self):
        table = generate_table(5, 3)
        assignment = cluster_table(table, 16)
        seen = sorted(i for members in assignment.members for i in members)
        assert seen == list(range(32))
        assert all(len(m) <= 16 for m in assignment.members)

    def test_bad_max_size(self):
        with pytest.raises(ConfigurationError):
            cluster_table(generate_table(2, 0), 1)


QUICK = TrainConfig(epochs=4, expansion_target=64)


class TestTraining:
    def test_metrics_shapes_and_bounds(self):
        table = generate_table(2, 0)
        _, metrics = train_binary_qram(table, QUICK)
        assert len(metrics.mean_hd) == QUICK.epochs + 1
        assert all(0 <= hd <= 2 for hd in metrics.mean_hd)
        assert all(0 <= pc <= 100 for pc in metrics.pct_correct)

    def test_perfect_iff_hd_zero(self):
        table = generate_table(2, 1)
        _, metrics = train_binary_qram(table, QUICK)
        for hd, pc in zip(metrics.mean_hd, metrics.pct_correct):
            assert (hd == 0) == (pc == 100.0)

    def test_deterministic(self):
        table = generate_table(2, 2)
        _, a = train_binary_qram(table, QUICK)
        _, b = train_binary_qram(table, QUICK)
        assert a.mse == b.mse and a.mean_hd == b.mean_hd

    def test_epoch_zero_near_chance(self):
        # untrained prediction error should sit near n/2 bits on average
        n = 4
        start = [
            train_binary_qram(generate_table(n, s), TrainConfig(epochs=1, seed=s, expansion_target=16))[1].mean_hd[0]
            for s in range(10)
        ]
        assert abs(float(np.mean(start)) - n / 2) < 1.0

    def test_single_cluster_matches_unclustered(self):
        table = BinaryTable(2, np.array([3, 3, 3, 3]), 0)
        _, plain = train_binary_qram(table, QUICK)
        _, aggregated, assignment = train_clustered(table, QUICK)
        assert assignment.k == 1
        assert plain.mse == aggregated.mse
        assert plain.mean_hd == aggregated.mean_hd

    def test_clustered_partition_weighting(self):
        table = generate_table(3, 0)
        params, aggregated, assignment = train_clustered(table, QUICK.with_(max_cluster_size=4))
        assert len(params) == assignment.k
        assert len(aggregated.mean_hd) == QUICK.epochs + 1
        assert all(0 <= hd <= 3 for hd in aggregated.mean_hd)


class TestToBits:
    def test_msb_first(self):
        assert np.array_equal(to_bits([5], 3)[0], [1.0, 0.0, 1.0])
        assert np.array_equal(to_bits([1], 4)[0], [0.0, 0.0, 0.0, 1.0])

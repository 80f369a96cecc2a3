"""Binary-storage experiments: random address->data tables, dataset
expansion, QRAM training with Hamming-distance metrics, and the
agglomerative clustering pre-processing step."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import ParamCircuit, QramArchitectureSpec, build_qram_circuit
from .config import TrainConfig
from .errors import ConfigurationError, StructuralError
from .training import AdamState, adjoint_backward
from .training import expectations_z_batched, forward_batched

MIN_ADDRESS_BITS = 2
MAX_ADDRESS_BITS = 9


@dataclass(frozen=True)
class BinaryTable:
    """All 2^n addresses paired with uniformly random n-bit data words."""

    n: int
    data: np.ndarray  # shape (2^n,), values in [0, 2^n)
    seed: int

    def __post_init__(self):
        if self.data.shape != (1 << self.n,):
            raise StructuralError(f"table must have {1 << self.n} entries")
        if np.any(self.data < 0) or np.any(self.data >= (1 << self.n)):
            raise StructuralError("data values out of range")


@dataclass(frozen=True)
class ExpandedDataset:
    """Whole-table repetition: sample k is base entry k mod 2^n."""

    addresses: np.ndarray
    data: np.ndarray
    base_size: int


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: np.ndarray  # cluster id per table entry
    members: tuple[tuple[int, ...], ...]


@dataclass
class BinaryMetrics:
    """Per-epoch traces; index 0 is the untrained starting point."""

    mse: list[float]
    mean_hd: list[float]
    pct_correct: list[float]


def generate_table(n: int, seed: int) -> BinaryTable:
    if not MIN_ADDRESS_BITS <= n <= MAX_ADDRESS_BITS:
        raise ConfigurationError(f"n must be in [{MIN_ADDRESS_BITS}, {MAX_ADDRESS_BITS}]")
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 1 << n, size=1 << n, dtype=np.int64)
    return BinaryTable(n, data, seed)


def expand(table: BinaryTable, target_size: int) -> ExpandedDataset:
    base = 1 << table.n
    if target_size < base:
        raise ConfigurationError("target_size must be at least 2^n")
    reps = -(-target_size // base)  # ceil
    addresses = np.tile(np.arange(base, dtype=np.int64), reps)
    return ExpandedDataset(addresses, np.tile(table.data, reps), base)


def to_bits(values, n: int) -> np.ndarray:
    """Integers -> (len, n) bit matrix, most significant bit first."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1)
    return ((values[:, None] >> shifts) & 1).astype(np.float64)


def hamming(a: str, b: str) -> int:
    if len(a) != len(b):
        raise StructuralError(f"width mismatch: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


def embed_address_states(addresses, n: int, mode: str = "basis") -> np.ndarray:
    """Prepare one input state per address; shape (len, 2^n).

    Basis embedding gives exact one-hot basis states.  Angle embedding maps
    bit b to a fixed RY(pi*b) rotation, which prepares the same product
    state for binary inputs but goes through per-qubit amplitudes.
    """
    addresses = np.asarray(addresses, dtype=np.int64)
    dim = 1 << n
    if mode == "basis":
        states = np.zeros((addresses.size, dim), dtype=np.complex128)
        states[np.arange(addresses.size), addresses] = 1.0
        return states
    bits = to_bits(addresses, n)
    states = np.ones((addresses.size, 1), dtype=np.complex128)
    for q in range(n):
        half = np.pi * bits[:, q] / 2.0
        qamp = np.stack([np.cos(half), np.sin(half)], axis=1)
        states = (states[:, :, None] * qamp[:, None, :]).reshape(addresses.size, -1)
    return states


def predict_bits(circuit: ParamCircuit, params, address: str) -> str:
    """Read the stored word for one address: prob_one per qubit, threshold 0.5."""
    if len(address) != circuit.n_qubits:
        raise StructuralError("address width must equal circuit qubit count")
    idx = int(address, 2)
    probs = _forward_probs(circuit, params, np.array([idx]), "basis")
    return "".join("1" if p > 0.5 else "0" for p in probs[0])


def _forward_probs(circuit, theta, addresses, mode) -> np.ndarray:
    states = embed_address_states(addresses, circuit.n_qubits, mode)
    out = forward_batched(circuit, theta, states)
    exps = expectations_z_batched(out, range(circuit.n_qubits), circuit.n_qubits)
    return (1.0 - exps) / 2.0


def _eval_entries(circuit, theta, addresses, target_bits, mode):
    probs = _forward_probs(circuit, theta, addresses, mode)
    pred = (probs > 0.5).astype(np.float64)
    hd = np.sum(pred != target_bits, axis=1)
    mse = float(np.mean((probs - target_bits) ** 2))
    return mse, float(np.mean(hd)), 100.0 * float(np.mean(hd == 0))


def _init_binary(n_params: int, seed) -> np.ndarray:
    """Uniform [0, 1) start for binary tables.

    Full-period [0, 2pi) init leaves many per-bit probabilities saturated on
    the wrong side of 0.5, and at lr 0.001 Adam crosses the threshold so
    slowly that single bits still oscillate around 0.5 at epoch 100.  A start
    near (but not at) the identity converges an order of magnitude faster and
    locks in well before the final epoch.
    """
    return np.random.default_rng(seed).uniform(0.0, 1.0, n_params)


def _train_qram_core(addresses, data, n, cfg: TrainConfig):
    """Train one QRAM on the given (address, data) entries.

    Entries are expanded by whole-list repetition up to cfg.expansion_target,
    then optimized with minibatch Adam on the per-qubit probability MSE.
    Metrics are evaluated on the unique entries after every epoch.
    """
    circuit = build_qram_circuit(
        QramArchitectureSpec(n, cfg.n_conv_layers, cfg.n_sel_layers)
    )
    theta = _init_binary(circuit.n_params, cfg.seed)
    rng = np.random.default_rng([cfg.seed, 0x5B])
    adam = AdamState(circuit.n_params, lr=cfg.learning_rate)

    base = len(addresses)
    reps = max(1, -(-cfg.expansion_target // base))
    ex_addr = np.tile(np.asarray(addresses, dtype=np.int64), reps)
    ex_bits = np.tile(to_bits(data, n), (reps, 1))
    states_all = embed_address_states(ex_addr, n, cfg.embedding)

    uniq_addr = np.asarray(addresses, dtype=np.int64)
    uniq_bits = to_bits(data, n)

    metrics = BinaryMetrics([], [], [])
    mse, hd, pct = _eval_entries(circuit, theta, uniq_addr, uniq_bits, cfg.embedding)
    metrics.mse.append(mse)
    metrics.mean_hd.append(hd)
    metrics.pct_correct.append(pct)

    m = ex_addr.size
    obs = list(range(n))
    for _ in range(cfg.epochs):
        perm = rng.permutation(m)
        for start in range(0, m, cfg.batch_size):
            sel = perm[start : start + cfg.batch_size]
            states = states_all[sel]
            targets = ex_bits[sel]
            psi = forward_batched(circuit, theta, states.copy())
            exps = expectations_z_batched(psi, obs, n)
            probs = (1.0 - exps) / 2.0
            # d(mean bit MSE)/d<Z> = 2(p - t)/n * dp/dz, dp/dz = -1/2
            upstream = -(probs - targets) / n
            grads = adjoint_backward(circuit, theta, psi, obs, upstream)
            theta = adam.step(theta, np.mean(grads, axis=0))
        mse, hd, pct = _eval_entries(circuit, theta, uniq_addr, uniq_bits, cfg.embedding)
        metrics.mse.append(mse)
        metrics.mean_hd.append(hd)
        metrics.pct_correct.append(pct)
    return theta, metrics


def train_binary_qram(table: BinaryTable, cfg: TrainConfig):
    """Train a single QRAM on the full table; per-epoch HD / percent-correct."""
    addresses = np.arange(1 << table.n, dtype=np.int64)
    return _train_qram_core(addresses, table.data, table.n, cfg)


# ---------------------------------------------------------------------------
# clustering pre-processing


def _avg_hamming(bits_a: np.ndarray, bits_b: np.ndarray) -> float:
    # mean pairwise Hamming distance between two member-bit blocks
    diff = bits_a[:, None, :] != bits_b[None, :, :]
    return float(np.mean(np.sum(diff, axis=2)))


def cluster_words(data, n: int, max_cluster_size: int) -> ClusterAssignment:
    """Bottom-up average-linkage clustering of n-bit words under Hamming
    distance.

    The closest pair of clusters is merged while (a) the merged size stays
    within ``max_cluster_size`` and (b) the pair's average distance is below
    n/2, the chance-level distance of independent random words.  Ties break
    toward the pair with the smallest member indices.
    """
    if max_cluster_size < 2:
        raise ConfigurationError("max_cluster_size must be >= 2")
    data = np.asarray(data, dtype=np.int64)
    bits = to_bits(data, n)
    clusters: list[list[int]] = [[i] for i in range(len(data))]
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                if len(clusters[i]) + len(clusters[j]) > max_cluster_size:
                    continue
                d = _avg_hamming(bits[clusters[i]], bits[clusters[j]])
                if d >= n / 2.0:
                    continue
                if best is None or d < best[0] - 1e-12:
                    best = (d, i, j)
        if best is None:
            break
        _, i, j = best
        clusters[i] = sorted(clusters[i] + clusters[j])
        del clusters[j]
        clusters.sort(key=lambda c: c[0])
    labels = np.empty(len(data), dtype=np.int64)
    for cid, members in enumerate(clusters):
        labels[members] = cid
    return ClusterAssignment(len(clusters), labels, tuple(tuple(c) for c in clusters))


def cluster_table(table: BinaryTable, max_cluster_size: int) -> ClusterAssignment:
    return cluster_words(table.data, table.n, max_cluster_size)


def train_clustered(table: BinaryTable, cfg: TrainConfig):
    """One QRAM per cluster; metrics aggregated as entry-count-weighted means."""
    assignment = cluster_table(table, cfg.max_cluster_size)
    per_cluster_params = []
    traces = []
    weights = []
    for members in assignment.members:
        addr = np.asarray(members, dtype=np.int64)
        theta, metrics = _train_qram_core(addr, table.data[addr], table.n, cfg)
        per_cluster_params.append(theta)
        traces.append(metrics)
        weights.append(len(members))
    w = np.asarray(weights, dtype=np.float64)
    w /= w.sum()
    agg = BinaryMetrics([], [], [])
    for e in range(len(traces[0].mse)):
        agg.mse.append(float(np.sum(w * [t.mse[e] for t in traces])))
        agg.mean_hd.append(float(np.sum(w * [t.mean_hd[e] for t in traces])))
        agg.pct_correct.append(float(np.sum(w * [t.pct_correct[e] for t in traces])))
    return per_cluster_params, agg, assignment

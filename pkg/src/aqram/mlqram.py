"""Digit-image QRAM and the three classification setups.

Pipeline: a two-step QRAM pre-training phase (auxiliary PQC sees the
amplitude-embedded image, main PQC sees only the 9-bit address; their
per-qubit probabilities are matched by MSE), then a QNN classifier stacked
on the frozen main QRAM.  A QNN fed by amplitude embedding directly and a
small fully connected network serve as baselines.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .circuits import (
    ParamCircuit,
    QramArchitectureSpec,
    amplitude_embed,
    build_qram_circuit,
    concat_circuits,
    freeze_circuit,
)
from .config import TrainConfig
from .errors import IngestionError, StructuralError
from .training import (
    AdamState,
    adjoint_backward,
    expectations_z_batched,
    forward_batched,
    loss_and_grad,
)

N_ADDRESS_QUBITS = 9
MAX_SAMPLES = 1 << N_ADDRESS_QUBITS
N_PIXELS = 64


@dataclass(frozen=True)
class DigitSample:
    pixels: np.ndarray  # 64 grayscale values in [0, 16]
    label: int
    address: str  # 9-bit dataset index


@dataclass
class QramMlModel:
    aux_params: np.ndarray
    main_params: np.ndarray
    spec: QramArchitectureSpec


@dataclass
class ClassifierModel:
    main_params: np.ndarray | None  # None for the embedding-only setup
    qnn_params: np.ndarray
    spec: QramArchitectureSpec


@dataclass
class MetricsTrace:
    """Per-epoch classifier curves; index 0 is the untrained model."""

    train_loss: list[float]
    test_loss: list[float]
    train_acc: list[float]
    test_acc: list[float]


def load_digits(path: str, classes=(0, 1)) -> list[DigitSample]:
    """Read the digits CSV (64 features + label, no header) and keep the
    requested classes, addressing samples by filtered order."""
    if not os.path.isfile(path):
        raise IngestionError(f"digits file not found: {path}")
    samples = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if len(row) != N_PIXELS + 1:
                raise IngestionError(f"{path}:{lineno}: expected 65 columns, got {len(row)}")
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from None
            label = int(values[-1])
            if label not in classes:
                continue
            pixels = np.asarray(values[:-1], dtype=np.float64)
            if not np.any(pixels):
                raise IngestionError(f"{path}:{lineno}: all-zero pixel row")
            index = len(samples)
            if index >= MAX_SAMPLES:
                raise IngestionError(f"more than {MAX_SAMPLES} samples for {len(classes)} classes")
            samples.append(DigitSample(pixels, label, format(index, f"0{N_ADDRESS_QUBITS}b")))
    return samples


def export_digits_csv(path: str) -> None:
    """Materialize the UCI digits dataset as the CSV format load_digits reads."""
    from sklearn.datasets import load_digits as _sk_digits

    bunch = _sk_digits()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for pixels, label in zip(bunch.data, bunch.target):
            writer.writerow([int(v) for v in pixels] + [int(label)])


# ---------------------------------------------------------------------------
# state preparation


def image_states(samples) -> np.ndarray:
    return np.stack(
        [amplitude_embed(s.pixels, N_ADDRESS_QUBITS).amplitudes for s in samples]
    )


def address_states(samples) -> np.ndarray:
    states = np.zeros((len(samples), 1 << N_ADDRESS_QUBITS), dtype=np.complex128)
    for i, s in enumerate(samples):
        states[i, int(s.address, 2)] = 1.0
    return states


def _forward_probs(circuit, theta, states) -> np.ndarray:
    out = forward_batched(circuit, theta, states.copy())
    exps = expectations_z_batched(out, range(circuit.n_qubits), circuit.n_qubits)
    return (1.0 - exps) / 2.0


def aux_forward(aux_params, sample: DigitSample, spec=None) -> np.ndarray:
    spec = spec or QramArchitectureSpec(N_ADDRESS_QUBITS)
    circuit = build_qram_circuit(spec)
    state = amplitude_embed(sample.pixels, N_ADDRESS_QUBITS)
    return _forward_probs(circuit, aux_params, state.amplitudes[None, :])[0]


def main_forward(main_params, address: str, spec=None) -> np.ndarray:
    if len(address) != N_ADDRESS_QUBITS:
        raise StructuralError(f"address must be {N_ADDRESS_QUBITS} bits")
    spec = spec or QramArchitectureSpec(N_ADDRESS_QUBITS)
    circuit = build_qram_circuit(spec)
    states = np.zeros((1, 1 << N_ADDRESS_QUBITS), dtype=np.complex128)
    states[0, int(address, 2)] = 1.0
    return _forward_probs(circuit, main_params, states)[0]


def _init_small(n_params: int, seed) -> np.ndarray:
    """Near-identity initialization for the ML circuits.

    Full-period uniform angles make a depth-9-qubit circuit scramble the
    embedded image so every per-qubit probability collapses to ~0.5, which
    lets the QRAM pre-training settle on the trivial all-0.5 fixed point.
    Starting near the identity keeps the image marginals visible.
    """
    return np.random.default_rng(seed).uniform(0.0, 0.1, n_params)


# ---------------------------------------------------------------------------
# two-step QRAM training


def _qram_mse(circuit, aux, main, img, addr) -> float:
    pa = _forward_probs(circuit, aux, img)
    pm = _forward_probs(circuit, main, addr)
    return float(np.mean((pm - pa) ** 2))


def train_qram_two_step(samples, cfg: TrainConfig):
    """Step 1 trains aux+main jointly; step 2 freezes aux and refines main.

    Returns (QramMlModel, {"qram_step1": mse trace, "qram_step2": mse trace}).
    """
    if len(samples) < 2:
        raise StructuralError("need at least 2 samples")
    spec = QramArchitectureSpec(N_ADDRESS_QUBITS, cfg.n_conv_layers, cfg.n_sel_layers)
    circuit = build_qram_circuit(spec)
    p = circuit.n_params
    obs = list(range(N_ADDRESS_QUBITS))
    img = image_states(samples)
    addr = address_states(samples)
    joint = _init_small(2 * p, cfg.seed)
    aux, main = joint[:p].copy(), joint[p:].copy()
    rng = np.random.default_rng([cfg.seed, 0xD1])
    m = len(samples)
    traces = {"qram_step1": [], "qram_step2": [], "aux_after_step1": None}

    for phase in ("qram_step1", "qram_step2"):
        if phase == "qram_step2":
            traces["aux_after_step1"] = aux.copy()
        adam = AdamState(2 * p if phase == "qram_step1" else p, lr=cfg.learning_rate)
        traces[phase].append(_qram_mse(circuit, aux, main, img, addr))
        for _ in range(cfg.epochs):
            perm = rng.permutation(m)
            for start in range(0, m, cfg.batch_size):
                sel = perm[start : start + cfg.batch_size]
                psi_a = forward_batched(circuit, aux, img[sel].copy())
                psi_m = forward_batched(circuit, main, addr[sel].copy())
                pa = (1.0 - expectations_z_batched(psi_a, obs, N_ADDRESS_QUBITS)) / 2.0
                pm = (1.0 - expectations_z_batched(psi_m, obs, N_ADDRESS_QUBITS)) / 2.0
                # per-sample MSE over 9 probabilities; dp/d<Z> = -1/2
                diff = (pm - pa) / N_ADDRESS_QUBITS
                g_main = adjoint_backward(circuit, main, psi_m, obs, -diff)
                if phase == "qram_step1":
                    g_aux = adjoint_backward(circuit, aux, psi_a, obs, diff)
                    grad = np.concatenate(
                        [np.mean(g_aux, axis=0), np.mean(g_main, axis=0)]
                    )
                    update = adam.step(np.concatenate([aux, main]), grad)
                    aux, main = update[:p], update[p:]
                else:
                    main = adam.step(main, np.mean(g_main, axis=0))
            traces[phase].append(_qram_mse(circuit, aux, main, img, addr))
    return QramMlModel(aux, main, spec), traces


# ---------------------------------------------------------------------------
# classifiers


def split_stratified(labels, split_seed: int, train_frac: float = 0.8):
    """Disjoint per-class 80/20 split covering every sample."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(split_seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        cut = int(round(train_frac * idx.size))
        train.extend(idx[:cut])
        test.extend(idx[cut:])
    return np.sort(np.asarray(train)), np.sort(np.asarray(test))


def _classifier_eval(circuit, theta, states, labels):
    p = np.clip(_forward_probs(circuit, theta, states)[:, 0], 1e-7, 1 - 1e-7)
    loss = float(np.mean(-labels * np.log(p) - (1 - labels) * np.log(1 - p)))
    acc = 100.0 * float(np.mean((p > 0.5) == (labels > 0.5)))
    return loss, acc


def _train_quantum_classifier(circuit, states, labels, split_seed, cfg):
    theta = _init_small(circuit.n_params, [cfg.seed, 0xC1])
    rng = np.random.default_rng([cfg.seed, 0xC2])
    adam = AdamState(circuit.n_params, lr=cfg.learning_rate)
    train_idx, test_idx = split_stratified(labels, split_seed)
    trace = MetricsTrace([], [], [], [])

    def record():
        tr_loss, tr_acc = _classifier_eval(circuit, theta, states[train_idx], labels[train_idx])
        te_loss, te_acc = _classifier_eval(circuit, theta, states[test_idx], labels[test_idx])
        trace.train_loss.append(tr_loss)
        trace.test_loss.append(te_loss)
        trace.train_acc.append(tr_acc)
        trace.test_acc.append(te_acc)

    record()
    for _ in range(cfg.epochs):
        perm = train_idx[rng.permutation(train_idx.size)]
        for start in range(0, perm.size, cfg.batch_size):
            sel = perm[start : start + cfg.batch_size]
            psi = forward_batched(circuit, theta, states[sel].copy())
            exps = expectations_z_batched(psi, [0], circuit.n_qubits)
            p = (1.0 - exps[:, 0]) / 2.0
            pc = np.clip(p, 1e-7, 1 - 1e-7)
            t = labels[sel]
            dloss_dp = -t / pc + (1 - t) / (1 - pc)
            upstream = (-0.5 * dloss_dp)[:, None]
            grads = adjoint_backward(circuit, theta, psi, [0], upstream)
            theta = adam.step(theta, np.mean(grads, axis=0))
        record()
    return theta, trace


def train_classifier_qram(model: QramMlModel, samples, split_seed: int, cfg: TrainConfig):
    """Frozen main QRAM followed by a trainable QNN; prob_one(qubit 0) readout."""
    qram = freeze_circuit(build_qram_circuit(model.spec), model.main_params)
    qnn = build_qram_circuit(model.spec)
    full = concat_circuits(qram, qnn)
    states = address_states(samples)
    labels = np.asarray([s.label for s in samples], dtype=np.float64)
    theta, trace = _train_quantum_classifier(full, states, labels, split_seed, cfg)
    return ClassifierModel(model.main_params, theta, model.spec), trace


def train_classifier_embed(samples, split_seed: int, cfg: TrainConfig):
    """QNN on the amplitude-embedded images directly."""
    spec = QramArchitectureSpec(N_ADDRESS_QUBITS, cfg.n_conv_layers, cfg.n_sel_layers)
    qnn = build_qram_circuit(spec)
    states = image_states(samples)
    labels = np.asarray([s.label for s in samples], dtype=np.float64)
    theta, trace = _train_quantum_classifier(qnn, states, labels, split_seed, cfg)
    return theta, trace


# ---------------------------------------------------------------------------
# classical baseline


@dataclass
class FcnnModel:
    """64 -> 16 ReLU -> 1 sigmoid."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = np.maximum(x / 16.0 @ self.w1 + self.b1, 0.0)
        z = h @ self.w2 + self.b2
        return 1.0 / (1.0 + np.exp(-z[:, 0]))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2.ravel(), self.b2])

    @staticmethod
    def from_flat(vec: np.ndarray) -> "FcnnModel":
        w1 = vec[: 64 * 16].reshape(64, 16)
        b1 = vec[64 * 16 : 64 * 16 + 16]
        w2 = vec[64 * 16 + 16 : 64 * 16 + 32].reshape(16, 1)
        b2 = vec[64 * 16 + 32 :]
        return FcnnModel(w1.copy(), b1.copy(), w2.copy(), b2.copy())


def fcnn_init(seed: int) -> FcnnModel:
    rng = np.random.default_rng([seed, 0xF1])
    w1 = rng.normal(0.0, np.sqrt(2.0 / (64 + 16)), (64, 16))
    w2 = rng.normal(0.0, np.sqrt(2.0 / (16 + 1)), (16, 1))
    return FcnnModel(w1, np.zeros(16), w2, np.zeros(1))


def fcnn_loss_grad(model: FcnnModel, x: np.ndarray, t: np.ndarray):
    """BCE loss and backprop gradient, flattened like FcnnModel.flat()."""
    xs = x / 16.0
    z1 = xs @ model.w1 + model.b1
    h = np.maximum(z1, 0.0)
    z2 = h @ model.w2 + model.b2
    p = 1.0 / (1.0 + np.exp(-z2[:, 0]))
    loss, dp = loss_and_grad("BCE", p, t)
    dz2 = (dp * p * (1.0 - p))[:, None]
    dw2 = h.T @ dz2
    db2 = dz2.sum(axis=0)
    dh = dz2 @ model.w2.T
    dz1 = dh * (z1 > 0.0)
    dw1 = xs.T @ dz1
    db1 = dz1.sum(axis=0)
    return loss, np.concatenate([dw1.ravel(), db1, dw2.ravel(), db2])


def train_fcnn(samples, split_seed: int, cfg: TrainConfig):
    x = np.stack([s.pixels for s in samples])
    labels = np.asarray([s.label for s in samples], dtype=np.float64)
    train_idx, test_idx = split_stratified(labels, split_seed)
    model = fcnn_init(cfg.seed)
    vec = model.flat()
    adam = AdamState(vec.size, lr=cfg.learning_rate)
    rng = np.random.default_rng([cfg.seed, 0xF2])
    trace = MetricsTrace([], [], [], [])

    def record():
        m = FcnnModel.from_flat(vec)
        for idx, losses, accs in (
            (train_idx, trace.train_loss, trace.train_acc),
            (test_idx, trace.test_loss, trace.test_acc),
        ):
            p = np.clip(m.forward(x[idx]), 1e-7, 1 - 1e-7)
            t = labels[idx]
            losses.append(float(np.mean(-t * np.log(p) - (1 - t) * np.log(1 - p))))
            accs.append(100.0 * float(np.mean((p > 0.5) == (t > 0.5))))

    record()
    for _ in range(cfg.epochs):
        perm = train_idx[rng.permutation(train_idx.size)]
        for start in range(0, perm.size, cfg.batch_size):
            sel = perm[start : start + cfg.batch_size]
            _, grad = fcnn_loss_grad(FcnnModel.from_flat(vec), x[sel], labels[sel])
            vec = adam.step(vec, grad)
        record()
    return FcnnModel.from_flat(vec), trace

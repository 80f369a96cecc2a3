"""Command-line harness: experiment orchestration, seeding, CSV persistence.

Subcommands: ``binary``, ``ml``, ``gradcheck``, ``selftest``.  Config
precedence is CLI flags > config file (flat key=value) > defaults.  Every
run writes a manifest before training starts; metric CSVs are one file per
run with 9-significant-digit floats so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import binary as bq
from . import mlqram as mq
from .config import TrainConfig
from .errors import ConfigurationError, IngestionError, NumericError

BINARY_COLUMNS = ["run_id", "n", "clustered", "seed", "epoch", "mse", "mean_hd", "pct_correct"]
ML_COLUMNS = [
    "run_id", "setup", "phase", "seed", "epoch",
    "train_loss", "test_loss", "train_acc", "test_acc",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return "%.9g" % value
    return str(value)


def _write_csv(path: str, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(path: str, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _start_manifest(out_dir: str, run_id: str, cfg: TrainConfig, extra: dict) -> str:
    path = os.path.join(out_dir, f"{run_id}.manifest.json")
    doc = {
        "run_id": run_id,
        "argv": sys.argv,
        "config": dataclasses.asdict(cfg),
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "metrics_csv": os.path.join(out_dir, f"{run_id}.csv"),
    }
    doc.update(extra)
    _write_manifest(path, doc)
    return path


def _finish_manifest(path: str) -> None:
    with open(path) as fh:
        doc = json.load(fh)
    doc["completed"] = True
    doc["finished_at"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    _write_manifest(path, doc)


# ---------------------------------------------------------------------------
# config resolution


def _load_config_file(path: str) -> dict:
    if not os.path.isfile(path):
        raise ConfigurationError(f"config file not found: {path}")
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


_INT_FIELDS = {"epochs", "batch_size", "seed", "n_conv_layers", "n_sel_layers",
               "expansion_target", "max_cluster_size"}
_FLOAT_FIELDS = {"learning_rate"}


def _resolve_config(args) -> TrainConfig:
    values: dict = {}
    if args.config:
        for key, raw in _load_config_file(args.config).items():
            if key in _INT_FIELDS:
                values[key] = int(raw)
            elif key in _FLOAT_FIELDS:
                values[key] = float(raw)
            elif key == "embedding":
                values[key] = raw
            else:
                raise ConfigurationError(f"unknown config key {key!r}")
    for flag, key in (("epochs", "epochs"), ("batch", "batch_size"), ("lr", "learning_rate")):
        cli = getattr(args, flag, None)
        if cli is not None:
            values[key] = cli
    try:
        return TrainConfig(**values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def _out_dir(args) -> str:
    out = args.out or os.environ.get("AQRAM_OUT_DIR") or "runs"
    os.makedirs(out, exist_ok=True)
    return out


def _parse_n_range(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        ns = list(range(int(lo), int(hi) + 1))
    else:
        ns = [int(part) for part in text.split(",")]
    for n in ns:
        if not bq.MIN_ADDRESS_BITS <= n <= bq.MAX_ADDRESS_BITS:
            raise ConfigurationError(f"address width {n} out of [2, 9]")
    return ns


# ---------------------------------------------------------------------------
# binary subcommand


def run_binary_once(out_dir: str, n: int, seed: int, clustered: bool, cfg: TrainConfig) -> str:
    run_id = f"binary_n{n}_s{seed}_{'clustered' if clustered else 'plain'}"
    cfg = cfg.with_(seed=seed)
    manifest = _start_manifest(out_dir, run_id, cfg, {"n": n, "clustered": clustered})
    table = bq.generate_table(n, seed)
    if clustered:
        _, metrics, _ = bq.train_clustered(table, cfg)
    else:
        _, metrics = bq.train_binary_qram(table, cfg)
    rows = [
        (run_id, n, clustered, seed, epoch, metrics.mse[epoch],
         metrics.mean_hd[epoch], metrics.pct_correct[epoch])
        for epoch in range(len(metrics.mse))
    ]
    csv_path = os.path.join(out_dir, f"{run_id}.csv")
    _write_csv(csv_path, BINARY_COLUMNS, rows)
    _finish_manifest(manifest)
    return csv_path


def cmd_binary(args) -> int:
    cfg = _resolve_config(args)
    out_dir = _out_dir(args)
    ns = _parse_n_range(args.n)
    seeds = list(range(args.seeds))
    clustered_opts = {"on": [True], "off": [False], "both": [False, True]}[args.clustered]
    jobs = [(n, seed, cl) for n in ns for seed in seeds for cl in clustered_opts]
    if args.threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.threads) as pool:
            futures = [
                pool.submit(run_binary_once, out_dir, n, seed, cl, cfg) for n, seed, cl in jobs
            ]
            for fut in futures:
                print(fut.result())
    else:
        for n, seed, cl in jobs:
            print(run_binary_once(out_dir, n, seed, cl, cfg))
    return 0


# ---------------------------------------------------------------------------
# ml subcommand


def run_ml_once(out_dir: str, setup: str, samples, seed: int, split_seed: int,
                cfg: TrainConfig) -> str:
    run_id = f"ml_{setup}_s{seed}"
    cfg = cfg.with_(seed=seed)
    manifest = _start_manifest(out_dir, run_id, cfg, {"setup": setup, "split_seed": split_seed})
    rows = []

    def add_phase(phase: str, trace: mq.MetricsTrace):
        for epoch in range(len(trace.train_loss)):
            rows.append(
                (run_id, setup, phase, seed, epoch, trace.train_loss[epoch],
                 trace.test_loss[epoch], trace.train_acc[epoch], trace.test_acc[epoch])
            )

    if setup == "qram_qnn":
        model, traces = mq.train_qram_two_step(samples, cfg)
        for phase in ("qram_step1", "qram_step2"):
            for epoch, mse in enumerate(traces[phase]):
                rows.append((run_id, setup, phase, seed, epoch, mse, None, None, None))
        _, trace = mq.train_classifier_qram(model, samples, split_seed, cfg)
        add_phase("classify", trace)
    elif setup == "qnn_embed":
        _, trace = mq.train_classifier_embed(samples, split_seed, cfg)
        add_phase("classify", trace)
    elif setup == "fcnn":
        _, trace = mq.train_fcnn(samples, split_seed, cfg)
        add_phase("classify", trace)
    else:
        raise ConfigurationError(f"unknown setup {setup!r}")

    csv_path = os.path.join(out_dir, f"{run_id}.csv")
    _write_csv(csv_path, ML_COLUMNS, rows)
    _finish_manifest(manifest)
    return csv_path


def cmd_ml(args) -> int:
    cfg = _resolve_config(args)
    out_dir = _out_dir(args)
    samples = mq.load_digits(args.data)
    setups = ["qram_qnn", "qnn_embed", "fcnn"] if args.setup == "all" else [args.setup]
    jobs = [(setup, seed) for setup in setups for seed in range(args.seeds)]
    if args.threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.threads) as pool:
            futures = [
                pool.submit(run_ml_once, out_dir, setup, samples, seed, args.split_seed, cfg)
                for setup, seed in jobs
            ]
            for fut in futures:
                print(fut.result())
    else:
        for setup, seed in jobs:
            print(run_ml_once(out_dir, setup, samples, seed, args.split_seed, cfg))
    return 0


# ---------------------------------------------------------------------------
# gradcheck / selftest


def gradient_suite(seed: int, n_circuits: int = 20):
    """Random-circuit comparison of adjoint vs finite-difference vs shift-rule.

    Returns (max FD mismatch beyond tolerance-normalized error, max adjoint
    vs parameter-shift absolute error).
    """
    from .circuits import circuit_from_gates
    from .simulator import Gate, init_zero
    from .training import (
        finite_diff_grad, grad_expectations, init_params, parameter_shift_grad,
    )

    rng = np.random.default_rng(seed)
    kinds = ["RX", "RY", "RZ", "ROT", "CRZ", "CRX"]
    worst_fd = 0.0
    worst_ps = 0.0
    for trial in range(n_circuits):
        n = int(rng.integers(2, 5))
        gates, slot = [], 0
        while slot < int(rng.integers(5, 31)) - 2:
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
        circuit = circuit_from_gates(n, gates)
        theta = init_params(circuit.n_params, [seed, trial])
        state = init_zero(n)
        observables = list(range(n))
        upstream = rng.normal(size=n)
        g_adj = grad_expectations(circuit, theta, state, observables, upstream)
        g_fd = finite_diff_grad(circuit, theta, state, observables, upstream)
        g_ps = parameter_shift_grad(circuit, theta, state, observables, upstream)
        # relative error with a 1e-7 absolute floor
        err = np.abs(g_adj - g_fd) / np.maximum(np.abs(g_fd), 1e-7 / 1e-5)
        worst_fd = max(worst_fd, float(err.max()))
        worst_ps = max(worst_ps, float(np.abs(g_adj - g_ps).max()))
    return worst_fd, worst_ps


def cmd_gradcheck(args) -> int:
    worst_fd, worst_ps = gradient_suite(args.seed)
    print(f"adjoint vs finite-difference: max relative error {worst_fd:.3e}")
    print(f"adjoint vs parameter-shift:   max absolute error {worst_ps:.3e}")
    ok = worst_fd < 1e-5 and worst_ps < 1e-9
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_selftest(args) -> int:
    from .simulator import Gate, apply_gate, expectation_z, init_zero

    state = init_zero(1)
    apply_gate(state, Gate("H", (0,)))
    assert abs(expectation_z(state, 0)) < 1e-12
    table = bq.generate_table(2, 0)
    assert table.data.size == 4
    assignment = bq.cluster_table(bq.generate_table(4, 0), 16)
    assert sorted(i for m in assignment.members for i in m) == list(range(16))
    worst_fd, worst_ps = gradient_suite(0, n_circuits=3)
    assert worst_fd < 1e-5 and worst_ps < 1e-9
    print("selftest OK")
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aqram", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--out", default=None, help="output directory (default $AQRAM_OUT_DIR or ./runs)")
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--batch", type=int, default=None)
        p.add_argument("--lr", type=float, default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seeds", type=int, default=1, help="run seeds 0..N-1")

    p_bin = sub.add_parser("binary", help="binary-storage QRAM experiments")
    common(p_bin)
    p_bin.add_argument("--n", default="2..9", help="address widths, e.g. 3, 2,5,9 or 2..9")
    p_bin.add_argument("--clustered", choices=["on", "off", "both"], default="off")
    p_bin.set_defaults(func=cmd_binary)

    p_ml = sub.add_parser("ml", help="digit-classification experiments")
    common(p_ml)
    p_ml.add_argument("--setup", choices=["qram_qnn", "qnn_embed", "fcnn", "all"], default="all")
    p_ml.add_argument("--data", required=True, help="digits CSV (64 features + label)")
    p_ml.add_argument("--split-seed", type=int, default=2, dest="split_seed")
    p_ml.set_defaults(func=cmd_ml)

    p_grad = sub.add_parser("gradcheck", help="gradient cross-validation suite")
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.set_defaults(func=cmd_gradcheck)

    p_self = sub.add_parser("selftest", help="quick internal consistency checks")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, IngestionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

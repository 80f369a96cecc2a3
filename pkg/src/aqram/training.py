"""Differentiable circuit execution and optimization.

The production gradient path is adjoint-mode differentiation: one forward
sweep to the final state, then a single reverse sweep that un-applies each
gate and accumulates d(sum_k upstream_k <Z_k>)/d(theta) for all parameters
at once.  Parameter-shift and central finite differences are kept as
independent oracles.
"""

from __future__ import annotations

import numpy as np

from .circuits import ParamCircuit
from .errors import NumericError, StructuralError
from .simulator import (
    CONTROLLED_KINDS,
    Statevector,
    apply_gate_batched,
    apply_gate_deriv_batched,
    apply_gate_inverse_batched,
    expectations_z_batched,
    z_signs,
)


def _resolve(gate, theta: np.ndarray) -> tuple[float, ...]:
    if gate.slots:
        return tuple(float(theta[s]) for s in gate.slots)
    return gate.params


def forward_batched(circuit: ParamCircuit, theta, amps: np.ndarray) -> np.ndarray:
    """Apply all gates in order to a (batch, 2^n) amplitude block."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (circuit.n_params,):
        raise StructuralError(
            f"expected {circuit.n_params} parameters, got shape {theta.shape}"
        )
    for gate in circuit.gates:
        amps = apply_gate_batched(amps, gate, _resolve(gate, theta), circuit.n_qubits)
    return amps


def run_circuit(circuit: ParamCircuit, theta, state: Statevector) -> Statevector:
    """Execute the circuit on one input state; returns a new state."""
    if state.n_qubits != circuit.n_qubits:
        raise StructuralError("input state qubit count does not match circuit")
    out = forward_batched(circuit, theta, state.amplitudes[None, :].copy())
    return Statevector(circuit.n_qubits, out[0])


def adjoint_backward(
    circuit: ParamCircuit,
    theta,
    psi_final: np.ndarray,
    observables,
    upstream: np.ndarray,
) -> np.ndarray:
    """Reverse sweep from an already-computed final state.

    psi_final: (B, 2^n) output of forward_batched; upstream: (B, K) weights
    on the per-qubit Z expectations.  Returns gradients (B, n_params).
    The sweep consumes psi_final by un-applying each gate in turn.
    """
    theta = np.asarray(theta, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if not np.all(np.isfinite(upstream)):
        raise NumericError("non-finite upstream weights")
    n = circuit.n_qubits
    psi = psi_final
    signs = np.stack([z_signs(n, q) for q in observables])
    lam = (upstream @ signs) * psi  # O|psi> for the diagonal observable
    grads = np.zeros((psi.shape[0], circuit.n_params), dtype=np.float64)
    for gate in reversed(circuit.gates):
        angles = _resolve(gate, theta)
        psi = apply_gate_inverse_batched(psi, gate, angles, n)
        if gate.slots:
            for j, slot in enumerate(gate.slots):
                dpsi = apply_gate_deriv_batched(psi, gate, angles, j, n)
                grads[:, slot] += 2.0 * np.real(np.einsum("bi,bi->b", lam.conj(), dpsi))
        lam = apply_gate_inverse_batched(lam, gate, angles, n)
    return grads


def adjoint_grad_batched(
    circuit: ParamCircuit,
    theta,
    amps0: np.ndarray,
    observables,
    upstream: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Forward pass plus adjoint reverse sweep.

    Returns (expectations (B, K), gradients (B, n_params)).
    """
    psi = forward_batched(circuit, theta, amps0.copy())
    exps = expectations_z_batched(psi, observables, circuit.n_qubits)
    grads = adjoint_backward(circuit, theta, psi, observables, upstream)
    return exps, grads


def grad_expectations(
    circuit: ParamCircuit, theta, input_state: Statevector, observables, upstream
) -> np.ndarray:
    """Adjoint gradient of sum_k upstream_k <Z_k> for a single input state."""
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (len(observables),):
        raise StructuralError("upstream length must match observables")
    _, grads = adjoint_grad_batched(
        circuit, theta, input_state.amplitudes[None, :], observables, upstream[None, :]
    )
    return grads[0]


# ---------------------------------------------------------------------------
# gradient oracles


def _cost(circuit, theta, amps0, observables, upstream) -> float:
    out = forward_batched(circuit, theta, amps0.copy())
    exps = expectations_z_batched(out, observables, circuit.n_qubits)
    return float(np.sum(exps[0] * upstream))


# four-term shift-rule coefficients for controlled rotations
_C1 = (np.sqrt(2.0) + 1.0) / (4.0 * np.sqrt(2.0))
_C2 = (np.sqrt(2.0) - 1.0) / (4.0 * np.sqrt(2.0))


def parameter_shift_grad(
    circuit: ParamCircuit, theta, input_state: Statevector, observables, upstream
) -> np.ndarray:
    """Exact gradient via angle-shifted circuit evaluations.

    Plain rotations use the two-term +-pi/2 rule; controlled rotations need
    the four-term rule.  Slots shared by several gates are handled by
    shifting one gate occurrence at a time.
    """
    theta = np.asarray(theta, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    amps0 = input_state.amplitudes[None, :]
    grad = np.zeros(circuit.n_params)

    for gi, gate in enumerate(circuit.gates):
        for j, slot in enumerate(gate.slots):

            def f(shift):
                angles = list(_resolve(gate, theta))
                angles[j] += shift
                amps = amps0.copy()
                for k, g in enumerate(circuit.gates):
                    a = tuple(angles) if k == gi else _resolve(g, theta)
                    amps = apply_gate_batched(amps, g, a, circuit.n_qubits)
                exps = expectations_z_batched(amps, observables, circuit.n_qubits)
                return float(np.sum(exps[0] * upstream))

            if gate.kind in CONTROLLED_KINDS:
                grad[slot] += _C1 * (f(np.pi / 2) - f(-np.pi / 2)) - _C2 * (
                    f(3 * np.pi / 2) - f(-3 * np.pi / 2)
                )
            else:
                grad[slot] += 0.5 * (f(np.pi / 2) - f(-np.pi / 2))
    return grad


def finite_diff_grad(
    circuit: ParamCircuit,
    theta,
    input_state: Statevector,
    observables,
    upstream,
    step: float = 1e-4,
) -> np.ndarray:
    """Central finite differences over the full parameter vector."""
    theta = np.asarray(theta, dtype=np.float64).copy()
    amps0 = input_state.amplitudes[None, :]
    grad = np.zeros(circuit.n_params)
    for i in range(circuit.n_params):
        theta[i] += step
        up = _cost(circuit, theta, amps0, observables, upstream)
        theta[i] -= 2 * step
        down = _cost(circuit, theta, amps0, observables, upstream)
        theta[i] += step
        grad[i] = (up - down) / (2 * step)
    return grad


# ---------------------------------------------------------------------------
# losses


def loss_and_grad(kind: str, predictions, targets) -> tuple[float, np.ndarray]:
    """MSE or BCE with the gradient w.r.t. the predictions."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise StructuralError(f"shape mismatch: {p.shape} vs {t.shape}")
    m = p.size
    if kind == "MSE":
        diff = p - t
        return float(np.mean(diff**2)), 2.0 * diff / m
    if kind == "BCE":
        pc = np.clip(p, 1e-7, 1.0 - 1e-7)
        loss = float(np.mean(-t * np.log(pc) - (1.0 - t) * np.log(1.0 - pc)))
        return loss, (-t / pc + (1.0 - t) / (1.0 - pc)) / m
    raise StructuralError(f"unknown loss kind {kind!r}")


# ---------------------------------------------------------------------------
# optimizer


class AdamState:
    """Standard Adam with bias correction."""

    def __init__(self, n_params: int, lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if params.shape != grad.shape or params.shape != self.m.shape:
            raise StructuralError("parameter/gradient length mismatch")
        if not np.all(np.isfinite(grad)):
            raise NumericError("non-finite gradient in Adam step")
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        out = params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        if not np.all(np.isfinite(out)):
            raise NumericError("non-finite parameters after Adam step")
        return out


def adam_step(state: AdamState, params, grad) -> np.ndarray:
    return state.step(np.asarray(params, dtype=np.float64), np.asarray(grad, dtype=np.float64))


def init_params(n_params: int, seed) -> np.ndarray:
    """Uniform samples in [0, 2*pi) from a seeded PRNG.

    ``seed`` is anything numpy's default_rng accepts (int or sequence).
    """
    if n_params < 1:
        raise StructuralError("n_params must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2.0 * np.pi, n_params)

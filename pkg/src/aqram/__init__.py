"""Approximate PQC-based QRAM: statevector simulator, circuit templates,
adjoint-differentiated training, and the binary-storage / digit-classification
experiment harnesses."""

from .config import TrainConfig
from .errors import (
    AqramError,
    ConfigurationError,
    DegenerateInputError,
    IngestionError,
    NumericError,
    StructuralError,
)
from .simulator import Gate, Statevector, apply_gate, expectation_z, init_zero, prob_one
from .circuits import (
    ParamCircuit,
    QramArchitectureSpec,
    amplitude_embed,
    angle_embed,
    basis_embed,
    build_qram_circuit,
    strongly_entangling_layers,
)
from .training import AdamState, grad_expectations, init_params, loss_and_grad, run_circuit

__all__ = [
    "AdamState",
    "AqramError",
    "ConfigurationError",
    "DegenerateInputError",
    "Gate",
    "IngestionError",
    "NumericError",
    "ParamCircuit",
    "QramArchitectureSpec",
    "Statevector",
    "StructuralError",
    "TrainConfig",
    "amplitude_embed",
    "angle_embed",
    "apply_gate",
    "basis_embed",
    "build_qram_circuit",
    "expectation_z",
    "grad_expectations",
    "init_params",
    "init_zero",
    "loss_and_grad",
    "prob_one",
    "run_circuit",
    "strongly_entangling_layers",
]

__version__ = "0.1.0"

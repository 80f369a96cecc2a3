"""Run configuration shared by the experiment modules and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigurationError


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 16
    learning_rate: float = 0.001
    seed: int = 0
    n_conv_layers: int = 1
    n_sel_layers: int = 3
    embedding: str = "basis"
    expansion_target: int = 512
    max_cluster_size: int = 16

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be > 0")
        if self.embedding not in ("basis", "angle"):
            raise ConfigurationError(f"unknown embedding {self.embedding!r}")
        if self.max_cluster_size < 2:
            raise ConfigurationError("max_cluster_size must be >= 2")

    def with_(self, **kwargs) -> "TrainConfig":
        return replace(self, **kwargs)

"""Exception hierarchy shared across the package."""


class AqramError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AqramError):
    """Invalid run configuration (bad qubit count, bad hyperparameter, ...)."""


class StructuralError(AqramError):
    """Malformed circuit or data structure (bad target index, length mismatch)."""


class DegenerateInputError(AqramError):
    """Input that cannot be embedded (e.g. an all-zero amplitude vector)."""


class NumericError(AqramError):
    """Non-finite values encountered during optimization."""


class IngestionError(AqramError):
    """Dataset file missing or malformed."""

"""Shared exception types."""


class TrainingDivergedError(RuntimeError):
    """Non-finite weights appeared during training (learning rate too large)."""


class DatasetFormatError(ValueError):
    """A dataset file could not be parsed; the message names the offending line."""

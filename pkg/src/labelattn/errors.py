"""Exception hierarchy shared across the package."""


class LabelAttnError(Exception):
    """Base class for package errors."""


class ShapeError(LabelAttnError):
    """Operand shapes are incompatible."""


class DataError(LabelAttnError):
    """Malformed input data (dataset rows, embedding files, checkpoints)."""


class ConfigError(LabelAttnError):
    """Invalid configuration or command-line usage."""

class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SeqlenRangeError(ValueError):
    """Sequence length outside the model's supported range."""


class ScaleError(ValueError):
    """Operand or array size beyond what the reference simulator accepts."""


class ConfigError(ValueError):
    """Malformed or unknown model/hardware configuration."""

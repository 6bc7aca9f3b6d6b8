"""Evaluation and learning with multiple inaccurate true targets (MIATTs)."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    EvalConfig,
    MiattError,
    MiattSet,
    clamp_unit,
    soft_target,
    validate_miatt_set,
)

__all__ = [
    "EvalConfig",
    "MiattError",
    "MiattSet",
    "clamp_unit",
    "soft_target",
    "validate_miatt_set",
]

"""Shared types, validation and numeric guards.

Every vector in this package (a prediction, one inaccurate target, the
accurate target used for testing, the probable/mean target) is a
``SoftTarget``: a read-only 1-D float64 array with entries in [0, 1].
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

import numpy as np

SoftTarget = np.ndarray

TERNARY_LEVELS = (0.0, 0.5, 1.0)


class MiattError(ValueError):
    """Base class for domain errors raised by this package."""


class DimensionMismatch(MiattError):
    pass


class TooFewTargets(MiattError):
    pass


class OutOfRange(MiattError):
    pass


class BadWeights(MiattError):
    pass


class ConfigError(MiattError):
    pass


class EmptyDataset(MiattError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def soft_target(values: Any) -> SoftTarget:
    """Validate ``values`` as a SoftTarget and return a read-only copy."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {arr.shape}")
    if arr.size < 1:
        raise DimensionMismatch("a target needs at least one element")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise OutOfRange("target elements must lie in [0, 1]")
    return _frozen(arr)


@dataclass(frozen=True, eq=False)
class MiattSet:
    """N >= 2 inaccurate true targets of a common length m.

    ``targets`` is stored as a read-only (N, m) array. ``weights``, when
    present, are per-target reliability weights summing to one.
    """

    targets: np.ndarray
    weights: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.targets.shape[0]

    @property
    def m(self) -> int:
        return self.targets.shape[1]

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.targets)

    def __getitem__(self, i):
        return self.targets[i]


def validate_miatt_set(
    targets: Sequence[Any], weights: Optional[Sequence[float]] = None
) -> MiattSet:
    """Build a :class:`MiattSet` from raw vectors, checking every invariant.

    Raises
    ------
    TooFewTargets
        Fewer than two targets.
    DimensionMismatch
        Targets of unequal length (or not 1-D).
    OutOfRange
        An element outside [0, 1].
    BadWeights
        Weights of the wrong count, negative, or not summing to one.
    """
    if isinstance(targets, np.ndarray) and targets.ndim == 2:
        rows = [soft_target(row) for row in targets]
    else:
        rows = [soft_target(t) for t in targets]
    if len(rows) < 2:
        raise TooFewTargets(f"a MIATT set needs N >= 2 targets, got {len(rows)}")
    m = rows[0].size
    for k, row in enumerate(rows):
        if row.size != m:
            raise DimensionMismatch(f"target {k} has length {row.size}, expected {m}")
    stacked = _frozen(np.vstack(rows))

    w = None
    if weights is not None:
        w = np.array(weights, dtype=np.float64)
        if w.shape != (len(rows),):
            raise BadWeights(f"expected {len(rows)} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise BadWeights("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise BadWeights(f"weights must sum to 1, got {w.sum()!r}")
        w = _frozen(w)
    return MiattSet(stacked, w)


def clamp_unit(x, eps_clamp: float):
    """Clamp into ``[eps_clamp, 1 - eps_clamp]``; works on scalars and arrays."""
    if isinstance(x, np.ndarray):
        return np.clip(x, eps_clamp, 1.0 - eps_clamp)
    return min(max(float(x), eps_clamp), 1.0 - eps_clamp)


# config keys as they appear in JSON files -> dataclass attribute
_CONFIG_KEYS = {
    "delta": "delta",
    "delta_lo": "delta_lo",
    "delta_hi": "delta_hi",
    "tau_lo": "tau_lo",
    "tau_hi": "tau_hi",
    "alpha": "alpha",
    "gamma_q": "gamma_q",
    "lambda": "lam",
    "gamma_k": "gamma_k",
    "eps_clamp": "eps_clamp",
    "seed": "seed",
}


@dataclass(frozen=True)
class EvalConfig:
    """Thresholds and weights shared by assessment, evaluation and losses.

    ``delta``            agreement threshold for the Boolean agreement vectors
    ``delta_lo/hi``      confidence cutoffs turning target values into facts
    ``tau_lo/hi``        cutoffs turning prediction values into verdicts
    ``alpha, gamma_q``   coverage and redundancy weights of the quality score
    ``lam, gamma_k``     strict-vs-any mix and contradiction penalty of the
                         sample score (JSON key ``lambda`` for ``lam``)
    ``eps_clamp``        guard against log(0) and 0/0
    """

    delta: float = 0.25
    delta_lo: float = 0.25
    delta_hi: float = 0.75
    tau_lo: float = 0.25
    tau_hi: float = 0.75
    alpha: float = 1.0
    gamma_q: float = 1.0
    lam: float = 0.5
    gamma_k: float = 0.5
    eps_clamp: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "seed":
                if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < 2**64:
                    raise ConfigError(f"seed must be an unsigned 64-bit integer, got {v!r}")
            elif isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{f.name} must be a finite real, got {v!r}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if not 0.0 <= self.delta_lo < self.delta_hi <= 1.0:
            raise ConfigError("need 0 <= delta_lo < delta_hi <= 1")
        if not 0.0 <= self.tau_lo < self.tau_hi <= 1.0:
            raise ConfigError("need 0 <= tau_lo < tau_hi <= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError("lambda must lie in [0, 1]")
        if not 0.0 <= self.gamma_k <= 1.0:
            raise ConfigError("gamma_k must lie in [0, 1]")
        if self.alpha < 0 or self.gamma_q < 0:
            raise ConfigError("alpha and gamma_q must be non-negative")
        if not 0.0 < self.eps_clamp < 1e-3:
            raise ConfigError("eps_clamp must lie in (0, 1e-3)")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvalConfig":
        unknown = set(data) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {_CONFIG_KEYS[k]: v for k, v in data.items()}
        if "seed" in kwargs and isinstance(kwargs["seed"], float) and kwargs["seed"].is_integer():
            kwargs["seed"] = int(kwargs["seed"])
        for k, v in kwargs.items():
            if k != "seed" and isinstance(v, int) and not isinstance(v, bool):
                kwargs[k] = float(v)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for key, attr in _CONFIG_KEYS.items()}

    def replace(self, **changes) -> "EvalConfig":
        return dataclasses.replace(self, **changes)

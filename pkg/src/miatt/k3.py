"""Kleene strong three-valued connectives over the unit interval.

Conjunction and disjunction are the Goedel t-norm/t-conorm (min/max), so
they stay closed on {0, 0.5, 1} and extend to [0, 1] unchanged. All
connectives accept scalars or numpy arrays.
"""

import numpy as np

from .core import OutOfRange

UNKNOWN = 0.5


def neg(a):
    return 1.0 - a


def conj(a, b):
    return np.minimum(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else min(a, b)


def disj(a, b):
    return np.maximum(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else max(a, b)


def implies(a, b):
    """Kleene-Dienes implication ``max(1 - a, b)``."""
    return disj(neg(a), b)


def noisy_or(values) -> float:
    """Probabilistic disjunction ``1 - prod(1 - s)``; 0 for an empty input."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        return 0.0
    if not np.all(np.isfinite(v)) or v.min() < 0.0 or v.max() > 1.0:
        raise OutOfRange("noisy_or arguments must lie in [0, 1]")
    return float(1.0 - np.prod(1.0 - v))

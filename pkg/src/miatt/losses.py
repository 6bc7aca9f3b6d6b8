"""Multi-target Dice and cross-entropy: per-target (A) versus aggregate-first (B).

Method A averages the per-target score, ``S_A = mean_n f(p, t_n)``;
Method B scores the averaged target, ``S_B = f(p, mean_n t_n)``. For the
pixelwise Dice ``2pt / (p^2 + t^2)`` the two differ by a Jensen gap whose
sign is fixed by where the targets sit relative to ``sqrt(3) * p``. Binary
and categorical cross-entropy are affine in the target, so A and B agree.

Scalar functions broadcast over numpy arrays. Vector samples are handled
as the mean of per-element scalar values (not the set-overlap Dice).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import MiattError, OutOfRange, TooFewTargets, clamp_unit

SQRT3 = math.sqrt(3.0)
DICE_EPS = 1e-7
CE_EPS = 1e-12


class DomainViolation(MiattError):
    pass


class NotADistribution(MiattError):
    pass


class Region(str, enum.Enum):
    CONCAVE = "Concave"
    CONVEX = "Convex"
    MIXED = "Mixed"
    DEGENERATE = "Degenerate"
    AFFINE = "Affine"


class Ordering(str, enum.Enum):
    B_GE_A = "B_ge_A"
    B_LE_A = "B_le_A"
    NO_ORDERING = "NoOrdering"
    EQUAL = "Equal"


_ORDER_BY_REGION = {
    Region.CONCAVE: Ordering.B_GE_A,
    Region.CONVEX: Ordering.B_LE_A,
    Region.MIXED: Ordering.NO_ORDERING,
    Region.DEGENERATE: Ordering.EQUAL,
    Region.AFFINE: Ordering.EQUAL,
}


@dataclass(frozen=True)
class MethodScores:
    s_a: float
    s_b: float
    grad_a: float
    grad_b: float
    region: Region
    ordering_verdict: Ordering

    @property
    def residue(self) -> float:
        return abs(self.s_a - self.s_b)

    def to_row(self) -> dict:
        return {
            "s_a": self.s_a,
            "s_b": self.s_b,
            "grad_a": self.grad_a,
            "grad_b": self.grad_b,
            "region": self.region.value,
            "ordering_verdict": self.ordering_verdict.value,
            "residue": self.residue,
        }


def _targets(targets) -> np.ndarray:
    t = np.asarray(targets, dtype=np.float64)
    if t.shape[0] < 2:
        raise TooFewTargets("Method A/B comparison needs N >= 2 targets")
    return t


def _weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise OutOfRange("weights must be n non-negative values summing to 1")
    return w


def _mean(values: np.ndarray, w: Optional[np.ndarray]) -> np.ndarray:
    # plain mean when unweighted keeps A/B rounding symmetric
    if w is None:
        return values.mean(axis=0)
    return np.tensordot(w, values, axes=1)


# ---------------------------------------------------------------- Dice


def dice(pred, target, eps_clamp: float = DICE_EPS):
    p = clamp_unit(np.asarray(pred, dtype=np.float64), eps_clamp)
    t = np.asarray(target, dtype=np.float64)
    out = 2.0 * p * t / (p * p + t * t)
    return float(out) if out.ndim == 0 else out


def dice_second_derivative(pred, target):
    """Second derivative of Dice with respect to the target."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    out = 4.0 * p * t * (t * t - 3.0 * p * p) / (p * p + t * t) ** 3
    return float(out) if out.ndim == 0 else out


def dice_gradient(pred, target, eps_clamp: float = DICE_EPS):
    """Derivative of Dice with respect to the prediction."""
    p = clamp_unit(np.asarray(pred, dtype=np.float64), eps_clamp)
    t = np.asarray(target, dtype=np.float64)
    out = 2.0 * t * (t * t - p * p) / (p * p + t * t) ** 2
    return float(out) if out.ndim == 0 else out


def dice_region(pred: float, targets) -> Region:
    t = np.asarray(targets, dtype=np.float64)
    if np.all(t == t[0]):
        return Region.DEGENERATE
    threshold = SQRT3 * pred
    if np.all(t < threshold):
        return Region.CONCAVE
    if np.all(t > threshold):
        return Region.CONVEX
    return Region.MIXED


def method_gradients_dice(pred: float, targets, weights=None, eps_clamp: float = DICE_EPS) -> tuple[float, float]:
    t = _targets(targets)
    w = None if weights is None else _weights(weights, t.shape[0])
    grad_a = float(_mean(dice_gradient(pred, t, eps_clamp), w))
    grad_b = float(dice_gradient(pred, _mean(t, w), eps_clamp))
    return grad_a, grad_b


def dice_method_scores(pred: float, targets, eps_clamp: float = DICE_EPS, weights=None) -> MethodScores:
    """Method A/B Dice scores, gradients and the Jensen verdict.

    The verdict follows from region membership alone; comparing ``s_a`` and
    ``s_b`` is left to callers as a check of it.
    """
    t = _targets(targets)
    w = None if weights is None else _weights(weights, t.shape[0])
    s_a = float(_mean(dice(pred, t, eps_clamp), w))
    s_b = float(dice(pred, _mean(t, w), eps_clamp))
    grad_a, grad_b = method_gradients_dice(pred, t, weights, eps_clamp)
    region = dice_region(pred, t)
    return MethodScores(s_a, s_b, grad_a, grad_b, region, _ORDER_BY_REGION[region])


def composite_loss(s_a: float, s_b: float, lam: float) -> float:
    if not 0.0 <= lam <= 1.0:
        raise OutOfRange(f"lambda must lie in [0, 1], got {lam}")
    return lam * (1.0 - s_a) + (1.0 - lam) * (1.0 - s_b)


def composite_dice_loss(pred: float, targets, lam: float, eps_clamp: float = DICE_EPS) -> float:
    """``lam * (1 - S_A) + (1 - lam) * (1 - S_B)``."""
    if not 0.0 <= lam <= 1.0:
        raise OutOfRange(f"lambda must lie in [0, 1], got {lam}")
    ms = dice_method_scores(pred, targets, eps_clamp)
    return composite_loss(ms.s_a, ms.s_b, lam)


def second_derivative_root(pred: float, method: str = "analytic", h: float = 1e-4) -> float:
    """Target value where Dice switches from concave to convex for ``pred``.

    ``method="analytic"`` brackets the sign change of the closed-form second
    derivative; ``method="fd"`` does the same with a central second
    difference of :func:`dice` and never touches the closed form.
    """
    if method == "analytic":
        f = lambda t: dice_second_derivative(pred, t)
    elif method == "fd":
        f = lambda t: (dice(pred, t + h) - 2.0 * dice(pred, t) + dice(pred, t - h)) / (h * h)
    else:
        raise ValueError(f"unknown method {method!r}")
    lo, hi = 0.5 * SQRT3 * pred, min(2.0 * SQRT3 * pred, 1.0 - 2 * h)
    if not f(lo) < 0.0 < f(hi):
        raise DomainViolation(f"no sign change of the second derivative in [{lo}, {hi}]")
    return brentq(f, lo, hi, xtol=1e-14, rtol=1e-14)


# ------------------------------------------------------- cross-entropy


def ce(pred, target, eps_clamp: float = CE_EPS):
    p = clamp_unit(np.asarray(pred, dtype=np.float64), eps_clamp)
    t = np.asarray(target, dtype=np.float64)
    out = -(t * np.log(p) + (1.0 - t) * np.log1p(-p))
    return float(out) if out.ndim == 0 else out


def ce_gradient(pred, target, eps_clamp: float = CE_EPS):
    """Derivative of binary CE with respect to the prediction."""
    p = clamp_unit(np.asarray(pred, dtype=np.float64), eps_clamp)
    t = np.asarray(target, dtype=np.float64)
    out = (p - t) / (p * (1.0 - p))
    return float(out) if out.ndim == 0 else out


def _ce_region(t: np.ndarray) -> Region:
    return Region.DEGENERATE if np.all(t == t[0]) else Region.AFFINE


def ce_method_scores(pred: float, targets, eps_clamp: float = CE_EPS, weights=None) -> MethodScores:
    t = _targets(targets)
    w = None if weights is None else _weights(weights, t.shape[0])
    s_a = float(_mean(ce(pred, t, eps_clamp), w))
    s_b = float(ce(pred, _mean(t, w), eps_clamp))
    grad_a = float(_mean(ce_gradient(pred, t, eps_clamp), w))
    grad_b = float(ce_gradient(pred, _mean(t, w), eps_clamp))
    return MethodScores(s_a, s_b, grad_a, grad_b, _ce_region(t), Ordering.EQUAL)


def _distribution(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.ndim < 1 or np.any(a < 0) or np.any(np.abs(a.sum(axis=-1) - 1.0) > 1e-9):
        raise NotADistribution(f"{name} must be non-negative and sum to 1")
    return a


def categorical_ce(pred, target, eps_clamp: float = CE_EPS) -> float:
    p = _distribution(pred, "prediction")
    t = _distribution(target, "target")
    if p.shape[-1] != t.shape[-1]:
        raise NotADistribution("prediction and target have different class counts")
    out = -(t * np.log(np.clip(p, eps_clamp, 1.0))).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def categorical_ce_gradient(pred, target, eps_clamp: float = CE_EPS) -> np.ndarray:
    """Gradient of categorical CE with respect to the class probabilities."""
    p = np.clip(_distribution(pred, "prediction"), eps_clamp, 1.0)
    t = _distribution(target, "target")
    return -t / p


@dataclass(frozen=True)
class CategoricalScores:
    s_a: float
    s_b: float
    grad_a: np.ndarray
    grad_b: np.ndarray

    @property
    def residue(self) -> float:
        return abs(self.s_a - self.s_b)


def categorical_method_scores(pred, targets, eps_clamp: float = CE_EPS, weights=None) -> CategoricalScores:
    t = _targets(_distribution(targets, "targets"))
    w = None if weights is None else _weights(weights, t.shape[0])
    t_bar = _mean(t, w)
    return CategoricalScores(
        float(_mean(categorical_ce(pred, t, eps_clamp), w)),
        float(categorical_ce(pred, t_bar, eps_clamp)),
        _mean(categorical_ce_gradient(pred, t, eps_clamp), w),
        categorical_ce_gradient(pred, t_bar, eps_clamp),
    )


# ------------------------------------------------------ vector samples


def vector_method_scores(loss: str, pred, targets, eps_clamp: Optional[float] = None) -> dict:
    """Elementwise Method A/B for a vector prediction and an (N, m) target set.

    Returns the element-averaged ``s_a`` / ``s_b``, per-element gradients and
    region counts.
    """
    p = np.asarray(pred, dtype=np.float64)
    t = _targets(targets)
    if t.ndim != 2 or t.shape[1] != p.size:
        raise OutOfRange("targets must have shape (N, m) matching the prediction")
    if loss == "dice":
        eps = DICE_EPS if eps_clamp is None else eps_clamp
        f, g = dice, dice_gradient
    elif loss == "ce":
        eps = CE_EPS if eps_clamp is None else eps_clamp
        f, g = ce, ce_gradient
    else:
        raise ValueError(f"unknown loss {loss!r}")
    t_bar = t.mean(axis=0)
    a_elem = f(p, t, eps).mean(axis=0)
    b_elem = f(p, t_bar, eps)
    grad_a = g(p, t, eps).mean(axis=0)
    grad_b = g(p, t_bar, eps)
    if loss == "dice":
        regions = [dice_region(float(p[e]), t[:, e]) for e in range(p.size)]
    else:
        regions = [_ce_region(t[:, e]) for e in range(p.size)]
    counts = {r.value: 0 for r in Region}
    for r in regions:
        counts[r.value] += 1
    return {
        "s_a": float(a_elem.mean()),
        "s_b": float(b_elem.mean()),
        "grad_a": grad_a,
        "grad_b": grad_b,
        "regions": regions,
        "region_counts": counts,
    }


# ----------------------------------------------------- gradient oracle


def finite_diff_gradient(f: Callable[[float], float], x: float, h: float = 1e-5, domain=(-math.inf, math.inf)) -> float:
    """Central difference ``(f(x + h) - f(x - h)) / 2h``."""
    if not h > 0:
        raise DomainViolation(f"step must be positive, got {h}")
    lo, hi = domain
    if not (lo < x - h and x + h < hi):
        raise DomainViolation(f"x +- h = [{x - h}, {x + h}] leaves the domain ({lo}, {hi})")
    return (f(x + h) - f(x - h)) / (2.0 * h)


@dataclass(frozen=True)
class GradCheckReport:
    analytic: float
    finite_diff: float
    rel_error: float
    h: float

    def to_row(self) -> dict:
        return {"analytic": self.analytic, "finite_diff": self.finite_diff, "rel_error": self.rel_error, "h": self.h}


def gradcheck(f: Callable[[float], float], analytic: float, x: float, h: float = 1e-5, domain=(0.0, 1.0)) -> GradCheckReport:
    fd = finite_diff_gradient(f, x, h, domain)
    return GradCheckReport(analytic, fd, abs(analytic - fd) / max(1.0, abs(analytic)), h)


def method_gradchecks(loss: str, pred: float, targets: Sequence[float], h: float = 1e-5) -> dict:
    """Check both methods' analytic gradients against central differences."""
    t = np.asarray(targets, dtype=np.float64)
    if loss == "dice":
        scores = lambda x: dice_method_scores(x, t)
    elif loss == "ce":
        scores = lambda x: ce_method_scores(x, t)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    ms = scores(pred)
    return {
        "A": gradcheck(lambda x: scores(x).s_a, ms.grad_a, pred, h),
        "B": gradcheck(lambda x: scores(x).s_b, ms.grad_b, pred, h),
    }

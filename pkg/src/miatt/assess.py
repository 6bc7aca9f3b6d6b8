"""Quality assessment of a MIATT set.

Pipeline: probable target (elementwise mean) -> Boolean agreement vectors
-> per-target partial representation -> pairwise redundancy -> quality
score ``alpha * mean_pr - gamma_q * redundancy``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DimensionMismatch,
    EvalConfig,
    MiattSet,
    OutOfRange,
    SoftTarget,
    TooFewTargets,
    soft_target,
)


class QualityClass(str, enum.Enum):
    WORST = "Worst"
    MEDIAN = "Median"
    BEST = "Best"


@dataclass(frozen=True)
class AssessmentReport:
    probable_target: SoftTarget = field(repr=False)
    per_iatt_pr: tuple
    mean_pr: float
    redundancy: float
    diversity: float
    q_score: float
    quality_class: QualityClass

    def to_row(self) -> dict:
        return {
            "per_iatt_pr": list(self.per_iatt_pr),
            "mean_pr": self.mean_pr,
            "redundancy": self.redundancy,
            "diversity": self.diversity,
            "q_score": self.q_score,
            "quality_class": self.quality_class.value,
        }


def probable_true_target(miatts: MiattSet) -> SoftTarget:
    return soft_target(miatts.targets.mean(axis=0))


def boolean_vector(iatt, probable, delta: float) -> np.ndarray:
    """Bit ``i`` is 1 iff ``|iatt[i] - probable[i]| < delta`` (strict)."""
    a = np.asarray(iatt, dtype=np.float64)
    b = np.asarray(probable, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"length {a.shape} vs {b.shape}")
    return (np.abs(a - b) < delta).astype(np.int8)


def partial_representation(v) -> float:
    v = np.asarray(v)
    if v.size < 1:
        raise DimensionMismatch("empty Boolean vector")
    return float(v.sum() / v.size)


def redundancy(vs) -> float:
    """Sum of pairwise intersection sizes over the total number of set bits.

    Not clamped: for four or more heavily overlapping vectors the ratio
    exceeds 1. Returns 0 when no bit is set anywhere.
    """
    vs = [np.asarray(v, dtype=np.int64) for v in vs]
    if len(vs) < 2:
        raise TooFewTargets("redundancy needs at least two vectors")
    if len({v.shape for v in vs}) != 1:
        raise DimensionMismatch("Boolean vectors differ in length")
    mat = np.vstack(vs)
    denom = int(mat.sum())
    if denom == 0:
        return 0.0
    col = mat.sum(axis=0)
    # sum_{j<k} |v_j & v_k| == sum_i C(col_i, 2)
    numer = int((col * (col - 1) // 2).sum())
    return numer / denom


def q_score(mean_pr: float, redundancy_value: float, alpha: float = 1.0, gamma_q: float = 1.0) -> float:
    return alpha * mean_pr - gamma_q * redundancy_value


def classify_quality(mean_pr: float, diversity: float) -> QualityClass:
    """Nearest Table-style corner on the coverage axis; ties go to the lower class.

    ``diversity`` is validated but does not move the label: only the
    diagonal cells of the coverage/diversity grid carry names.
    """
    for name, v in (("mean_pr", mean_pr), ("diversity", diversity)):
        if not 0.0 <= v <= 1.0:
            raise OutOfRange(f"{name} must lie in [0, 1], got {v}")
    corners = (QualityClass.WORST, QualityClass.MEDIAN, QualityClass.BEST)
    dist = [abs(mean_pr - c) for c in (0.0, 0.5, 1.0)]
    return corners[int(np.argmin(dist))]


def quality_score(miatts: MiattSet, config: EvalConfig = EvalConfig()) -> AssessmentReport:
    probable = probable_true_target(miatts)
    vs = [boolean_vector(t, probable, config.delta) for t in miatts.targets]
    prs = tuple(partial_representation(v) for v in vs)
    mean_pr = float(np.mean(prs))
    red = redundancy(vs)
    diversity = max(0.0, 1.0 - red)
    return AssessmentReport(
        probable_target=probable,
        per_iatt_pr=prs,
        mean_pr=mean_pr,
        redundancy=red,
        diversity=diversity,
        q_score=q_score(mean_pr, red, config.alpha, config.gamma_q),
        quality_class=classify_quality(mean_pr, diversity),
    )

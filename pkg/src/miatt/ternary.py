"""Ternary target synthesis, its scoring, the ATT baseline and their relation.

Each inaccurate target gives the prediction one verdict in {0, 0.5, 1}
(min over its fact verdicts). The synthesized target is 1 when every
verdict is 1, 0 when every verdict is 0 and 0.5 otherwise; the sample
score is that value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    DimensionMismatch,
    EmptyDataset,
    EvalConfig,
    MiattError,
    MiattSet,
    TooFewTargets,
    soft_target,
)
from .laf import evaluate_sample, extract_facts, fact_truth, satisfaction


class AttNotConfident(MiattError):
    pass


class MissingAtt(MiattError):
    pass


def synthesize_ternary(verdicts, axis: int = -1):
    """Fuse per-target verdicts along ``axis``.

    A 1-D input returns a float; higher-rank inputs are reduced along
    ``axis`` and return an array.
    """
    v = np.asarray(verdicts, dtype=np.float64)
    if v.shape[axis] < 2:
        raise TooFewTargets("ternary synthesis needs verdicts from N >= 2 targets")
    out = np.where(np.all(v == 1.0, axis=axis), 1.0, np.where(np.all(v == 0.0, axis=axis), 0.0, 0.5))
    return float(out) if out.ndim == 0 else out


def per_iatt_verdict(prediction, iatt, config: EvalConfig = EvalConfig()) -> float:
    pred = np.asarray(prediction, dtype=np.float64)
    target = np.asarray(iatt, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionMismatch(f"length {pred.shape} vs {target.shape}")
    elements, polarity = extract_facts(target, config)
    return satisfaction(fact_truth(pred[elements], polarity, config))


def ternary_verdicts(prediction, miatts: MiattSet, config: EvalConfig = EvalConfig()) -> list[float]:
    return [per_iatt_verdict(prediction, t, config) for t in miatts.targets]


def ternary_sample_score(t_dagger: float) -> float:
    if t_dagger not in (0.0, 0.5, 1.0):
        raise ValueError(f"not a ternary value: {t_dagger!r}")
    return float(t_dagger)


def ternary_dataset_score(scores: Sequence[float]) -> float:
    if len(scores) == 0:
        raise EmptyDataset("no samples to aggregate")
    return float(np.mean(scores))


def check_att_confident(att, config: EvalConfig) -> None:
    a = np.asarray(att, dtype=np.float64)
    if not np.all((a <= config.delta_lo) | (a >= config.delta_hi)):
        raise AttNotConfident("every ATT element must be <= delta_lo or >= delta_hi")


def att_score(prediction, att, config: EvalConfig = EvalConfig()) -> float:
    """1 if the prediction satisfies every fact of the ATT, else 0."""
    check_att_confident(att, config)
    return 1.0 if per_iatt_verdict(prediction, att, config) == 1.0 else 0.0


@dataclass(frozen=True)
class RelationReport:
    n_samples: int
    ternary_decided: int
    ternary_unknown: int
    decided_agree_att: int
    laf_vs_att_mean_abs_dev: float
    mean_laf_score: float
    mean_ternary_score: float
    mean_att_score: float

    @property
    def decided_disagree_att(self) -> int:
        return self.ternary_decided - self.decided_agree_att

    def summary(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "ternary_decided": self.ternary_decided,
            "ternary_unknown": self.ternary_unknown,
            "decided_agree_att": self.decided_agree_att,
            "decided_disagree_att": self.decided_disagree_att,
            "laf_vs_att_mean_abs_dev": self.laf_vs_att_mean_abs_dev,
            "mean_laf_score": self.mean_laf_score,
            "mean_ternary_score": self.mean_ternary_score,
            "mean_att_score": self.mean_att_score,
        }


@dataclass(frozen=True)
class ComparisonRow:
    laf_score: float
    t_dagger: float
    att_score: float


def compare_sample(prediction, miatts: MiattSet, att, config: EvalConfig = EvalConfig(), exclusive_groups=None) -> ComparisonRow:
    if att is None:
        raise MissingAtt("comparison needs the accurate target")
    pred = soft_target(prediction)
    laf = evaluate_sample(pred, miatts, config, exclusive_groups).score
    t_dag = synthesize_ternary(ternary_verdicts(pred, miatts, config))
    return ComparisonRow(laf, t_dag, att_score(pred, att, config))


def relation_report(rows: Sequence[ComparisonRow]) -> RelationReport:
    if not rows:
        raise EmptyDataset("no samples to compare")
    t = np.array([r.t_dagger for r in rows])
    a = np.array([r.att_score for r in rows])
    laf = np.array([r.laf_score for r in rows])
    decided = t != 0.5
    return RelationReport(
        n_samples=len(rows),
        ternary_decided=int(decided.sum()),
        ternary_unknown=int((~decided).sum()),
        decided_agree_att=int(np.sum(decided & (t == a))),
        laf_vs_att_mean_abs_dev=float(np.mean(np.abs(laf - a))),
        mean_laf_score=float(laf.mean()),
        mean_ternary_score=float(t.mean()),
        mean_att_score=float(a.mean()),
    )


def relation_report_for(
    samples: Sequence[tuple], config: EvalConfig = EvalConfig()
) -> RelationReport:
    """Convenience wrapper over ``(prediction, miatts, att[, groups])`` tuples."""
    rows = []
    for item in samples:
        pred, miatts, att = item[:3]
        groups: Optional[list] = item[3] if len(item) > 3 else None
        rows.append(compare_sample(pred, miatts, att, config, groups))
    return relation_report(rows)

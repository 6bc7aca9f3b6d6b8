"""Logic-based evaluation of a prediction against the original MIATTs.

Facts are per-element polarity assertions. A target value ``>= delta_hi``
asserts "element is positive", a value ``<= delta_lo`` asserts "element is
negative", anything in between asserts nothing. A fact's verdict on a
prediction is 1 (satisfied), 0 (violated) or 0.5 (prediction undecided),
using the closed cutoffs ``tau_lo`` / ``tau_hi``.

Per target ``n``: ``S_n`` is the min over its fact verdicts, ``C_n`` the
fraction of decidable verdicts. Across targets: max and Noisy-OR of the
``S_n``, mean of the ``C_n``, and the fraction of declared mutually
exclusive fact pairs that are both satisfied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import k3
from .core import (
    DimensionMismatch,
    EmptyDataset,
    EvalConfig,
    MiattError,
    MiattSet,
    soft_target,
)

POSITIVE = 1
NEGATIVE = -1


class BadGroup(MiattError):
    pass


def extract_facts(target, config: EvalConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(elements, polarities)`` of the facts asserted by ``target``."""
    t = np.asarray(target, dtype=np.float64)
    pos = t >= config.delta_hi
    neg = t <= config.delta_lo
    elements = np.flatnonzero(pos | neg)
    polarity = np.where(pos[elements], POSITIVE, NEGATIVE).astype(np.int8)
    return elements, polarity


def fact_truth(pred_values, polarity, config: EvalConfig) -> np.ndarray:
    """Ternary verdicts of facts with the given polarity on prediction values."""
    p = np.asarray(pred_values, dtype=np.float64)
    hi = p >= config.tau_hi
    lo = p <= config.tau_lo
    is_pos = np.asarray(polarity) == POSITIVE
    yes = np.where(is_pos, hi, lo)
    no = np.where(is_pos, lo, hi)
    return np.where(yes, 1.0, np.where(no, 0.0, 0.5))


@dataclass(frozen=True, eq=False)
class FactVerdicts:
    """All facts of one sample, flattened in target order.

    ``fact_index[f] = (target n, element e, polarity)``; ``exclusions`` holds
    pairs of flat fact indices that cannot both hold.
    """

    verdicts: np.ndarray
    fact_index: np.ndarray
    exclusions: np.ndarray
    n_iatts: int

    @property
    def per_iatt(self) -> list[np.ndarray]:
        owner = self.fact_index[:, 0]
        return [self.verdicts[owner == n] for n in range(self.n_iatts)]


def _exclusion_pairs(fact_index: np.ndarray, groups, m: int) -> np.ndarray:
    pairs = []
    positive = fact_index[:, 2] == POSITIVE
    for g in groups:
        g = np.asarray(list(g), dtype=np.int64)
        if g.size and (g.min() < 0 or g.max() >= m):
            raise BadGroup(f"group {g.tolist()} references an element outside [0, {m})")
        members = np.flatnonzero(positive & np.isin(fact_index[:, 1], g))
        if members.size < 2:
            continue
        a, b = np.triu_indices(members.size, k=1)
        a, b = members[a], members[b]
        keep = fact_index[a, 1] != fact_index[b, 1]
        pairs.append(np.column_stack([a[keep], b[keep]]))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    return np.unique(np.vstack(pairs), axis=0)


def extract_fact_verdicts(
    prediction,
    miatts: MiattSet,
    config: EvalConfig = EvalConfig(),
    exclusive_groups: Optional[Sequence[Sequence[int]]] = None,
) -> FactVerdicts:
    pred = soft_target(prediction)
    if pred.size != miatts.m:
        raise DimensionMismatch(f"prediction length {pred.size} != target length {miatts.m}")
    rows, verdicts = [], []
    for n, target in enumerate(miatts.targets):
        elements, polarity = extract_facts(target, config)
        rows.append(np.column_stack([np.full(elements.size, n), elements, polarity]))
        verdicts.append(fact_truth(pred[elements], polarity, config))
    fact_index = np.vstack(rows).astype(np.int64)
    exclusions = _exclusion_pairs(fact_index, exclusive_groups or [], miatts.m)
    return FactVerdicts(np.concatenate(verdicts), fact_index, exclusions, miatts.n)


def satisfaction(facts, weights=None) -> float:
    """Min over fact verdicts; 0.5 when the target asserts nothing.

    With ``weights`` (one per fact, in [0, 1]) the weighted minimum
    ``min max(v, 1 - w)`` is used; unit weights recover the plain min.
    """
    v = np.asarray(facts, dtype=np.float64)
    if v.size == 0:
        return 0.5
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != v.shape:
            raise DimensionMismatch("one weight per fact required")
        v = np.maximum(v, 1.0 - w)
    return float(v.min())


def applicability(facts) -> float:
    v = np.asarray(facts, dtype=np.float64)
    if v.size == 0:
        return 0.0
    return float(np.count_nonzero(v != 0.5) / v.size)


def contradiction_rate(verdicts: FactVerdicts, threshold: float = 1.0) -> float:
    """Fraction of exclusive pairs whose verdicts both reach ``threshold``."""
    if verdicts.exclusions.shape[0] == 0:
        return 0.0
    v = verdicts.verdicts[verdicts.exclusions]
    return float(np.mean(np.all(v >= threshold, axis=1)))


@dataclass(frozen=True)
class SampleScore:
    s_per_iatt: tuple
    c_per_iatt: tuple
    s_max: float
    s_noisy_or: float
    c_overall: float
    k_rate: float
    score: float

    def to_row(self) -> dict:
        return {
            "s_per_iatt": list(self.s_per_iatt),
            "c_per_iatt": list(self.c_per_iatt),
            "s_max": self.s_max,
            "s_noisy_or": self.s_noisy_or,
            "c_overall": self.c_overall,
            "k_rate": self.k_rate,
            "score": self.score,
        }


def combine_sample(s_per_iatt, c_per_iatt, k_rate: float, lam: float, gamma_k: float) -> SampleScore:
    """Final sample score from per-target satisfaction and coverage values."""
    s = tuple(float(x) for x in s_per_iatt)
    c = tuple(float(x) for x in c_per_iatt)
    s_max = max(s)
    s_nor = k3.noisy_or(s)
    c_all = float(np.mean(c))
    mix = lam * s_max + (1.0 - lam) * s_nor
    return SampleScore(s, c, s_max, s_nor, c_all, float(k_rate), mix * c_all * (1.0 - gamma_k * k_rate))


def aggregate_sample(
    verdicts: FactVerdicts,
    config: EvalConfig = EvalConfig(),
    fact_weights=None,
    contradiction_threshold: float = 1.0,
) -> SampleScore:
    per = verdicts.per_iatt
    if fact_weights is None:
        s = [satisfaction(v) for v in per]
    else:
        w = np.asarray(fact_weights, dtype=np.float64)
        owner = verdicts.fact_index[:, 0]
        s = [satisfaction(v, w[owner == n]) for n, v in enumerate(per)]
    c = [applicability(v) for v in per]
    k = contradiction_rate(verdicts, contradiction_threshold)
    return combine_sample(s, c, k, config.lam, config.gamma_k)


def evaluate_sample(prediction, miatts: MiattSet, config: EvalConfig = EvalConfig(), exclusive_groups=None) -> SampleScore:
    return aggregate_sample(extract_fact_verdicts(prediction, miatts, config, exclusive_groups), config)


@dataclass(frozen=True)
class DatasetScore:
    mean_score: float
    mean_coverage: float
    mean_contradiction: float
    per_sample: tuple = field(repr=False)

    def summary(self) -> dict:
        return {
            "n_samples": len(self.per_sample),
            "mean_score": self.mean_score,
            "mean_coverage": self.mean_coverage,
            "mean_contradiction": self.mean_contradiction,
        }


def aggregate_dataset(samples: Sequence[SampleScore]) -> DatasetScore:
    samples = tuple(samples)
    if not samples:
        raise EmptyDataset("no samples to aggregate")
    return DatasetScore(
        float(np.mean([s.score for s in samples])),
        float(np.mean([s.c_overall for s in samples])),
        float(np.mean([s.k_rate for s in samples])),
        samples,
    )

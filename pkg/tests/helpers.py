"""Enumeration and scenario helpers shared by the ternary and acceptance tests."""

import itertools

import numpy as np

from miatt.core import EvalConfig
from miatt.generate import (
    FAITHFUL,
    GenSpec,
    Pattern,
    generate_att,
    generate_miatts,
    synthesize_prediction,
    union_coverage,
)
from miatt.ternary import att_score, compare_sample, per_iatt_verdict, synthesize_ternary

PRED_LEVELS = (0.0, 0.5, 1.0)


def enumerate_soundness(m: int, n: int, config: EvalConfig = EvalConfig()) -> dict:
    """Exhaust binary ATTs, faithful/omitted masks and ternary predictions.

    Noise is zero by construction. Returns counts of decided verdicts and
    disagreements with the ATT verdict, split by whether the union of the
    faithful masks covers every element.
    """
    atts = [np.array(bits, dtype=float) for bits in itertools.product((0.0, 1.0), repeat=m)]
    masks = list(itertools.product((0, 1), repeat=m))
    preds = [np.array(p) for p in itertools.product(PRED_LEVELS, repeat=m)]
    mask_bits = np.array([int("".join(map(str, mk)), 2) for mk in masks])
    full = (1 << m) - 1

    out = {"decided_full": 0, "disagree_full": 0, "decided_partial": 0, "disagree_partial": 0, "false_zero": 0}
    for att in atts:
        iatts = [np.where(np.array(mk) == 1, att, 0.5) for mk in masks]
        v = np.array([[per_iatt_verdict(p, t, config) for p in preds] for t in iatts])  # (masks, preds)
        a = np.array([att_score(p, att, config) for p in preds])
        for combo in itertools.product(range(len(masks)), repeat=n):
            t = synthesize_ternary(v[list(combo)], axis=0)  # (preds,)
            decided = t != 0.5
            wrong = decided & (t != a)
            covered = np.bitwise_or.reduce(mask_bits[list(combo)]) == full
            key = "full" if covered else "partial"
            out[f"decided_{key}"] += int(decided.sum())
            out[f"disagree_{key}"] += int(wrong.sum())
            out["false_zero"] += int(np.sum((t == 0.0) & (a != 0.0)))
    return out


def random_scenarios(count: int, noise: float, seed: int, full_coverage: bool = True):
    """Seeded small scenarios with predictions; optionally only full-union ones."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        m = int(rng.integers(2, 9))
        n = int(rng.integers(2, 6))
        pattern = (Pattern.CUSTOM, Pattern.HIGH_DIVERSITY, Pattern.LOW_DIVERSITY)[int(rng.integers(3))]
        coverage = float(rng.uniform(0.3, 1.0))
        spec = GenSpec(m=m, n=n, coverage=coverage, noise=noise, pattern=pattern, seed=int(rng.integers(2**63)))
        att = generate_att(m, True, rng)
        sc = generate_miatts(att, spec)
        if full_coverage and union_coverage(sc) < 1.0:
            continue
        if rng.random() < 0.5:
            pred = synthesize_prediction(att, float(rng.choice([0.0, 0.1, 0.3])), rng)
        else:
            pred = att.copy()
            flip = rng.random(m) < 0.15
            pred[flip] = 1.0 - pred[flip]
        out.append((pred, sc))
    return out


def relation_rows(scenarios, config: EvalConfig = EvalConfig()):
    return [compare_sample(p, sc.miatts, sc.att, config) for p, sc in scenarios]

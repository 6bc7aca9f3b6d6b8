"""Deterministic synthetic MIATT scenarios.

A hidden accurate target (ATT) is drawn first; each inaccurate target then
copies a ``coverage`` fraction of the ATT's elements verbatim, flips a
``noise`` fraction of the remaining elements (``v -> 1 - v``) and leaves
the rest at the uninformative value 0.5.

The PRNG is numpy's PCG64 through ``np.random.default_rng``. Per-sample
streams are seeded with ``[seed, sample_index]`` so that samples are
independent of how many others are generated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import MiattError, MiattSet, SoftTarget, soft_target, validate_miatt_set

OMITTED, FAITHFUL, CORRUPTED = 0, 1, 2


class SpecMismatch(MiattError):
    pass


class Pattern(str, enum.Enum):
    NO_COVERAGE = "no-coverage"
    LOW_DIVERSITY = "low-diversity"
    HIGH_DIVERSITY = "high-diversity"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, name: str) -> "Pattern":
        key = name.strip().lower().replace("_", "-")
        aliases = {"worst": cls.NO_COVERAGE, "none": cls.NO_COVERAGE, "best": cls.HIGH_DIVERSITY}
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int
    coverage: float
    noise: float = 0.0
    pattern: Pattern = Pattern.CUSTOM
    overlap: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise SpecMismatch("m must be >= 1")
        if self.n < 2:
            raise SpecMismatch("N must be >= 2")
        for name in ("coverage", "noise"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SpecMismatch(f"{name} must lie in [0, 1], got {v}")
        if self.overlap is not None and not 0.0 <= self.overlap <= 1.0:
            raise SpecMismatch(f"overlap must lie in [0, 1], got {self.overlap}")
        if not isinstance(self.pattern, Pattern):
            object.__setattr__(self, "pattern", Pattern.parse(self.pattern))


@dataclass(frozen=True, eq=False)
class GeneratedScenario:
    """A hidden ATT, the MIATT set derived from it and the per-element origin.

    ``fact_mask[n, e]`` is ``FAITHFUL``, ``CORRUPTED`` or ``OMITTED``.
    """

    att: SoftTarget
    miatts: MiattSet
    fact_mask: np.ndarray

    def faithful(self) -> np.ndarray:
        return self.fact_mask == FAITHFUL

    def corrupted(self) -> np.ndarray:
        return self.fact_mask == CORRUPTED

    def omitted(self) -> np.ndarray:
        return self.fact_mask == OMITTED


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate_att(m: int, binary: bool = True, seed=0) -> SoftTarget:
    """Draw a length-``m`` accurate target: 0/1 values, or uniform on [0, 1]."""
    if m < 1:
        raise SpecMismatch("m must be >= 1")
    rng = _rng(seed)
    if binary:
        values = rng.integers(0, 2, size=m).astype(np.float64)
    else:
        values = rng.random(m)
    return soft_target(values)


def _faithful_sets(spec: GenSpec, rng: np.random.Generator) -> list[np.ndarray]:
    m, n = spec.m, spec.n
    coverage = 0.0 if spec.pattern is Pattern.NO_COVERAGE else spec.coverage
    k = int(round(coverage * m))
    if k == 0:
        return [np.empty(0, dtype=np.int64) for _ in range(n)]

    if spec.pattern is Pattern.LOW_DIVERSITY:
        shared = rng.choice(m, size=k, replace=False)
        return [np.sort(shared) for _ in range(n)]

    if spec.pattern is Pattern.HIGH_DIVERSITY:
        # consecutive windows of one permutation: disjoint while n*k <= m
        perm = rng.permutation(m)
        return [np.sort(perm[(i * k + np.arange(k)) % m]) for i in range(n)]

    if spec.overlap is None:
        return [np.sort(rng.choice(m, size=k, replace=False)) for _ in range(n)]

    n_core = int(round(spec.overlap * k))
    perm = rng.permutation(m)
    core, rest = perm[:n_core], perm[n_core:]
    sets = []
    for _ in range(n):
        extra = rng.choice(rest, size=k - n_core, replace=False)
        sets.append(np.sort(np.concatenate([core, extra])))
    return sets


def generate_miatts(att: SoftTarget, spec: GenSpec, rng=None) -> GeneratedScenario:
    """Derive a MIATT set from ``att`` following ``spec``.

    ``rng`` defaults to a generator seeded with ``spec.seed``.
    """
    att = soft_target(att)
    if att.size != spec.m:
        raise SpecMismatch(f"att has length {att.size} but spec.m = {spec.m}")
    rng = _rng(spec.seed if rng is None else rng)

    mask = np.full((spec.n, spec.m), OMITTED, dtype=np.int8)
    for i, idx in enumerate(_faithful_sets(spec, rng)):
        mask[i, idx] = FAITHFUL
    for i in range(spec.n):
        rest = np.flatnonzero(mask[i] != FAITHFUL)
        n_bad = int(round(spec.noise * rest.size))
        if n_bad:
            mask[i, rng.choice(rest, size=n_bad, replace=False)] = CORRUPTED

    values = np.where(mask == FAITHFUL, att, np.where(mask == CORRUPTED, 1.0 - att, 0.5))
    mask.setflags(write=False)
    return GeneratedScenario(att, validate_miatt_set(values), mask)


def union_coverage(scenario: GeneratedScenario) -> float:
    """Fraction of elements copied faithfully by at least one target."""
    return float(np.mean(np.any(scenario.faithful(), axis=0)))


def synthesize_prediction(att: SoftTarget, flip: float, rng) -> SoftTarget:
    """A stand-in model output for ``att``.

    A ``flip`` fraction of elements points to the wrong side; every element
    is then pulled toward 0.5 by a uniform factor, so some predictions land
    in the undecided band.
    """
    rng = _rng(rng)
    m = att.size
    aim = np.array(att, dtype=np.float64)
    n_flip = int(round(flip * m))
    if n_flip:
        idx = rng.choice(m, size=n_flip, replace=False)
        aim[idx] = 1.0 - aim[idx]
    strength = 1.0 - rng.random(m)  # (0, 1]
    return soft_target(np.clip(0.5 + (aim - 0.5) * strength, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class GeneratedSample:
    id: str
    prediction: SoftTarget
    scenario: GeneratedScenario
    exclusive_groups: Optional[list] = None


def generate_dataset(
    spec: GenSpec,
    n_samples: int,
    *,
    binary: bool = True,
    pred_flip: float = 0.1,
    group_size: Optional[int] = None,
) -> list[GeneratedSample]:
    """Generate ``n_samples`` independent scenarios with predictions."""
    groups = None
    if group_size:
        groups = [list(range(s, min(s + group_size, spec.m))) for s in range(0, spec.m, group_size)]
    out = []
    for i in range(n_samples):
        rng = np.random.default_rng([spec.seed, i])
        att = generate_att(spec.m, binary, rng)
        scenario = generate_miatts(att, spec, rng)
        pred = synthesize_prediction(att, pred_flip, rng)
        out.append(GeneratedSample(f"s{i:06d}", pred, scenario, groups))
    return out


def scenario_from_masks(att: Sequence[float], masks: np.ndarray) -> GeneratedScenario:
    """Rebuild a scenario from an explicit origin mask (used for enumeration)."""
    att = soft_target(att)
    masks = np.asarray(masks, dtype=np.int8)
    values = np.where(masks == FAITHFUL, att, np.where(masks == CORRUPTED, 1.0 - att, 0.5))
    return GeneratedScenario(att, validate_miatt_set(values), masks)

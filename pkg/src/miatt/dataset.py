"""JSON-lines dataset records and canonical JSON output.

One record per line::

    {"id": "s000001", "prediction": [...], "miatts": [[...], [...]],
     "weights": [...], "att": [...], "exclusive_groups": [[0, 1], [2, 3]],
     "fact_mask": ["FFOC", "OFFO"]}

``weights``, ``att``, ``exclusive_groups`` and ``fact_mask`` are optional.
Floats are written with 17 significant digits so every double survives a
write/read cycle unchanged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .core import MiattError, MiattSet, SoftTarget, soft_target, validate_miatt_set
from .generate import CORRUPTED, FAITHFUL, OMITTED, GeneratedSample

_MASK_CHARS = {FAITHFUL: "F", CORRUPTED: "C", OMITTED: "O"}
_KEY_ORDER = ("id", "prediction", "miatts", "weights", "att", "exclusive_groups", "fact_mask")


class SchemaError(MiattError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return "%.17g" % x


def dumps(obj: Any) -> str:
    """Compact deterministic JSON: fixed float format, keys in insertion order."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return json.dumps(obj.value)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True, eq=False)
class DatasetRecord:
    id: str
    prediction: SoftTarget
    miatts: MiattSet
    att: Optional[SoftTarget] = None
    exclusive_groups: Optional[list] = None
    fact_mask: Optional[list] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = {"id": self.id, "prediction": self.prediction, "miatts": self.miatts.targets}
        if self.miatts.weights is not None:
            d["weights"] = self.miatts.weights
        if self.att is not None:
            d["att"] = self.att
        if self.exclusive_groups is not None:
            d["exclusive_groups"] = self.exclusive_groups
        if self.fact_mask is not None:
            d["fact_mask"] = self.fact_mask
        return d

    @classmethod
    def from_generated(cls, sample: GeneratedSample) -> "DatasetRecord":
        mask = ["".join(_MASK_CHARS[int(c)] for c in row) for row in sample.scenario.fact_mask]
        return cls(sample.id, sample.prediction, sample.scenario.miatts, sample.scenario.att, sample.exclusive_groups, mask)


def parse_record(data: Any, line: Optional[int] = None) -> DatasetRecord:
    if not isinstance(data, dict):
        raise SchemaError("record must be a JSON object", line)
    unknown = set(data) - set(_KEY_ORDER)
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)}", line)
    for key in ("id", "prediction", "miatts"):
        if key not in data:
            raise SchemaError(f"missing required key {key!r}", line)
    if not isinstance(data["id"], str):
        raise SchemaError("id must be a string", line)
    try:
        pred = soft_target(data["prediction"])
        miatts = validate_miatt_set(data["miatts"], data.get("weights"))
        att = soft_target(data["att"]) if data.get("att") is not None else None
    except (MiattError, TypeError, ValueError) as exc:
        raise SchemaError(f"{type(exc).__name__}: {exc}", line) from exc
    if pred.size != miatts.m or (att is not None and att.size != miatts.m):
        raise SchemaError("prediction, miatts and att must share one length", line)
    groups = data.get("exclusive_groups")
    if groups is not None:
        ok = isinstance(groups, list) and all(
            isinstance(g, list) and all(isinstance(i, int) and not isinstance(i, bool) and 0 <= i < miatts.m for i in g)
            for g in groups
        )
        if not ok:
            raise SchemaError("exclusive_groups must be lists of element indices < m", line)
    mask = data.get("fact_mask")
    if mask is not None:
        if not (isinstance(mask, list) and len(mask) == miatts.n and all(isinstance(s, str) and len(s) == miatts.m and set(s) <= set("FCO") for s in mask)):
            raise SchemaError("fact_mask must hold one F/C/O string of length m per target", line)
    return DatasetRecord(data["id"], pred, miatts, att, groups, mask)


def read_dataset(path) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno) from exc
            records.append(parse_record(data, lineno))
    return records


def format_dataset(records: Iterable[DatasetRecord]) -> str:
    return "".join(dumps(r.to_dict()) + "\n" for r in records)


def write_dataset(records: Iterable[DatasetRecord], path) -> None:
    Path(path).write_text(format_dataset(records), encoding="utf-8")

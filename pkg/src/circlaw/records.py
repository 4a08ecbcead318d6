"""Trial records and their newline-delimited JSON persistence.

Every experiment emits one TrialRecord per trial (plus optional summary
records); records echo the full configuration so a result file is self-
describing, and floats round-trip losslessly through json (repr-based), so
summaries recomputed from disk match in-run summaries exactly.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np


def jsonable(value: Any) -> Any:
    """Lossless-enough JSON coercion: fractions to 'p/q' strings, complex to
    [re, im], numpy scalars and arrays to native Python."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.complexfloating,)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, Path):
        return str(value)
    return value


@dataclass
class TrialRecord:
    experiment: str
    trial_index: int
    seed: int              # master seed; the trial stream is (seed, trial_index)
    params: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: time.strftime(
        "%Y-%m-%dT%H:%M:%S", time.gmtime()))

    def passed(self) -> bool:
        return all(bool(v) for v in self.flags.values())

    def to_json(self) -> str:
        return json.dumps({
            "experiment": self.experiment,
            "trial_index": self.trial_index,
            "seed": self.seed,
            "params": jsonable(self.params),
            "stats": jsonable(self.stats),
            "flags": jsonable(self.flags),
            "timestamp": self.timestamp,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "TrialRecord":
        obj = json.loads(line)
        return cls(experiment=obj["experiment"],
                   trial_index=obj["trial_index"],
                   seed=obj["seed"],
                   params=obj.get("params", {}),
                   stats=obj.get("stats", {}),
                   flags=obj.get("flags", {}),
                   timestamp=obj.get("timestamp", ""))


class ResultStore:
    """Append-only NDJSON store, one record per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, record: TrialRecord) -> None:
        with open(self.path, "a") as fh:
            fh.write(record.to_json() + "\n")

    def extend(self, records: Iterable[TrialRecord]) -> None:
        with open(self.path, "a") as fh:
            for rec in records:
                fh.write(rec.to_json() + "\n")

    def __iter__(self) -> Iterator[TrialRecord]:
        if not self.path.exists():
            return
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield TrialRecord.from_json(line)

    def read_all(self) -> list[TrialRecord]:
        return list(self)

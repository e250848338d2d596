"""Structured check results serialized as JSON lines and CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def clean(value: Any) -> Any:
    """Convert numpy scalars/arrays to JSON-safe Python values.

    NaN becomes ``None``; infinities become the strings ``"inf"``/``"-inf"``.
    """
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [clean(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return value


@dataclass
class CheckReport:
    """Outcome of one numerical check.

    ``records`` holds one dict per sampled configuration, ``summary`` the
    aggregated observations, ``tolerance`` the thresholds the pass flag was
    judged against.
    """

    check: str
    passed: bool
    seed: Optional[int] = None
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def summary_record(self) -> dict:
        return clean({
            "type": "summary",
            "check": self.check,
            "passed": bool(self.passed),
            "seed": self.seed,
            "n_records": len(self.records),
            "tolerance": self.tolerance,
            "notes": list(self.notes),
            **self.summary,
        })

    def to_jsonl(self) -> str:
        lines = [json.dumps(clean({"type": "record", "check": self.check, **r})) for r in self.records]
        lines.append(json.dumps(self.summary_record()))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        if not self.records:
            return ""
        keys: list = []
        for r in self.records:
            for k in r:
                if k not in keys:
                    keys.append(k)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in self.records:
            row = []
            for k in keys:
                v = clean(r.get(k))
                row.append(json.dumps(v) if isinstance(v, (list, dict)) else ("" if v is None else v))
            w.writerow(row)
        return buf.getvalue()

    def line(self) -> str:
        """One human-readable pass/fail line."""
        status = "PASS" if self.passed else "FAIL"
        bits = ", ".join(f"{k}={_fmt(v)}" for k, v in self.summary.items() if np.isscalar(v))
        return f"[{status}] {self.check}: {bits}"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.4g}"
    return str(v)

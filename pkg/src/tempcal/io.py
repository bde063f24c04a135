"""Dataset file I/O and JSON report serialization.

Dataset CSV format: header ``f_0,...,f_{K-1}`` optionally followed by
``label``; one row per sample, no missing cells.  The class count is
inferred from the header.  Labels are 0-based integers in [0, K);
exports that number classes from 1 must be shifted before loading.
Floats are written with full round-trip precision (shortest
representation that parses back to the same double).

Reports serialize as JSON with sorted keys and full-precision numbers;
NaN or infinity anywhere in a report is a serialization error.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .data import LogitDataset


def _expected_header(class_count: int, labeled: bool) -> list[str]:
    cols = [f"f_{k}" for k in range(class_count)]
    return cols + ["label"] if labeled else cols


def load_dataset(path) -> LogitDataset:
    """Strictly parse a dataset CSV; errors name the offending line."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        labeled = header and header[-1] == "label"
        n_classes = len(header) - (1 if labeled else 0)
        if n_classes < 2 or header[:n_classes] != [f"f_{k}" for k in range(n_classes)]:
            raise ValueError(
                f"{path}: malformed header {header!r}; expected f_0,...,f_K-1[,label]"
            )
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}: line {lineno}: expected {len(header)} "
                                 f"fields, got {len(row)}")
            try:
                values = [float(cell) for cell in row[:n_classes]]
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric cell") from None
            if not all(np.isfinite(values)):
                raise ValueError(f"{path}: line {lineno}: non-finite logit")
            rows.append(values)
            if labeled:
                try:
                    label = int(row[-1])
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}: non-integer label") from None
                if not 0 <= label < n_classes:
                    raise ValueError(f"{path}: line {lineno}: label {label} out of "
                                     f"range [0, {n_classes})")
                labels.append(label)
    logits = np.asarray(rows, dtype=np.float64).reshape(len(rows), n_classes)
    return LogitDataset(logits, np.asarray(labels, dtype=np.int64) if labeled else None)


def save_dataset(ds: LogitDataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_expected_header(ds.class_count, ds.is_labeled))
        for i in range(ds.sample_count):
            row = [repr(float(v)) for v in ds.logits[i]]
            if ds.is_labeled:
                row.append(str(int(ds.labels[i])))
            writer.writerow(row)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def report_to_json(report) -> str:
    """Canonical JSON text: sorted keys, full precision, NaN forbidden."""
    payload = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False)


def save_report(report, path) -> None:
    Path(path).write_text(report_to_json(report) + "\n")


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())

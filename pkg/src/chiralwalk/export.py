"""Deterministic CSV and JSON text.

Every CSV starts with a ``# schema=...`` comment line followed by a header
row. Floats are written with ``repr`` so files round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = "1"


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def csv_text(kind: str, columns: Sequence[str], rows: Iterable[Sequence], **meta) -> str:
    buf = io.StringIO()
    extra = "".join(f" {k}={v}" for k, v in sorted(meta.items()))
    buf.write(f"# schema=chiralwalk.{kind}/{SCHEMA_VERSION}{extra}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns))
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def json_text(obj) -> str:
    return json.dumps(_plain(obj), indent=1, sort_keys=True) + "\n"

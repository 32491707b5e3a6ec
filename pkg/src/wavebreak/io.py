"""Deterministic CSV/JSON writers and checksums."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def write_csv(path, header: list[str], rows) -> Path:
    """Header row, ``.`` decimals, shortest round-trip float repr."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])
    return path


def write_columns(path, header: list[str], *cols) -> Path:
    return write_csv(path, header, zip(*[np.asarray(c).tolist() for c in cols]))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = [[float(x) if x not in ("", "true", "false") else {"": np.nan, "true": 1.0, "false": 0.0}[x] for x in r] for r in rd]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def to_jsonable(o):
    if isinstance(o, dict):
        return {str(k): to_jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [to_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return to_jsonable(o.tolist())
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (np.floating,)):
        o = float(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, float) and not np.isfinite(o):
        return str(o)  # JSON has no inf/nan
    return o


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()

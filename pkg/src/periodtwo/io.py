"""CSV and JSON emitters with reproducible formatting."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Tuple

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def format_csv(header: Tuple[str, str], t: Iterable[float], values: Iterable[float]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for a, b in zip(t, values):
        buf.write(f"{a:.17g},{b:.17g}\n")
    return buf.getvalue()


def write_csv(path, header: Tuple[str, str], t, values) -> None:
    Path(path).write_text(format_csv(header, t, values))


def read_csv(path, header: Tuple[str, str] | None = None) -> Tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    if header is not None and tuple(rows[0]) != tuple(header):
        raise ValueError(f"{path}: expected header {','.join(header)}, got {','.join(rows[0])}")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from exc
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least two rows")
    return data[:, 0], data[:, 1]

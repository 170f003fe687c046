"""Plain-text outputs: CSV with ``#`` metadata headers and key/value documents.

Both formats write floats with 12 significant digits so golden files diff
cleanly. Header lines look like ``# key: value``.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping

import numpy as np

SIG_DIGITS = 12


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.{SIG_DIGITS}g}"
    return str(value)


def input_hash(obj) -> str:
    """Short SHA-256 of a JSON-serialisable object or of raw bytes."""
    if isinstance(obj, (bytes, bytearray)):
        data = bytes(obj)
    else:
        data = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(data).hexdigest()[:16]


def _header_lines(header: Mapping | None) -> list[str]:
    return [f"# {k}: {fmt(v)}" for k, v in (header or {}).items()]


def write_csv(path, columns: Mapping[str, np.ndarray], header: Mapping | None = None) -> None:
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    lengths = {c.shape[0] for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths: {sorted(lengths)}")
    lines = _header_lines(header)
    lines.append(",".join(names))
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_rows(path, names: list[str], rows: list[Mapping], header: Mapping | None = None) -> None:
    """Write a list of record dicts; missing keys become empty cells."""
    lines = _header_lines(header)
    lines.append(",".join(names))
    for row in rows:
        lines.append(",".join(fmt(row[n]) if n in row else "" for n in names))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_scalar(text: str):
    t = text.strip()
    if t in ("true", "false"):
        return t == "true"
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def read_csv(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Return ``(header, columns)``; numeric columns become float arrays."""
    header: dict = {}
    names = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = _parse_scalar(value)
            continue
        cells = line.split(",")
        if names is None:
            names = cells
        else:
            rows.append(cells)
    if names is None:
        raise ValueError(f"{path}: no column header")
    cols = {}
    for i, name in enumerate(names):
        raw = [r[i] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw, dtype=object)
    return header, cols


def write_kv(path, doc: Mapping, header: Mapping | None = None) -> None:
    """Write ``key = value`` lines; non-scalar values are JSON encoded."""
    lines = _header_lines(header)
    for key, value in doc.items():
        if isinstance(value, (list, tuple, dict)):
            text = json.dumps(value, default=fmt)
        elif value is None:
            text = "null"
        else:
            text = fmt(value)
        lines.append(f"{key} = {text}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_kv(path) -> tuple[dict, dict]:
    header: dict = {}
    doc: dict = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = _parse_scalar(value)
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}: malformed line {line!r}")
        value = value.strip()
        if value == "null":
            doc[key.strip()] = None
        elif value[:1] in "[{":
            doc[key.strip()] = json.loads(value)
        else:
            doc[key.strip()] = _parse_scalar(value)
    return header, doc

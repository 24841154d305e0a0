"""Deterministic, atomic CSV/JSON writers with a parameter header."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__

ARTIFACT = "torusqm"


def fmt(x) -> str:
    """Shortest round-trip text for a number (locale independent)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return repr(float(x))


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def meta_block(params: dict) -> dict:
    return {"artifact": ARTIFACT, "version": __version__, "parameters": _plain(params)}


def write_json(path, payload: dict, params: dict) -> Path:
    doc = {"meta": meta_block(params)}
    doc.update(_plain(payload))
    return atomic_write(path, json.dumps(doc, indent=2, sort_keys=False) + "\n")


def csv_text(header: list[str], rows, params: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# artifact={ARTIFACT} version={__version__}\n")
    for key, value in _plain(params).items():
        buf.write(f"# {key}={json.dumps(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, params: dict) -> Path:
    return atomic_write(path, csv_text(header, rows, params))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and data rows, skipping ``#`` comment lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]

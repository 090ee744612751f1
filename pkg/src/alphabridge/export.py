"""Path export.

CSV: header ``t,value``, one row per grid point, floats written as the
shortest decimal that round-trips (``repr``).

Binary dump, all little-endian::

    bytes 0-7    magic  b"ABPATH01"
    bytes 8-15   uint64 grid length n
    next 8n      float64 grid times
    next 8n      float64 path values
"""

from __future__ import annotations

import csv
import io
import struct
from pathlib import Path

import numpy as np

from .paths import SamplePath, TimeGrid

MAGIC = b"ABPATH01"
_HEADER = struct.Struct("<8sQ")


def fmt(x: float) -> str:
    return repr(float(x))


def path_to_csv(path: SamplePath) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["t", "value"])
    for t, v in zip(path.times, path.values):
        w.writerow([fmt(t), fmt(v)])
    return buf.getvalue()


def write_path_csv(path: SamplePath, target: str | Path) -> None:
    Path(target).write_text(path_to_csv(path), encoding="utf-8", newline="")


def read_path_csv(source: str | Path) -> SamplePath:
    with open(source, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["t", "value"]:
        raise ValueError("expected header t,value")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return SamplePath(TimeGrid(data[:, 0]), data[:, 1])


def path_to_bytes(path: SamplePath) -> bytes:
    n = len(path)
    return (
        _HEADER.pack(MAGIC, n)
        + np.asarray(path.times, dtype="<f8").tobytes()
        + np.asarray(path.values, dtype="<f8").tobytes()
    )


def path_from_bytes(blob: bytes) -> SamplePath:
    if len(blob) < _HEADER.size:
        raise ValueError("truncated header")
    magic, n = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    need = _HEADER.size + 16 * n
    if len(blob) != need:
        raise ValueError(f"expected {need} bytes, got {len(blob)}")
    body = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    return SamplePath(TimeGrid(body[:n].copy()), body[n:].copy())


def write_path_binary(path: SamplePath, target: str | Path) -> None:
    Path(target).write_bytes(path_to_bytes(path))


def read_path_binary(source: str | Path) -> SamplePath:
    return path_from_bytes(Path(source).read_bytes())

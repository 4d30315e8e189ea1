"""Field persistence.

Binary container layout (all integers little-endian uint64)::

    b"SPDE2D01" | N | M1 | M2 | len(config) | config (UTF-8 key=value text)
    | (N+1)(M1+1)(M2+1) float64 LE values in [t][y][z] row-major order
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError
from .simulate import FieldData, SpatialGrid, TimeGrid

MAGIC = b"SPDE2D01"
_HEADER = struct.Struct("<8sQQQQ")


def meta_to_text(meta: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in meta.items())


def text_to_meta(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if line.strip() and "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def write_binary(field: FieldData, path, config_text: str | None = None) -> None:
    text = (config_text if config_text is not None else meta_to_text(field.meta)).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, field.N, field.M1, field.M2, len(text)))
        fh.write(text)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_binary(path) -> tuple[FieldData, str]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise InvalidConfigError(f"{path}: truncated header")
    magic, N, M1, M2, ln = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidConfigError(f"{path}: bad magic {magic!r}")
    off = _HEADER.size
    text = data[off:off + ln].decode("utf-8")
    off += ln
    count = (N + 1) * (M1 + 1) * (M2 + 1)
    if len(data) - off != 8 * count:
        raise InvalidConfigError(f"{path}: expected {count} values, found {(len(data) - off) / 8}")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(np.float64)
    field = FieldData(values.reshape(N + 1, M1 + 1, M2 + 1), TimeGrid(N), SpatialGrid(M1, M2), text_to_meta(text))
    return field, text


def write_csv(field: FieldData, path) -> None:
    """One row per (i, j, k): i, j, k, t, y, z, value."""
    t, y, z = field.time_grid.times, field.spatial_grid.y, field.spatial_grid.z
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "k", "t", "y", "z", "value"])
        for i in range(field.N + 1):
            for j in range(field.M1 + 1):
                row = field.values[i, j]
                for k in range(field.M2 + 1):
                    w.writerow([i, j, k, repr(t[i]), repr(y[j]), repr(z[k]), repr(float(row[k]))])


def read_csv(path) -> FieldData:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise InvalidConfigError(f"{path}: empty field CSV")
    N = max(int(r["i"]) for r in rows)
    M1 = max(int(r["j"]) for r in rows)
    M2 = max(int(r["k"]) for r in rows)
    values = np.full((N + 1, M1 + 1, M2 + 1), np.nan)
    for r in rows:
        values[int(r["i"]), int(r["j"]), int(r["k"])] = float(r["value"])
    if np.isnan(values).any():
        raise InvalidConfigError(f"{path}: incomplete grid")
    return FieldData(values, TimeGrid(N), SpatialGrid(M1, M2))

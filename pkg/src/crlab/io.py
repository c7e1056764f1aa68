"""Field persistence: a fixed-header binary container, a JSON debug form and CSV exports.

Binary layout (little-endian)::

    b"CRPB"  u32 version  f64 s_min  f64 s_max  u32 n_s  u32 n_t
    n_s * n_t * 2 float64 values, s-major then t, (p, q) pairs
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .cylinder import CylinderGrid, Field, Loop

MAGIC = b"CRPB"
VERSION = 1
_HEADER = struct.Struct("<4sIddII")


def field_to_bytes(u: Field) -> bytes:
    g = u.grid
    head = _HEADER.pack(MAGIC, VERSION, g.s_min, g.s_max, g.n_s, g.n_t)
    return head + np.ascontiguousarray(u.values, dtype="<f8").tobytes()


def field_from_bytes(data: bytes) -> Field:
    if len(data) < _HEADER.size:
        raise ValueError("truncated field container")
    magic, version, s_min, s_max, n_s, n_t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported container version {version}")
    grid = CylinderGrid.build(s_min, s_max, n_s, n_t)
    body = data[_HEADER.size:]
    if len(body) != n_s * n_t * 2 * 8:
        raise ValueError("field container body has the wrong length")
    values = np.frombuffer(body, dtype="<f8").reshape(n_s, n_t, 2).astype(float)
    return Field(grid, values)


def write_field(path, u: Field) -> None:
    Path(path).write_bytes(field_to_bytes(u))


def read_field(path) -> Field:
    return field_from_bytes(Path(path).read_bytes())


def field_to_json(u: Field) -> str:
    """Lossless JSON: floats are written with ``repr`` precision."""
    g = u.grid
    return json.dumps({
        "format": "crpb-json",
        "version": VERSION,
        "grid": {"s_min": g.s_min, "s_max": g.s_max, "n_s": g.n_s, "n_t": g.n_t},
        "values": u.values.tolist(),
    })


def field_from_json(text: str) -> Field:
    d = json.loads(text)
    g = d["grid"]
    return Field(CylinderGrid.build(g["s_min"], g["s_max"], g["n_s"], g["n_t"]), np.array(d["values"]))


def write_loop_csv(path, loop: Loop) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "p", "q"])
        for t, (p, q) in zip(loop.time.nodes, loop.values):
            w.writerow([repr(float(t)), repr(float(p)), repr(float(q))])


def write_rows_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")

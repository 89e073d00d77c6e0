"""Binary snapshots, CSV ledgers and PPM heatmaps."""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .diagnostics import LEDGER_COLUMNS, EnergyLedger
from .fields import TorusGrid
from .kernels import GINZBURG_LANDAU, PROJECTION
from .solver import FlowState

MAGIC = b"NEM2DV01"
_HEADER = struct.Struct("<8sQddB")
_MODE_FLAGS = {PROJECTION: 0, GINZBURG_LANDAU: 1}
_FLAG_MODES = {v: k for k, v in _MODE_FLAGS.items()}

EVENT_COLUMNS = ("t", "cx", "cy", "r", "local_energy", "threshold")


class SnapshotError(ValueError):
    pass


class Snapshot(NamedTuple):
    state: FlowState
    grid: TorusGrid
    mode: str


def write_snapshot(state: FlowState, path, grid: TorusGrid, mode: str = PROJECTION):
    """Layout: magic, u64 n, f64 L, f64 t, u8 mode, then u and d as
    little-endian f64, component-major and row-major within a component."""
    n = grid.n
    if state.u.shape != (2, n, n) or state.d.shape != (3, n, n):
        raise SnapshotError(f"state shape does not match grid n={n}")
    header = _HEADER.pack(MAGIC, n, grid.length, state.t, _MODE_FLAGS[mode])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.u, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.d, dtype="<f8").tobytes())


def read_snapshot(path, expected_n: int | None = None) -> Snapshot:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotError(f"{path}: short read ({len(data)} bytes, header needs {_HEADER.size})")
    magic, n, length, t, flag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if expected_n is not None and n != expected_n:
        raise SnapshotError(f"{path}: grid shape mismatch, file has n={n}, expected n={expected_n}")
    if flag not in _FLAG_MODES:
        raise SnapshotError(f"{path}: unknown mode flag {flag}")
    need = _HEADER.size + 5 * n * n * 8
    if len(data) < need:
        raise SnapshotError(f"{path}: short read ({len(data)} of {need} bytes)")
    if len(data) > need:
        raise SnapshotError(f"{path}: {len(data) - need} trailing bytes")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).astype(float)
    u = body[: 2 * n * n].reshape(2, n, n)
    d = body[2 * n * n:].reshape(3, n, n)
    return Snapshot(FlowState(u, d, t), TorusGrid(n, length), _FLAG_MODES[flag])


def write_ledger(ledger: EnergyLedger, path, events_path=None):
    """Rows to ``path``; concentration events to ``events_path`` when given
    (default: ``events.csv`` beside ``path``) if any were flagged."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LEDGER_COLUMNS)
        for row in ledger.rows:
            w.writerow([repr(float(v)) for v in row])
    if ledger.flags or events_path is not None:
        events_path = path.with_name("events.csv") if events_path is None else Path(events_path)
        write_events(ledger.flags, events_path)


def write_events(events, target):
    """``target`` is a path or an open text stream."""
    if hasattr(target, "write"):
        _write_events(events, target)
        return
    with open(target, "w", newline="") as fh:
        _write_events(events, fh)


def _write_events(events, fh):
    w = csv.writer(fh)
    w.writerow(EVENT_COLUMNS)
    for ev in events:
        w.writerow([repr(float(v)) for v in
                    (ev.t, ev.center[0], ev.center[1], ev.radius, ev.local_energy, ev.threshold)])


def read_ledger(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header, np.array(body, dtype=float).reshape(-1, len(header))


def render_heatmap(field: np.ndarray, path, palette: str = "grayscale"):
    """Write a binary PPM (P6).  Image rows run from high ``y`` to low ``y``
    and columns along ``x``.

    ``grayscale`` maps min..max to black..white (a constant field is mid
    gray); ``signed`` is a blue-white-red ramp symmetric about zero.
    """
    f = np.asarray(field, dtype=float)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError(f"heatmap needs a scalar n x n field, got shape {f.shape}")
    img = f.T[::-1]
    if palette == "grayscale":
        lo, hi = np.min(img), np.max(img)
        if hi > lo:
            v = np.rint(255 * (img - lo) / (hi - lo))
        else:
            v = np.full(img.shape, 128.0)
        rgb = np.repeat(v[..., None], 3, axis=-1)
    elif palette == "signed":
        m = np.max(np.abs(img))
        s = img / m if m > 0 else np.zeros_like(img)
        neg = np.clip(-s, 0, 1)
        pos = np.clip(s, 0, 1)
        rgb = np.stack([255 * (1 - neg), 255 * (1 - neg - pos), 255 * (1 - pos)], axis=-1)
        rgb = np.rint(np.clip(rgb, 0, 255))
    else:
        raise ValueError(f"palette must be 'grayscale' or 'signed', got {palette!r}")
    n_rows, n_cols = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{n_cols} {n_rows}\n255\n".encode("ascii"))
        fh.write(rgb.astype(np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    """Inverse of :func:`render_heatmap` for our own files; ``(rows, cols, 3)`` uint8."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    cols, rows = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols, 3)

"""File formats.

* probe series: CSV with header ``t,<name>...`` and ``repr`` floats, so a
  read-back reproduces the in-memory values bit for bit;
* field snapshots: ``SGF1`` little-endian binary (layout below);
* space-time heatmaps: binary PPM (P6) plus a ``.txt`` sidecar with the
  value range and colormap name;
* diagnostics reports: CSV, one row per record.

SGF1 layout::

    b"SGF1" | u32 nx | u32 n_snapshots | f64 dx | f64 dt | f64 x_min
    n_snapshots x ( f64 t | nx f64 phi | (nx-1) f64 phi_x | nx f64 phi_t )

``phi_t`` is the temporal edge that ends at the snapshot's layer.
"""
from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

MAGIC = b"SGF1"
_HEADER = struct.Struct("<4sII3d")


class OutputError(OSError):
    """Raised when an output file cannot be written."""


# CSV -----------------------------------------------------------------------


def write_probe_csv(path, t: np.ndarray, series: Mapping[str, np.ndarray]) -> Path:
    path = Path(path)
    names = list(series)
    cols = [np.asarray(t, dtype=float)] + [np.asarray(series[n], dtype=float) for n in names]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("all probe series must have the same length as t")
    with _open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *names])
        for row in zip(*(c.tolist() for c in cols)):
            w.writerow([repr(v) for v in row])
    return path


def read_probe_csv(path) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
    return data[:, 0], {name: data[:, k] for k, name in enumerate(header) if k > 0}


def write_report_csv(path, rows: Sequence[Mapping]) -> Path:
    path = Path(path)
    keys: list[str] = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    with _open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return path


def read_report_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# SGF1 ----------------------------------------------------------------------


def sgf1_size(nx: int, n_snapshots: int) -> int:
    return _HEADER.size + n_snapshots * 8 * (1 + nx + (nx - 1) + nx)


class SnapshotWriter:
    """Streams snapshots to an SGF1 file; the count is patched on ``close``."""

    def __init__(self, path, nx: int, dx: float, dt: float, x_min: float):
        self.path = Path(path)
        self.nx = nx
        self.count = 0
        self._fh = _open(self.path, "wb")
        self._write(_HEADER.pack(MAGIC, nx, 0, dx, dt, x_min))

    def _write(self, data: bytes):
        try:
            self._fh.write(data)
        except OSError as e:
            raise OutputError(f"cannot write {self.path}: {e}") from e

    def add(self, t: float, phi: np.ndarray, phi_x: np.ndarray, phi_t: np.ndarray):
        if phi.shape != (self.nx,) or phi_x.shape != (self.nx - 1,) or phi_t.shape != (self.nx,):
            raise ValueError("snapshot arrays do not match nx")
        self._write(struct.pack("<d", t))
        for a in (phi, phi_x, phi_t):
            self._write(np.ascontiguousarray(a, dtype="<f8").tobytes())
        self.count += 1

    def add_state(self, state, grid):
        self.add(state.time(grid), state.varphi, state.phi_x, state.phi_t_prev)

    def close(self):
        if self._fh.closed:
            return
        try:
            self._fh.seek(8)
            self._fh.write(struct.pack("<I", self.count))
        finally:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class SGF1:
    nx: int
    dx: float
    dt: float
    x_min: float
    t: np.ndarray
    phi: np.ndarray  # (n, nx)
    phi_x: np.ndarray  # (n, nx-1)
    phi_t: np.ndarray  # (n, nx)


def read_sgf1(path) -> SGF1:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for an SGF1 header")
    magic, nx, n, dx, dt, x_min = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if len(raw) != sgf1_size(nx, n):
        raise ValueError(f"size {len(raw)} does not match header ({sgf1_size(nx, n)} expected)")
    rec = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, 3 * nx)
    return SGF1(
        nx=nx, dx=dx, dt=dt, x_min=x_min, t=rec[:, 0].copy(),
        phi=rec[:, 1:1 + nx].copy(), phi_x=rec[:, 1 + nx:2 * nx].copy(), phi_t=rec[:, 2 * nx:].copy(),
    )


# PPM -----------------------------------------------------------------------

COLORMAP = "blue-white-red"
_CMAP_NODES = np.array([[0.0, 0.0, 0.5], [0.0, 0.3, 1.0], [1.0, 1.0, 1.0], [1.0, 0.2, 0.0], [0.5, 0.0, 0.0]])


def diverging_rgb(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """Map to uint8 RGB; the colormap is symmetric about the midpoint of [vmin, vmax]."""
    v = np.asarray(values, dtype=float)
    span = vmax - vmin
    s = np.zeros_like(v) + 0.5 if span == 0 else (v - vmin) / span
    s = np.clip(np.nan_to_num(s, nan=0.5), 0.0, 1.0) * (len(_CMAP_NODES) - 1)
    k = np.minimum(s.astype(int), len(_CMAP_NODES) - 2)
    f = (s - k)[..., None]
    rgb = (1 - f) * _CMAP_NODES[k] + f * _CMAP_NODES[k + 1]
    return np.round(rgb * 255).astype(np.uint8)


def write_ppm(path, field: np.ndarray, symmetric: bool = True) -> Path:
    """Write ``field`` (rows = time, oldest at the bottom) as a P6 image."""
    path = Path(path)
    a = np.asarray(field, dtype=float)
    finite = a[np.isfinite(a)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 0.0)
    vmin, vmax = lo, hi
    if symmetric:
        m = max(abs(lo), abs(hi))
        vmin, vmax = -m, m
    img = diverging_rgb(a[::-1], vmin, vmax)
    h, w = a.shape
    with _open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    sidecar = path.with_suffix(".txt")
    with _open(sidecar, "w") as fh:
        fh.write(f"colormap {COLORMAP}\nmin {lo!r}\nmax {hi!r}\nscale_min {vmin!r}\nscale_max {vmax!r}\n")
    return path


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


# manifest ------------------------------------------------------------------


def write_manifest(directory, files: Iterable, status: str, extra: Mapping | None = None) -> Path:
    directory = Path(directory)
    body = {"status": status, "files": sorted(str(Path(f).name) for f in files)}
    body.update(extra or {})
    path = directory / "manifest.json"
    with _open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
    return path


def _open(path: Path, mode: str, **kw):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, mode, **kw)
    except OSError as e:
        raise OutputError(f"cannot open {path}: {e}") from e

"""Cartesian parameter sweeps with content-hash resume.

Every point is an ordinary config dict, so a point run is exactly
``simulate(from_dict(point))``.  Finished points are appended to a JSONL
cache keyed by the SHA-256 of the canonical point JSON; re-running a sweep
with the same cache skips them.  Points may run in parallel processes, but
the report is always assembled in point order.
"""
from __future__ import annotations

import copy
import hashlib
import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .. import diagnostics as dg
from ..stepper import BlowUpError, FieldState, step
from .config import ConfigError, from_dict
from .execute import RunOutcome, simulate
from . import io

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Axis:
    """One sweep dimension.  All ``paths`` are set together, each scaled by ``scale``."""

    paths: tuple[str, ...]
    values: tuple
    scale: tuple[float, ...] | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "Axis":
        paths = d["paths"] if "paths" in d else [d["path"]]
        scale = d.get("scale")
        if scale is not None and len(scale) != len(paths):
            raise ValueError("axis scale must have one entry per path")
        return cls(tuple(paths), tuple(d["values"]), None if scale is None else tuple(float(s) for s in scale))

    def assignments(self, value) -> dict:
        scale = self.scale or (1.0,) * len(self.paths)
        return {p: (value * s if s != 1.0 else value) for p, s in zip(self.paths, scale)}


@dataclass
class SweepSpec:
    base: dict
    axes: list[Axis]
    reducers: list[str] = field(default_factory=lambda: ["final_energy"])
    max_parallel: int = 1

    @property
    def size(self) -> int:
        return int(np.prod([len(a.values) for a in self.axes])) if self.axes else 1

    def points(self) -> list[tuple[dict, dict]]:
        """``(coordinates, config_dict)`` for every point, in row-major order."""
        out = []
        for combo in itertools.product(*(a.values for a in self.axes)):
            cfg = copy.deepcopy(self.base)
            coords = {}
            for axis, v in zip(self.axes, combo):
                coords[axis.paths[0]] = v
                for path, val in axis.assignments(v).items():
                    _set(cfg, path, val)
            cfg.pop("outputs", None)
            out.append((coords, cfg))
        return out


def _set(d: dict, path: str, value):
    keys = path.split(".")
    for k in keys[:-1]:
        if k not in d or not isinstance(d[k], dict):
            raise KeyError(f"sweep path {path!r} does not exist in the base config")
        d = d[k]
    d[keys[-1]] = value


def point_hash(cfg: dict, reducers: Sequence[str]) -> str:
    blob = json.dumps({"config": cfg, "reducers": list(reducers)}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# reducers ------------------------------------------------------------------


def _final_pair(o: RunOutcome) -> tuple[FieldState, FieldState]:
    bc = o.config.build_boundaries()
    return o.state, step(o.state, o.grid, o.model, bc)


def reduce_final_energy(o: RunOutcome) -> dict:
    prev, cur = _final_pair(o)
    return {"final_energy": dg.energy_of_pair(prev, cur, o.grid, o.model).total}


BOUND_WINDOW = (-20.0, 20.0)
BOUND_THRESHOLD = 5.0


def reduce_bound_vs_scattered(o: RunOutcome) -> dict:
    """Bound if the energy left near the collision point exceeds ``BOUND_THRESHOLD``.

    A bound pair keeps most of its rest energy (about 14 at g=0.32) inside
    ``|x| < 20``; separated kinks leave only radiation tails (< 1) behind.
    """
    prev, cur = _final_pair(o)
    ew = dg.windowed_energy(prev, cur, o.grid, o.model, *BOUND_WINDOW).total
    return {"window_energy": ew, "outcome": "bound" if ew > BOUND_THRESHOLD else "scattered"}


def reduce_soliton_census(o: RunOutcome) -> dict:
    kinks = dg.track_kinks(o.state, o.grid)
    n_plus = sum(1 for k in kinks if k.polarity > 0)
    n_minus = sum(1 for k in kinks if k.polarity < 0)
    winding = float(o.state.varphi[-1] - o.state.varphi[0]) / (2 * np.pi)
    return {"fluxons": n_plus, "antifluxons": n_minus, "net_winding": winding}


REDUCERS: dict[str, Callable[[RunOutcome], dict]] = {
    "final_energy": reduce_final_energy,
    "bound_vs_scattered": reduce_bound_vs_scattered,
    "soliton_census": reduce_soliton_census,
}


def run_point(cfg: dict, reducers: Sequence[str]) -> dict:
    """Run one point and apply the reducers; failures become a status string."""
    row: dict = {}
    try:
        o = simulate(from_dict(cfg), write=False)
        for name in reducers:
            row.update(REDUCERS[name](o))
        row["status"] = "ok"
    except BlowUpError as e:
        row["status"] = f"blowup at t={e.t:g}"
    except (ConfigError, ValueError) as e:
        row["status"] = f"error: {e}"
    return row


def run_sweep(spec: SweepSpec, report_path: str | Path | None = None, cache_path: str | Path | None = None,
              progress: Callable[[int, int], None] | None = None) -> list[dict]:
    unknown = [r for r in spec.reducers if r not in REDUCERS]
    if unknown:
        raise ValueError(f"unknown reducers: {', '.join(unknown)}")
    points = spec.points()
    hashes = [point_hash(cfg, spec.reducers) for _, cfg in points]
    done = _load_cache(cache_path)
    todo = [k for k, h in enumerate(hashes) if h not in done]
    log.info("sweep: %d points, %d cached", len(points), len(points) - len(todo))

    def record(k, row):
        done[hashes[k]] = row
        if cache_path is not None:
            with open(cache_path, "a") as fh:
                fh.write(json.dumps({"hash": hashes[k], "row": row}, sort_keys=True) + "\n")
        if progress:
            progress(len(points) - len(todo) + finished[0], len(points))

    finished = [0]
    if spec.max_parallel > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=spec.max_parallel) as pool:
            futures = {pool.submit(run_point, points[k][1], spec.reducers): k for k in todo}
            for fut, k in futures.items():
                finished[0] += 1
                record(k, fut.result())
    else:
        for k in todo:
            finished[0] += 1
            record(k, run_point(points[k][1], spec.reducers))

    rows = []
    for k, (coords, _) in enumerate(points):
        rows.append({"point": k, **coords, **done[hashes[k]], "hash": hashes[k][:16]})
    if report_path is not None:
        io.write_report_csv(report_path, rows)
    return rows


def _load_cache(path) -> dict:
    if path is None or not Path(path).exists():
        return {}
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            continue  # a torn last line from an interrupted run
        out[rec["hash"]] = rec["row"]
    return out


def sweep_from_preset(name: str, max_parallel: int = 1) -> SweepSpec:
    from .presets import SWEEPS, preset_dict

    s = SWEEPS[name]
    return SweepSpec(
        base=preset_dict(s["base"]),
        axes=[Axis.from_dict(a) for a in s["axes"]],
        reducers=list(s["reducers"]),
        max_parallel=max_parallel,
    )


def count_alternations(rows: Sequence[dict], key: str = "outcome") -> int:
    """Number of changes of ``key`` along the row order (failed points skipped)."""
    seq = [r[key] for r in rows if r.get("status") == "ok"]
    return sum(1 for a, b in zip(seq, seq[1:]) if a != b)

"""Run one configuration end to end: build, integrate, record, write files."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import diagnostics as dg
from ..reference import VertexEnergyRecorder, crank_nicolson_run, euler_run
from ..stepper import BlowUpError, Probe, run
from . import io
from .config import SimulationConfig

log = logging.getLogger(__name__)

HEATMAP_MAX_WIDTH = 1200


@dataclass
class RunOutcome:
    config: SimulationConfig
    grid: object
    model: object
    state: object  # final layer (FieldState or SecondOrderState)
    t: np.ndarray
    probes: dict
    energy: dict
    charge: np.ndarray
    max_residual: float
    n_steps: int
    wall_time: float
    files: list = field(default_factory=list)
    failed: str | None = None

    def summary(self) -> dict:
        e = self.energy.get("total", np.zeros(0))
        row = {
            "name": self.config.name,
            "method": self.config.method,
            "n_steps": self.n_steps,
            "t_final": float(self.n_steps * self.grid.dt),
            "wall_time_s": self.wall_time,
            "max_face_residual": self.max_residual,
            "energy_initial": float(e[0]) if e.size else float("nan"),
            "energy_final": float(e[-1]) if e.size else float("nan"),
            "charge_drift": float(np.ptp(self.charge)) if self.charge.size else 0.0,
            "status": self.failed or "ok",
        }
        return row


class _Snapshots:
    """Dump observer: SGF1 records plus downsampled rows for the heatmaps."""

    def __init__(self, grid, path: Path | None, want_heatmap: bool):
        self.grid = grid
        self.writer = io.SnapshotWriter(path, grid.nx, grid.dx, grid.dt, grid.x_min) if path else None
        self.cols = max(1, int(np.ceil((grid.nx - 1) / HEATMAP_MAX_WIDTH)))
        self.rows = {"phi_x": [], "phi_t": []} if want_heatmap else None

    def add(self, state):
        if self.writer is not None:
            self.writer.add(state.time(self.grid) if hasattr(state, "time") else state.j * self.grid.dt,
                            state.varphi, state.phi_x, state.phi_t_prev)
        if self.rows is not None:
            self.rows["phi_x"].append(state.phi_x[:: self.cols] / self.grid.dx)
            self.rows["phi_t"].append(state.phi_t_prev[:: self.cols] / self.grid.dt)

    def close(self):
        if self.writer is not None:
            self.writer.close()


def simulate(config: SimulationConfig, out_dir: str | Path | None = None, write: bool = True) -> RunOutcome:
    """Integrate ``config``; with ``write`` set, files go to ``out_dir``.

    A blow-up stops the run; the outputs recorded so far are still written
    and the manifest is marked ``blowup``.  ``BlowUpError`` is re-raised.
    """
    grid = config.build_grid()
    model = config.build_model()
    ic = config.build_ic()
    bc = config.build_boundaries()
    probes = [Probe(float(p["x"]), p["quantity"], p.get("name")) for p in config.probes]
    stride = config.dump_stride()
    formats = set(config.outputs.formats) if write else set()
    out = Path(out_dir or config.outputs.directory)

    snaps = _Snapshots(grid, out / "fields.sgf1" if "sgf1" in formats else None, "ppm" in formats)
    charges: list[float] = []
    method = config.method
    recorder = (dg.EnergyRecorder if method == "dec" else VertexEnergyRecorder)(grid, model)
    g = float(model.g)

    def on_stride(prev, cur):
        with np.errstate(over="ignore", invalid="ignore"):  # a blow-up is reported by the stepper
            recorder(prev, cur)
        snaps.add(cur)
        if g:
            charges.append(-g * float(cur.varphi[-1] - cur.varphi[0]))

    observers = [(stride, on_stride)] if stride else []
    t0 = time.perf_counter()
    failure = None
    result = None
    try:
        if method == "dec":
            result = run(ic, grid, model, bc, config.T_max, probes=probes, observers=observers, check_residual=True)
        elif method == "euler":
            result = euler_run(ic, grid, model, bc, config.T_max, probes=probes, observers=observers)
        else:
            result = crank_nicolson_run(ic, grid, model, bc, config.T_max, probes=probes, observers=observers)
    except BlowUpError as e:
        failure = e
    except io.OutputError:
        try:
            snaps.close()
            io.write_manifest(out, [snaps.writer.path] if snaps.writer else [], "partial")
        except OSError:
            pass
        raise
    finally:
        try:
            snaps.close()
        except OSError:
            pass
    wall = time.perf_counter() - t0

    n_steps = result.n_steps if result is not None else 0
    outcome = RunOutcome(
        config=config, grid=grid, model=model,
        state=result.state if result is not None else getattr(failure, "last_good", None),
        t=result.t if result is not None else np.zeros(0),
        probes=result.probes if result is not None else {},
        energy=recorder.arrays() if recorder.records else {},
        charge=np.array(charges),
        max_residual=float(getattr(result, "max_residual", 0.0) or 0.0),
        n_steps=n_steps, wall_time=wall,
        failed="blowup" if failure else None,
    )
    if write:
        outcome.files = _write_all(outcome, out, formats, snaps)
    if failure is not None:
        raise failure
    return outcome


def _write_all(o: RunOutcome, out: Path, formats: set, snaps: _Snapshots) -> list[Path]:
    files: list[Path] = []
    if snaps.writer is not None:
        files.append(snaps.writer.path)
    try:
        if "csv" in formats and o.probes:
            files.append(io.write_probe_csv(out / "probes.csv", o.t, o.probes))
        if "ppm" in formats and snaps.rows and snaps.rows["phi_x"]:
            for name, rows in snaps.rows.items():
                files.append(io.write_ppm(out / f"{name}.ppm", np.array(rows)))
                files.append(out / f"{name}.txt")
        if "report" in formats:
            if o.energy:
                rows = [dict(zip(o.energy, vals)) for vals in zip(*(v.tolist() for v in o.energy.values()))]
                files.append(io.write_report_csv(out / "energy.csv", rows))
            files.append(io.write_report_csv(out / "summary.csv", [o.summary()]))
        io.write_manifest(out, files, o.failed or "ok", {"config": o.config.to_dict()})
    except io.OutputError:
        # best effort: record what made it to disk, then let the caller see the failure
        try:
            io.write_manifest(out, files, "partial")
        except io.OutputError:
            pass
        raise
    return files

"""Scenario pipelines shared by the acceptance tests and ``scripts/``.

Each function runs one scenario (mostly built from a named preset) and
returns the raw measurements; pass/fail thresholds live with the callers.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import diagnostics as dg
from .analytic import Custom, kink_energy
from .boundary import BoundarySpec
from .mesh import build_grid
from .model import PhysicsModel
from .reference import VertexEnergyRecorder, crank_nicolson_run, euler_run, loglog_slope, profile_runtimes
from .runner.presets import get_preset
from .runner.sweep import count_alternations, run_sweep, sweep_from_preset
from .stepper import FieldState, Probe, run, seed_initial_layer

RUNNERS = {"dec": run, "euler": euler_run, "cn": crank_nicolson_run}


def _build(cfg):
    return cfg.build_grid(), cfg.build_model(), cfg.build_ic(), cfg.build_boundaries()


def _per_unit_time(grid) -> int:
    return max(1, int(round(1.0 / grid.dt)))


# Discrete charge conservation ------------------------------------------------


@dataclass
class ResidualReport:
    name: str
    n_steps: int
    max_residual: float


def preset_face_residuals(names, max_steps: int = 2000) -> list[ResidualReport]:
    """Largest per-face edge sum over the first ``max_steps`` steps of each preset."""
    out = []
    for name in names:
        cfg = get_preset(name)
        grid, model, ic, bc = _build(cfg)
        T = min(cfg.T_max, max_steps * grid.dt)
        res = run(ic, grid, model, bc, T_max=T, check_residual=True)
        out.append(ResidualReport(name, res.n_steps, res.max_residual))
    return out


def rational_face_sums(n_vertices: int = 4, n_layers: int = 4) -> list[Fraction]:
    """Every oriented face sum of a small linear run done in exact rationals.

    The update is the same vertex rule as the compiled kernel (closed ends,
    mass term, damping, source), with ``Fraction`` coefficients.
    """
    dx, dt = Fraction(1, 2), Fraction(2, 5)
    alpha, m2, src = Fraction(1, 10), Fraction(3, 2), Fraction(1, 7)
    c0 = dt * dt / (1 + alpha * dt / 2)
    A = c0 / (dx * dx)
    B = c0 * (1 / (dt * dt) - alpha / (2 * dt))
    phi = [Fraction(k * k, 3) - Fraction(k, 5) for k in range(n_vertices)]
    pt = [Fraction((-1) ** k, 4 + k) for k in range(n_vertices)]
    px = [phi[i + 1] - phi[i] for i in range(n_vertices - 1)]
    sums = []
    for _ in range(n_layers - 1):
        ghost = [Fraction(0)] + px + [Fraction(0)]  # closed ends mirror the edge
        new_pt = []
        for i in range(n_vertices):
            lap = ghost[i + 1] - ghost[i]
            if i in (0, n_vertices - 1):
                lap *= 2
            new_pt.append(A * lap + B * pt[i] - c0 * m2 * phi[i] + c0 * src)
        new_phi = [p + a for p, a in zip(phi, new_pt)]
        new_px = [new_phi[i + 1] - new_phi[i] for i in range(n_vertices - 1)]
        sums.extend(px[i] + new_pt[i + 1] - new_px[i] - new_pt[i] for i in range(n_vertices - 1))
        phi, pt, px = new_phi, new_pt, new_px
    return sums


# Long-time fluxon -------------------------------------------------------------


@dataclass
class FluxonRun:
    method: str
    dx: float
    dt: float
    T: float
    collisions: int
    winding: float
    speed: float  # median |v| over free flight in the last tenth of the run
    seconds: float


def fluxon_collisions(method: str = "dec", dx: float = 0.05, dt: float = 0.04, T: float = 50000.0) -> FluxonRun:
    cfg = get_preset("bare_fluxon", [f"grid.dx={dx}", f"grid.dt={dt}", f"T_max={T}"])
    grid, model, ic, bc = _build(cfg)
    stride = _per_unit_time(grid)
    peaks = dg.PeakTracker(grid)
    kinks = dg.KinkTracker(grid)
    t0 = time.perf_counter()
    res = RUNNERS[method](ic, grid, model, bc, T_max=T, observers=[(stride, peaks), (stride, kinks)])
    wall = time.perf_counter() - t0
    _, x = peaks.arrays()
    t, _, v = kinks.single()
    late = (t > 0.9 * T) & np.isfinite(v)
    speed = float(np.median(np.abs(v[late]))) if late.any() else math.nan
    phi = res.state.varphi
    return FluxonRun(method, dx, dt, T, dg.count_boundary_collisions(x, grid),
                     float(phi[-1] - phi[0]), speed, wall)


# Massless capacitor -----------------------------------------------------------


@dataclass
class EnergySeries:
    method: str
    t: np.ndarray
    energy: np.ndarray
    seconds: float

    def after(self, t_settle: float) -> np.ndarray:
        return self.energy[self.t > t_settle]

    def std_after(self, t_settle: float) -> float:
        return float(np.std(self.after(t_settle)))

    def max_rise_after(self, t_settle: float) -> float:
        """Largest step-to-step increase after ``t_settle`` (<= 0 means monotone decay)."""
        return float(np.diff(self.after(t_settle)).max())


def capacitor_energy(methods=("dec", "euler", "cn"), T: float = 1000.0, half: float = 1200.0,
                     dx: float = 0.333, stride: int = 8) -> dict[str, EnergySeries]:
    cfg = get_preset("capacitor_massless", [f"grid.L={2 * half}", f"grid.dx={dx}", f"T_max={T}"])
    grid, model, ic, bc = _build(cfg)
    out = {}
    for m in methods:
        rec = (dg.EnergyRecorder if m == "dec" else VertexEnergyRecorder)(grid, model)
        t0 = time.perf_counter()
        RUNNERS[m](ic, grid, model, bc, T_max=T, observers=[(stride, rec)])
        wall = time.perf_counter() - t0
        a = rec.arrays()
        out[m] = EnergySeries(m, a["t"], a["total"], wall)
    return out


@dataclass
class MesonSignal:
    t: np.ndarray
    J: np.ndarray
    g: float

    def frequency(self):
        return dg.oscillation_frequency(self.t, self.J)

    def block_deviation(self, t_from: float, periods: int = 10) -> np.ndarray:
        """Mean ``omega - g`` over consecutive blocks of ``periods`` periods after ``t_from``."""
        tm, w = self.frequency()
        w = w[tm > t_from] - self.g
        n = w.size // periods
        return w[: n * periods].reshape(n, periods).mean(axis=1)

    def envelope(self, window):
        return dg.envelope_decay_exponent(self.t, self.J, window)


def capacitor_meson(T: float = 5000.0, half: float = 2600.0) -> MesonSignal:
    cfg = get_preset("capacitor_massless", [f"grid.L={2 * half}", f"T_max={T}"])
    grid, model, ic, bc = _build(cfg)
    res = run(ic, grid, model, bc, T_max=T, probes=[Probe(100.0, "J", "J100")])
    return MesonSignal(res.t, res.probes["J100"], float(model.g))


# Outgoing boundary quality ----------------------------------------------------


def gaussian_packet(grid, g: float, sigma: float = 3.0, k0: float = 3.0) -> Custom:
    """Right-moving Klein-Gordon packet: the velocity applies ``-i sign(k) w(k)`` in Fourier space."""
    x = grid.x
    phi0 = np.exp(-x**2 / (2 * sigma**2)) * np.cos(k0 * x)
    k = 2 * np.pi * np.fft.fftfreq(x.size, grid.dx)
    w = np.sqrt(k**2 + g**2)
    v0 = np.real(np.fft.ifft(-1j * np.sign(k) * w * np.fft.fft(phi0)))
    return Custom(lambda _x: phi0, lambda _x: v0)


def reflected_energy_fraction(orders=(0, 1), g: float = 1.2, half: float = 50.0, dx: float = 0.05,
                              dt: float = 0.04, T: float = 120.0) -> dict[int, float]:
    """Energy of (truncated run - 4x-domain run) inside the small window, over the initial energy.

    The large domain is closed; by ``T`` its own wall echoes have not come
    back into the window, so it stands in for the unbounded solution.
    """
    model = PhysicsModel.massless_schwinger(g)
    small = build_grid(2 * half, dx, dt, -half)
    big = build_grid(8 * half, dx, dt, -4 * half)

    def last_pair(grid, bc):
        a = run(gaussian_packet(grid, g), grid, model, bc, T_max=T).state
        b = run(a, grid, model, bc, T_max=dt).state
        return a, b

    s0 = seed_initial_layer(gaussian_packet(small, g), small, model)
    s1 = run(s0, small, model, BoundarySpec.closed(), T_max=dt).state
    e0 = dg.total_energy(s0, s1.phi_t_prev, small, model).total

    off = int(round((4 * half - half) / dx))
    v = slice(off, off + small.nx)
    e = slice(off, off + small.nx - 1)
    ba, bb = last_pair(big, BoundarySpec.closed())
    out = {}
    for order in orders:
        a, b = last_pair(small, BoundarySpec.outgoing(order))
        diff = FieldState(a.j, a.varphi - ba.varphi[v], a.phi_x - ba.phi_x[e], a.phi_t_prev - ba.phi_t_prev[v])
        # energy of the difference field: the model is linear, so this is the error energy
        out[order] = dg.total_energy(diff, b.phi_t_prev - bb.phi_t_prev[v], small, model).total / e0
    return out


# Schwinger atom ---------------------------------------------------------------


@dataclass
class AtomTrack:
    t: np.ndarray
    x: np.ndarray  # tracked kink position (NaN where not found)

    def quarter(self, k: int) -> np.ndarray:
        n = self.t.size
        return self.x[k * n // 4:(k + 1) * n // 4]

    def amplitude(self, k: int) -> float:
        q = self.quarter(k)
        q = q[np.isfinite(q)]
        return float(q.max() - q.min()) / 2 if q.size else math.nan

    def linear_fit_last_quarter(self) -> tuple[float, float]:
        """``(slope, R^2)`` of a straight-line fit over the last quarter."""
        n = self.t.size
        t, x = self.t[3 * n // 4:], self.x[3 * n // 4:]
        ok = np.isfinite(x)
        t, x = t[ok], x[ok]
        p = np.polyfit(t, x, 1)
        r = x - np.polyval(p, t)
        return float(p[0]), float(1 - r.var() / x.var())


class _LeftmostKink:
    """Position of the leftmost +2pi crossing: the original kink heading to -inf."""

    def __init__(self, grid):
        self.grid = grid
        self.t, self.x = [], []

    def __call__(self, prev, cur):
        ks = [k.position for k in dg.track_kinks(cur, self.grid) if k.polarity > 0]
        self.t.append(cur.j * self.grid.dt)
        self.x.append(min(ks) if ks else math.nan)


def schwinger_atom(preset: str = "schwinger_atom_x0_0", T: float = 2000.0) -> AtomTrack:
    cfg = get_preset(preset, [f"T_max={T}"])
    grid, model, ic, bc = _build(cfg)
    tr = _LeftmostKink(grid)
    run(ic, grid, model, bc, T_max=T, observers=[(_per_unit_time(grid), tr)])
    return AtomTrack(np.array(tr.t), np.array(tr.x))


# Positronium ------------------------------------------------------------------


@dataclass
class Positronium:
    t: np.ndarray
    window_energy: np.ndarray
    t_probe: np.ndarray
    phi_center: np.ndarray

    def relative_change_per_100(self, t_from: float) -> np.ndarray:
        """Relative change between consecutive 100-unit window means after ``t_from``."""
        edges = np.arange(t_from, self.t[-1] + 1e-9, 100.0)
        means = np.array([self.window_energy[(self.t >= a) & (self.t < a + 100)].mean() for a in edges[:-1]])
        return np.diff(means) / means[:-1]

    def central_swing(self, last: float = 200.0) -> float:
        """Peak-to-peak of phi(0) over the final ``last`` time units."""
        sel = self.t_probe > self.t_probe[-1] - last
        return float(np.ptp(self.phi_center[sel]))


def positronium(T: float = 4000.0) -> Positronium:
    cfg = get_preset("positronium", [f"T_max={T}"])
    grid, model, ic, bc = _build(cfg)
    rec = dg.EnergyRecorder(grid, model, (-16.0, 16.0))
    res = run(ic, grid, model, bc, T_max=T, observers=[(_per_unit_time(grid), rec)],
              probes=[Probe(0.0, "phi", "phi0")])
    a = rec.arrays()
    return Positronium(a["t"], a["total"], res.t, res.probes["phi0"])


# Fractal sweep ----------------------------------------------------------------


@dataclass
class FractalSweep:
    u: np.ndarray
    outcome: list
    alternations: int
    rows: list = field(repr=False, default_factory=list)


def fractal_sweep(report=None, cache=None, jobs: int | None = None) -> FractalSweep:
    spec = sweep_from_preset("positronium_fractal_sweep", jobs or os.cpu_count() or 1)
    rows = run_sweep(spec, report, cache)
    ok = [r for r in rows if r.get("status") == "ok"]
    return FractalSweep(np.array([r["ic.u"] for r in ok]), [r["outcome"] for r in ok],
                        count_alternations(rows), rows)


# Microshort -------------------------------------------------------------------


def microshort_equilibrium(beta: float, mu_s: float, x_s: float, span: float = 20.0) -> float:
    """Minimum of ``2 pi beta X + 2 mu_s sech^2(X - x_s)`` on the approach side of the short."""
    X = np.linspace(x_s, x_s + span, 200001)
    return float(X[np.argmin(2 * math.pi * beta * X + 2 * mu_s / np.cosh(X - x_s) ** 2)])


@dataclass
class MicroshortRun:
    t: np.ndarray
    x: np.ndarray
    x_s: float
    x_e: float
    u_terminal: float


def microshort(preset: str) -> MicroshortRun:
    cfg = get_preset(preset)
    grid, model, ic, bc = _build(cfg)
    short = model.microshorts[0]
    pk = dg.PeakTracker(grid)
    run(ic, grid, model, bc, T_max=cfg.T_max, observers=[(25, pk)])
    t, x = pk.arrays()
    return MicroshortRun(t, x, short.x, microshort_equilibrium(model.beta, short.mu, short.x), abs(cfg.ic["u"]))


# Constriction -----------------------------------------------------------------


@dataclass
class ConstrictionBudget:
    u_in: float
    u_out: float

    @property
    def loss_fraction(self) -> float:
        ke = lambda u: kink_energy(u) - kink_energy(0.0)  # noqa: E731
        return (ke(self.u_in) - ke(self.u_out)) / ke(self.u_in)


def constriction_budget(preset: str = "constriction_triple", fit_len: float = 40.0) -> ConstrictionBudget:
    """Kink speed fitted before the first and after the last constriction."""
    cfg = get_preset(preset)
    grid, model, ic, bc = _build(cfg)
    prof = cfg.model.mu["constriction"]
    segs = sorted(prof["segments"])
    margin = prof["taper"] + 5.0  # clear of the ramp
    pk = dg.PeakTracker(grid)
    run(ic, grid, model, bc, T_max=cfg.T_max, observers=[(5, pk)])
    t, x = pk.arrays()

    def speed(a, b):
        sel = (x > a) & (x < b)
        if sel.sum() < 3:
            raise RuntimeError(f"kink never crossed [{a:g}, {b:g}]")
        return float(np.polyfit(t[sel], x[sel], 1)[0])

    x0 = cfg.ic["x0"]
    first = segs[0][0] - segs[0][1] / 2 - margin
    last = segs[-1][0] + segs[-1][1] / 2 + margin
    return ConstrictionBudget(speed(x0 + 2, min(x0 + 2 + fit_len, first)), speed(last, last + fit_len))


# Runtime ----------------------------------------------------------------------


@dataclass
class RuntimeTable:
    rows: list

    def seconds(self, method: str, dx: float) -> float:
        return next(r.seconds for r in self.rows if r.method == method and r.dx == dx)

    def slope(self, method: str) -> float:
        return loglog_slope(self.rows, method)


def runtime_table(resolutions=(0.05, 0.1, 0.2, 0.4), T: float = 50000.0, repeats: int = 1) -> RuntimeTable:
    return RuntimeTable(profile_runtimes(resolutions, T, ("dec", "euler"), repeats))

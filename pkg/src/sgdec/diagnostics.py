"""Measurements on field states and probe series."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mesh import SpacetimeGrid
from .model import Coefficients, PhysicsModel, evaluate_coefficients
from .stepper import FieldState


def _coeffs(model, grid) -> Coefficients:
    return model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)


# Plaquette audit -------------------------------------------------------------


def face_residual_max(before: FieldState, after: FieldState) -> float:
    """Largest oriented edge sum over the faces completed between two layers."""
    if after.j != before.j + 1:
        raise ValueError("states must be adjacent layers")
    pt = after.phi_t_prev
    r = before.phi_x + pt[1:] - after.phi_x - pt[:-1]
    return float(np.max(np.abs(r)))


# Energies --------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyBreakdown:
    t: float
    gradient: float
    kinetic: float
    potential: float
    field: float

    @property
    def total(self) -> float:
        return self.gradient + self.kinetic + self.potential + self.field


def window_weights(grid: SpacetimeGrid, a: float | None = None, b: float | None = None):
    """Fractions of each vertex dual cell and each spatial edge inside ``[a, b]``.

    With no window this reduces to 1 on interior vertices, 1/2 on the two end
    vertices and 1 on every edge.
    """
    lo = grid.x_min if a is None else max(a, grid.x_min)
    hi = grid.x_max if b is None else min(b, grid.x_max)
    if not hi > lo:
        raise ValueError(f"empty energy window [{a}, {b}]")
    x = grid.x
    h = 0.5 * grid.dx
    cl = np.maximum(np.maximum(x - h, grid.x_min), lo)
    cr = np.minimum(np.minimum(x + h, grid.x_max), hi)
    wv = np.clip(cr - cl, 0.0, None) / grid.dx
    el = np.maximum(x[:-1], lo)
    er = np.minimum(x[1:], hi)
    we = np.clip(er - el, 0.0, None) / grid.dx
    return wv, we


def total_energy(
    state: FieldState,
    phi_t_next: np.ndarray,
    grid: SpacetimeGrid,
    model: PhysicsModel | Coefficients,
    window: tuple[float, float] | None = None,
    printed_formula: bool = False,
) -> EnergyBreakdown:
    """Discrete Hamiltonian at layer ``state.j``.

    ``phi_t_next`` is the temporal edge leaving the layer, so the kinetic term
    uses the average of the two edges through each vertex.  With
    ``printed_formula=True`` the kinetic sum is the unsquared average with a
    ``dx/(4 dt**2)`` prefactor and no end-point weights; it is kept only for
    side-by-side comparison and is not an energy.
    """
    if phi_t_next is None:
        raise ValueError("the temporal edge leaving the layer is required")
    c = _coeffs(model, grid)
    dx, dt = grid.dx, grid.dt
    phi = state.varphi
    wv, we = window_weights(grid, *(window or (None, None)))
    grad = float(np.sum(we * state.phi_x**2)) / (2 * dx)
    pt_sum = state.phi_t_prev + phi_t_next
    extra = 0.5 * (c.m2 - c.g**2) * phi**2 + c.beta * phi
    if printed_formula:
        kin = float(np.sum(dx * pt_sum / (4 * dt * dt)))
        wv = np.ones_like(wv)
    else:
        kin = float(np.sum(wv * dx * pt_sum**2)) / (8 * dt * dt)
    pot = float(np.sum(wv * dx * (c.mu * (1 - np.cos(phi)) + extra)))
    fld = float(np.sum(wv * dx * 0.5 * (c.g * phi + c.F) ** 2))
    return EnergyBreakdown(state.j * dt, grad, kin, pot, fld)


def energy_of_pair(prev: FieldState, cur: FieldState, grid, model, window=None) -> EnergyBreakdown:
    if cur.j != prev.j + 1:
        raise ValueError("states must be adjacent layers")
    return total_energy(prev, cur.phi_t_prev, grid, model, window)


def windowed_energy(prev: FieldState, cur: FieldState, grid, model, a: float, b: float) -> EnergyBreakdown:
    if not b > a:
        raise ValueError("empty window")
    if b < grid.x_min or a > grid.x_max:
        raise ValueError("window outside the domain")
    return energy_of_pair(prev, cur, grid, model, (a, b))


class EnergyRecorder:
    """Run observer accumulating energy breakdowns (optionally windowed)."""

    def __init__(self, grid, model, window=None):
        self.grid = grid
        self.coeffs = _coeffs(model, grid)
        self.window = window
        self.records: list[EnergyBreakdown] = []

    def __call__(self, prev, cur):
        self.records.append(energy_of_pair(prev, cur, self.grid, self.coeffs, self.window))

    def arrays(self) -> dict[str, np.ndarray]:
        keys = ("t", "gradient", "kinetic", "potential", "field")
        out = {k: np.array([getattr(r, k) for r in self.records]) for k in keys}
        out["total"] = np.array([r.total for r in self.records])
        return out


# Charge and current -------------------------------------------------------


def observables(state: FieldState, grid: SpacetimeGrid, model) -> dict[str, np.ndarray | float]:
    """Charge density, current, field and total charge.

    For uncoupled models (``g == 0``) the junction reading is returned
    instead: magnetic field ``H = phi_x/dx`` and voltage ``V = phi_t/dt``.
    """
    c = _coeffs(model, grid)
    if c.g == 0.0:
        return {"H": state.phi_x / grid.dx, "V": state.phi_t_prev / grid.dt}
    return {
        "rho": -c.g * state.phi_x / grid.dx,
        "J": c.g * state.phi_t_prev / grid.dt,
        "E": c.g * state.varphi + c.F,
        "Q": -c.g * (state.varphi[-1] - state.varphi[0]),
    }


def total_charge(state: FieldState, g: float) -> float:
    return -g * float(state.varphi[-1] - state.varphi[0])


# Kink tracking -------------------------------------------------------------


@dataclass(frozen=True)
class KinkTrack:
    t: float
    position: float
    velocity: float
    polarity: int
    resolved: bool = True


def _crossings(phi: np.ndarray, x: np.ndarray):
    """Linear-interpolated crossings of odd multiples of pi as (x, polarity)."""
    lv = np.floor((phi - math.pi) / (2 * math.pi))  # level index below each vertex
    out = []
    for i in np.nonzero(lv[1:] != lv[:-1])[0]:
        a, b = phi[i], phi[i + 1]
        lo, hi = sorted((lv[i], lv[i + 1]))
        pol = 1 if b > a else -1
        for k in range(int(lo) + 1, int(hi) + 1):
            level = (2 * k + 1) * math.pi
            frac = (level - a) / (b - a)
            out.append((x[i] + frac * (x[i + 1] - x[i]), pol))
    out.sort()
    return out


def track_kinks(state: FieldState, grid: SpacetimeGrid, width: float = 1.0, t: float | None = None) -> list[KinkTrack]:
    """Kink centers at one instant.

    Crossings closer than ``2*width`` are merged; a merged group with zero net
    winding (a breather or a colliding pair) is dropped, a group with net
    winding above one is reported once with ``resolved=False``.
    Velocities are NaN here; :class:`KinkTracker` fills them in.
    """
    t = state.j * grid.dt if t is None else t
    cr = _crossings(state.varphi, grid.x)
    groups: list[list[tuple[float, int]]] = []
    for c in cr:
        if groups and c[0] - groups[-1][-1][0] < 2 * width:
            groups[-1].append(c)
        else:
            groups.append([c])
    tracks = []
    for g in groups:
        net = sum(p for _, p in g)
        if net == 0:
            continue
        same = [xx for xx, p in g if p == np.sign(net)]
        tracks.append(KinkTrack(t, float(np.mean(same)), math.nan, int(np.sign(net)), abs(net) == 1))
    return tracks


class KinkTracker:
    """Run observer building kink histories with finite-difference velocities."""

    def __init__(self, grid: SpacetimeGrid, width: float = 1.0, edge_margin: float = 3.0):
        self.grid = grid
        self.width = width
        # no velocities while a kink overlaps its mirror image at a wall
        self.margin = edge_margin * width
        self.history: list[list[KinkTrack]] = []

    def _near_wall(self, x):
        return x < self.grid.x_min + self.margin or x > self.grid.x_max - self.margin

    def __call__(self, prev, cur):
        now = track_kinks(cur, self.grid, self.width)
        if self.history and self.history[-1]:
            last = self.history[-1]
            filled = []
            for k in now:
                cands = [p for p in last if p.polarity == k.polarity]
                if cands:
                    p = min(cands, key=lambda q: abs(q.position - k.position))
                    dt = k.t - p.t
                    v = (k.position - p.position) / dt if dt > 0 else math.nan
                    # a jump larger than the light cone allows is a re-identification
                    if abs(k.position - p.position) > 2 * self.width + 1.5 * dt:
                        v = math.nan
                    if self._near_wall(k.position) or self._near_wall(p.position):
                        v = math.nan
                    k = KinkTrack(k.t, k.position, v, k.polarity, k.resolved)
                filled.append(k)
            now = filled
        self.history.append(now)

    def single(self):
        """``(t, position, velocity)`` of the lone kink, NaN where there is not exactly one."""
        t, x, v = [], [], []
        for rec in self.history:
            if len(rec) == 1:
                t.append(rec[0].t)
                x.append(rec[0].position)
                v.append(rec[0].velocity)
            elif rec:
                t.append(rec[0].t)
                x.append(math.nan)
                v.append(math.nan)
        return np.array(t), np.array(x), np.array(v)

    def all_velocities(self) -> np.ndarray:
        return np.array([k.velocity for rec in self.history for k in rec if math.isfinite(k.velocity)])


class PeakTracker:
    """Cheap single-kink position: the edge with the largest ``|phi_x|``."""

    def __init__(self, grid: SpacetimeGrid):
        self.grid = grid
        self.t: list[float] = []
        self.x: list[float] = []

    def __call__(self, prev, cur):
        i = int(np.argmax(np.abs(cur.phi_x)))
        self.t.append(cur.j * self.grid.dt)
        self.x.append(self.grid.x_edges[i])

    def arrays(self):
        return np.array(self.t), np.array(self.x)


def count_boundary_collisions(
    positions: Sequence[float],
    grid: SpacetimeGrid,
    width: float = 1.0,
    reach: float = 5.0,
    hysteresis: float = 1.0,
) -> int:
    """Direction reversals whose turning point lies within ``reach`` widths of an end.

    A reversal is registered once the position has retreated ``hysteresis``
    from its running extremum, which filters jitter of the sampled track.
    NaN samples are skipped.
    """
    pos = [p for p in positions if math.isfinite(p)]
    if len(pos) < 2:
        return 0
    lo = grid.x_min + reach * width
    hi = grid.x_max - reach * width
    count = 0
    direction = 0
    ext = pos[0]
    for p in pos[1:]:
        if direction >= 0:
            if p > ext:
                ext = p
                direction = 1
            elif ext - p > hysteresis:
                if direction == 1 and ext > hi:
                    count += 1
                direction, ext = -1, p
                continue
        if direction <= 0:
            if p < ext:
                ext = p
                direction = -1
            elif p - ext > hysteresis:
                if direction == -1 and ext < lo:
                    count += 1
                direction, ext = 1, p
    return count


# Series analysis -----------------------------------------------------------


def zero_crossings(t: np.ndarray, y: np.ndarray, rising: bool = True) -> np.ndarray:
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if rising:
        idx = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    else:
        idx = np.nonzero((y[:-1] > 0) & (y[1:] <= 0))[0]
    frac = y[idx] / (y[idx] - y[idx + 1])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def oscillation_frequency(t, y) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequency per period from successive rising zero crossings.

    Returns ``(t_mid, omega)`` with one entry per full period.
    """
    tc = zero_crossings(t, y)
    if tc.size < 3:
        raise ValueError(f"need at least 3 rising zero crossings, found {tc.size}")
    period = np.diff(tc)
    return 0.5 * (tc[1:] + tc[:-1]), 2 * np.pi / period


def find_peaks(t, y) -> tuple[np.ndarray, np.ndarray]:
    """Local maxima of ``|y|`` refined by a parabola through three samples."""
    t = np.asarray(t, float)
    a = np.abs(np.asarray(y, float))
    i = np.nonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
    y0, y1, y2 = a[i - 1], a[i], a[i + 1]
    den = y0 - 2 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(den != 0, 0.5 * (y0 - y2) / den, 0.0)
    h = t[i + 1] - t[i]
    return t[i] + off * h, y1 - 0.25 * (y0 - y2) * off


@dataclass(frozen=True)
class EnvelopeFit:
    exponent: float | None
    prefactor: float | None
    n_peaks: int
    decaying: bool


def envelope_decay_exponent(t, y, t_window: tuple[float, float] | None = None, min_decay: float = 0.05) -> EnvelopeFit:
    """Power-law fit ``|y| ~ C t**p`` to the peak envelope inside ``t_window``.

    Inputs whose fitted exponent is above ``-min_decay`` are reported as
    non-decaying with no exponent.
    """
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if t_window is not None:
        m = (t >= t_window[0]) & (t <= t_window[1])
        t, y = t[m], y[m]
    tp, ap = find_peaks(t, y)
    keep = (tp > 0) & (ap > 0)
    tp, ap = tp[keep], ap[keep]
    if tp.size < 3:
        raise ValueError("too few envelope peaks for a fit")
    p, c = np.polyfit(np.log(tp), np.log(ap), 1)
    if p > -min_decay:
        return EnvelopeFit(None, None, int(tp.size), False)
    return EnvelopeFit(float(p), float(math.exp(c)), int(tp.size), True)


def relative_drift(e: np.ndarray) -> float:
    e = np.asarray(e, float)
    return float((e.max() - e.min()) / abs(e[0])) if e[0] != 0 else float(e.max() - e.min())


def radiated_fraction(e_kin_before: float, e_kin_after: float) -> float:
    return (e_kin_before - e_kin_after) / e_kin_before

"""Baseline integrators for comparisons.

``euler_*`` is the explicit central-difference (leapfrog) scheme on the
second-order equation for ``phi``; ``crank_nicolson_run`` is the implicit
theta = 1/2 scheme for linear models.  Both reuse the initial data, boundary
specs and probe/observer conventions of :mod:`sgdec.stepper`.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from . import boundary as bnd
from .analytic import InitialCondition, Kink
from .diagnostics import EnergyBreakdown, window_weights
from .mesh import SpacetimeGrid, build_grid
from .model import Coefficients, PhysicsModel, evaluate_coefficients
from .stepper import (BRANCH_TOL, BlowUpError, FieldState, Probe, _is_due, _next_due, _off_branch, _probe_values,
                      make_plan, seed_initial_layer)


@dataclass
class SecondOrderState:
    j: int
    varphi_prev: np.ndarray
    varphi_curr: np.ndarray
    # per side: 1.0 once a branch-following outgoing side has latched to order 0
    bc_memory: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def varphi(self) -> np.ndarray:
        return self.varphi_curr

    @property
    def phi_x(self) -> np.ndarray:
        return np.diff(self.varphi_curr)

    @property
    def phi_t_prev(self) -> np.ndarray:
        return self.varphi_curr - self.varphi_prev

    def copy(self):
        return SecondOrderState(self.j, self.varphi_prev.copy(), self.varphi_curr.copy(), self.bc_memory.copy())


def seed_second_order(ic: InitialCondition, grid: SpacetimeGrid, model) -> SecondOrderState:
    coeffs = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
    if getattr(ic, "analytic", True):
        return SecondOrderState(0, np.asarray(ic(grid.x, -grid.dt), float), np.asarray(ic(grid.x, 0.0), float))
    s = seed_initial_layer(ic, grid, coeffs)
    return SecondOrderState(0, s.varphi - s.phi_t_prev, s.varphi.copy())


def _as_second_order(ic, grid, coeffs):
    if isinstance(ic, SecondOrderState):
        return ic.copy()
    if isinstance(ic, FieldState):
        return SecondOrderState(ic.j, ic.varphi - ic.phi_t_prev, ic.varphi.copy())
    return seed_second_order(ic, grid, coeffs)


@njit(cache=True)
def _euler_kernel(
    p0, p1, p2, nsteps, P, Q, R, K, M, S,
    kl, kr, vl, vr, Ul, Ur, refl, refr, cfl, hdt2, ic0,
    probe_idx, probe_out, latch,
):
    n = p1.shape[0]
    npr = probe_idx.shape[0]
    for s in range(nsteps):
        for i in range(1, n - 1):
            p2[i] = P * p1[i] - Q * p0[i] + R * (p1[i + 1] + p1[i - 1]) - K[i] * math.sin(p1[i]) - M[i] * p1[i] + S[i]
        if kl == 0:
            p2[0] = P * p1[0] - Q * p0[0] + 2.0 * R * (p1[1] - vl[s]) - K[0] * math.sin(p1[0]) - M[0] * p1[0] + S[0]
        elif kl == 1:
            p2[0] = vl[s]
        elif kl == 5 and (latch[0] > 0 or abs(_off_branch(p1[0], refl)) > BRANCH_TOL):
            latch[0] = 1.0
            p2[0] = p1[0] + cfl * (p1[1] - p1[0])
        elif kl == 2:
            p2[0] = p1[0] + cfl * (p1[1] - p1[0])
        else:
            if kl == 3:
                f = Ul * (p1[0] - refl)
            elif kl == 5:
                f = Ul * _off_branch(p1[0], refl)
            else:
                f = ic0 * (M[0] * p1[0] + K[0] * math.sin(p1[0]) - S[0])
            p2[0] = 2.0 * p1[0] - p0[0] + cfl * ((p1[1] - p1[0]) - (p0[1] - p0[0])) - hdt2 * f
        if kr == 0:
            p2[n - 1] = (P * p1[n - 1] - Q * p0[n - 1] + 2.0 * R * (p1[n - 2] + vr[s])
                         - K[n - 1] * math.sin(p1[n - 1]) - M[n - 1] * p1[n - 1] + S[n - 1])
        elif kr == 1:
            p2[n - 1] = vr[s]
        elif kr == 5 and (latch[1] > 0 or abs(_off_branch(p1[n - 1], refr)) > BRANCH_TOL):
            latch[1] = 1.0
            p2[n - 1] = p1[n - 1] - cfl * (p1[n - 1] - p1[n - 2])
        elif kr == 2:
            p2[n - 1] = p1[n - 1] - cfl * (p1[n - 1] - p1[n - 2])
        else:
            if kr == 3:
                f = Ur * (p1[n - 1] - refr)
            elif kr == 5:
                f = Ur * _off_branch(p1[n - 1], refr)
            else:
                f = ic0 * (M[n - 1] * p1[n - 1] + K[n - 1] * math.sin(p1[n - 1]) - S[n - 1])
            p2[n - 1] = (2.0 * p1[n - 1] - p0[n - 1] - cfl * ((p1[n - 1] - p1[n - 2]) - (p0[n - 1] - p0[n - 2]))
                         - hdt2 * f)
        for k in range(npr):
            q = probe_idx[k]
            probe_out[s, k, 0] = p2[q]
            probe_out[s, k, 1] = p2[q] - p1[q]
            qq = min(q, n - 2)
            probe_out[s, k, 2] = p2[qq + 1] - p2[qq]
        p0, p1, p2 = p1, p2, p0
    return p0, p1


@dataclass
class ReferenceResult:
    state: SecondOrderState
    t: np.ndarray
    probes: dict[str, np.ndarray]
    n_steps: int


def _loop(stepper_fn, state, grid, plan, T_max, probes, observers, chunk):
    """Shared chunked time loop for the reference schemes."""
    n_steps = int(math.floor(T_max / grid.dt + 1e-9))
    idx = np.array([grid.nearest_vertex(p.x) for p in probes], dtype=np.int64)
    end = state.j + n_steps
    p_blocks, t_blocks = [], []
    while state.j < end:
        nxt = min(end, state.j + chunk)
        for when, _ in observers:
            nxt = min(nxt, _next_due(when, state.j))
        due = [fn for when, fn in observers if _is_due(when, nxt)]
        j0 = state.j
        good = state.copy()
        n_first = nxt - j0 - (1 if due else 0)
        if n_first:
            p_blocks.append(stepper_fn(state, n_first, idx))
        if due:
            prev = state.copy()
            p_blocks.append(stepper_fn(state, 1, idx))
        if not np.all(np.isfinite(state.varphi_curr)):
            raise BlowUpError("non-finite field", last_good=good, t=state.j * grid.dt)
        t_blocks.append(np.arange(j0 + 1, nxt + 1) * grid.dt)
        for fn in due:
            fn(prev, state)
    if probes and p_blocks:
        series = _probe_values(np.concatenate(p_blocks), probes, idx, plan)
        t = np.concatenate(t_blocks)
    else:
        series, t = {p.label: np.zeros(0) for p in probes}, np.zeros(0)
    return ReferenceResult(state, t, series, n_steps)


def euler_run(
    ic,
    grid: SpacetimeGrid,
    model,
    bc: bnd.BoundarySpec | None = None,
    T_max: float = 0.0,
    probes: Sequence[Probe] = (),
    observers: Sequence[tuple[int, Callable]] = (),
    chunk: int = 4096,
) -> ReferenceResult:
    bc = bc or bnd.BoundarySpec.closed()
    coeffs = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
    state = _as_second_order(ic, grid, coeffs)
    plan = make_plan(grid, coeffs, bc)
    dt, dx, alpha = grid.dt, grid.dx, coeffs.alpha
    den = 1.0 + 0.5 * alpha * dt
    c0 = dt * dt / den
    R = c0 / (dx * dx)
    P = 2.0 / den - 2.0 * R
    Q = (1.0 - 0.5 * alpha * dt) / den
    scratch = np.empty_like(state.varphi_curr)

    def advance(st, n, idx):
        nonlocal scratch
        out = np.empty((n, idx.shape[0], 3))
        t_layer = (st.j + np.arange(n)) * dt
        vl = bnd.side_values(bc.left, "left", dx, t_layer, dt)
        vr = bnd.side_values(bc.right, "right", dx, t_layer, dt)
        per = [(s, s + 1) for s in range(n)] if plan.time_dependent else [(0, n)]
        for a, b in per:
            S = c0 * coeffs.source(t_layer[a])
            p0, p1 = _euler_kernel(
                st.varphi_prev, st.varphi_curr, scratch, b - a, P, Q, R, plan.K, plan.M, S,
                plan.left.code, plan.right.code, vl[a:b], vr[a:b],
                plan.left.U, plan.right.U, plan.left.phi_ref, plan.right.phi_ref,
                grid.courant, 0.5 * dt * dt, 1.0 / c0, idx, out[a:b], st.bc_memory,
            )
            spare = [arr for arr in (st.varphi_prev, st.varphi_curr, scratch) if arr is not p0 and arr is not p1]
            st.varphi_prev, st.varphi_curr, scratch = p0, p1, spare[0]
        st.j += n
        return out

    return _loop(advance, state, grid, plan, T_max, probes, observers, chunk)


def euler_step(state: SecondOrderState, grid: SpacetimeGrid, model, bc: bnd.BoundarySpec | None = None) -> SecondOrderState:
    res = euler_run(state, grid, model, bc, T_max=grid.dt)
    return res.state


def vertex_energy(
    p_prev: np.ndarray, p_curr: np.ndarray, p_next: np.ndarray, grid: SpacetimeGrid, model, t: float = 0.0,
    window=None,
) -> EnergyBreakdown:
    """Energy of a vertex-based trajectory from centered differences at layer ``n``."""
    c = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
    dx, dt = grid.dx, grid.dt
    wv, _ = window_weights(grid, *(window or (None, None)))
    phi = p_curr
    phi_t = (p_next - p_prev) / (2 * dt)
    phi_x = np.gradient(phi, dx)
    grad = float(np.sum(wv * dx * 0.5 * phi_x**2))
    kin = float(np.sum(wv * dx * 0.5 * phi_t**2))
    extra = 0.5 * (c.m2 - c.g**2) * phi**2 + c.beta * phi
    pot = float(np.sum(wv * dx * (c.mu * (1 - np.cos(phi)) + extra)))
    fld = float(np.sum(wv * dx * 0.5 * (c.g * phi + c.F) ** 2))
    return EnergyBreakdown(t, grad, kin, pot, fld)


class VertexEnergyRecorder:
    """Observer for the reference schemes; energy at the middle of three layers."""

    def __init__(self, grid, model, window=None):
        self.grid = grid
        self.coeffs = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
        self.window = window
        self.records: list[EnergyBreakdown] = []

    def __call__(self, prev: SecondOrderState, cur: SecondOrderState):
        self.records.append(
            vertex_energy(prev.varphi_prev, prev.varphi_curr, cur.varphi_curr, self.grid, self.coeffs,
                          prev.j * self.grid.dt, self.window)
        )

    def arrays(self):
        keys = ("t", "gradient", "kinetic", "potential", "field")
        out = {k: np.array([getattr(r, k) for r in self.records]) for k in keys}
        out["total"] = np.array([r.total for r in self.records])
        return out


# Crank-Nicolson ------------------------------------------------------------


@njit(cache=True)
def thomas(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / m if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
    x = np.empty(n)
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def cn_system(
    p0: np.ndarray, p1: np.ndarray, grid: SpacetimeGrid, coeffs: Coefficients, plan, t: float,
    vl_now: float = 0.0, vl_next: float = 0.0, vr_now: float = 0.0, vr_next: float = 0.0,
):
    """Tridiagonal bands and right-hand side of one implicit step.

    ``(1 + alpha dt/2) phi^{n+1} - dt^2/2 L phi^{n+1}
        = 2 phi^n - (1 - alpha dt/2) phi^{n-1} + dt^2/2 L phi^n + dt^2 s``
    with ``L = D2 - m2``.  Neumann ends use the half-cell second difference
    with the prescribed edge at each level; Dirichlet and outgoing ends are
    explicit rows.  For Dirichlet, ``v*_next`` is the target value.
    """
    n = grid.nx
    dt, dx = grid.dt, grid.dx
    h = 0.5 * dt * dt
    a = 0.5 * coeffs.alpha * dt
    r = h / (dx * dx)
    lower = np.full(n, -r)
    upper = np.full(n, -r)
    diag = (1.0 + a) + 2 * r + h * coeffs.m2
    Lp = np.empty(n)
    Lp[1:-1] = (p1[2:] - 2 * p1[1:-1] + p1[:-2]) / dx**2
    Lp[0] = 2 * (p1[1] - p1[0] - vl_now) / dx**2
    Lp[-1] = 2 * (p1[-2] - p1[-1] + vr_now) / dx**2
    Lp -= coeffs.m2 * p1
    src = coeffs.source(t)
    rhs = 2 * p1 - (1 - a) * p0 + h * Lp + dt * dt * src
    cfl = grid.courant
    for side, code, U, ref, now, nxt in (
        ("left", plan.left.code, plan.left.U, plan.left.phi_ref, vl_now, vl_next),
        ("right", plan.right.code, plan.right.U, plan.right.phi_ref, vr_now, vr_next),
    ):
        b, nb = (0, 1) if side == "left" else (n - 1, n - 2)
        if code == bnd.NEUMANN:
            # mirrored neighbour doubles the coupling; the prescribed edge enters the rhs
            if side == "left":
                upper[0] = -2 * r
                rhs[0] += -2 * r * nxt
            else:
                lower[n - 1] = -2 * r
                rhs[n - 1] += 2 * r * nxt
            continue
        diag[b] = 1.0
        if side == "left":
            upper[0] = 0.0
        else:
            lower[n - 1] = 0.0
        sgn = 1.0 if side == "left" else -1.0
        if code == bnd.DIRICHLET:
            rhs[b] = nxt
        elif code == bnd.OUTGOING0:
            rhs[b] = p1[b] + sgn * cfl * (p1[nb] - p1[b])
        else:
            if code == bnd.OUTGOING1_FORCE:
                f = coeffs.m2[b] * p1[b] - src[b]
            else:
                f = U * (p1[b] - bnd.branch_ref(p1[b], ref, code))
            rhs[b] = 2 * p1[b] - p0[b] + sgn * cfl * ((p1[nb] - p1[b]) - (p0[nb] - p0[b])) - h * f
    return lower, diag, upper, rhs


def cn_dense(lower, diag, upper) -> np.ndarray:
    n = diag.shape[0]
    A = np.diag(diag)
    A[np.arange(1, n), np.arange(n - 1)] = lower[1:]
    A[np.arange(n - 1), np.arange(1, n)] = upper[:-1]
    return A


def crank_nicolson_run(
    ic,
    grid: SpacetimeGrid,
    model,
    bc: bnd.BoundarySpec | None = None,
    T_max: float = 0.0,
    probes: Sequence[Probe] = (),
    observers: Sequence[tuple[int, Callable]] = (),
) -> ReferenceResult:
    """Implicit run for linear models (``mu == 0`` everywhere)."""
    bc = bc or bnd.BoundarySpec.closed()
    coeffs = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
    if np.any(coeffs.mu != 0.0):
        raise ValueError("Crank-Nicolson is only implemented for linear models (mu == 0)")
    state = _as_second_order(ic, grid, coeffs)
    plan = make_plan(grid, coeffs, bc)
    dt, dx = grid.dt, grid.dx

    def advance(st, n, idx):
        out = np.empty((n, idx.shape[0], 3))
        t_layer = (st.j + np.arange(n + 1)) * dt
        vl = bnd.side_values(bc.left, "left", dx, t_layer, dt)
        vr = bnd.side_values(bc.right, "right", dx, t_layer, dt)
        for s in range(n):
            lo, di, up, rhs = cn_system(
                st.varphi_prev, st.varphi_curr, grid, coeffs, plan, t_layer[s],
                vl[s] if plan.left.code == bnd.NEUMANN else 0.0,
                vl[s + 1] if plan.left.code == bnd.NEUMANN else vl[s],
                vr[s] if plan.right.code == bnd.NEUMANN else 0.0,
                vr[s + 1] if plan.right.code == bnd.NEUMANN else vr[s],
            )
            new = thomas(lo, di, up, rhs)
            st.varphi_prev, st.varphi_curr = st.varphi_curr, new
            if idx.size:
                q = np.minimum(idx, grid.nx - 2)
                out[s, :, 0] = new[idx]
                out[s, :, 1] = new[idx] - st.varphi_prev[idx]
                out[s, :, 2] = new[q + 1] - new[q]
        st.j += n
        return out

    return _loop(advance, state, grid, plan, T_max, probes, observers, chunk=256)


# Runtime profile --------------------------------------------------------------


@dataclass(frozen=True)
class RuntimeRow:
    method: str
    dx: float
    nx: int
    n_steps: int
    seconds: float

    @property
    def gridpoints(self) -> int:
        return self.nx * self.n_steps


def _bare_fluxon(dx: float):
    grid = build_grid(100.0, dx, 0.8 * dx, -50.0)
    return grid, PhysicsModel(), Kink(x0=0.0, u=0.55)


def profile_runtimes(
    resolutions: Sequence[float] = (0.05, 0.1, 0.2, 0.4),
    T_max: float = 50000.0,
    methods: Sequence[str] = ("dec", "euler"),
    repeats: int = 3,
    case: Callable[[float], tuple] = _bare_fluxon,
) -> list[RuntimeRow]:
    """Best-of-``repeats`` wall clock of plain runs (no probes or observers)."""
    from .stepper import run

    rows = []
    for dx in resolutions:
        grid, model, ic = case(dx)
        for m in methods:
            fn = {"dec": run, "euler": euler_run, "cn": crank_nicolson_run}[m]
            fn(ic, grid, model, T_max=2 * grid.dt)  # compile / warm caches
            best = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                res = fn(ic, grid, model, T_max=T_max)
                best = min(best, time.perf_counter() - t0)
            rows.append(RuntimeRow(m, dx, grid.nx, res.n_steps, best))
    return rows


def loglog_slope(rows: Sequence[RuntimeRow], method: str) -> float:
    pts = [(r.gridpoints, r.seconds) for r in rows if r.method == method]
    if len(pts) < 2:
        raise ValueError("need at least two resolutions")
    g, s = np.log(np.array(pts)).T
    return float(np.polyfit(g, s, 1)[0])

"""Explicit space-time integrator on edge fields.

Unknowns are the vertex values ``varphi``, the spatial edges
``phi_x[i] = varphi[i+1] - varphi[i]`` and the temporal edges ``phi_t`` that
end on the current layer.  One step integrates the equation of motion over
each vertex's dual cell, solves for the new temporal edge, and then updates
``varphi`` and ``phi_x`` by pure differences, so the oriented sum around any
completed plaquette telescopes to zero.

The update for an interior vertex reads::

    pt_new = c0 * ((px[i] - px[i-1])/dx**2 + (1/dt**2 - alpha/(2 dt)) * pt_old
                   - m2*phi - mu*sin(phi) + s(t_j))
    c0 = dt**2 / (1 + alpha*dt/2)

and boundary vertices with a Neumann-type closure use half of their dual
cell, which doubles the difference term.
"""
from __future__ import annotations

import bisect
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from . import boundary as bnd
from .analytic import Custom, InitialCondition
from .mesh import SpacetimeGrid
from .model import Coefficients, PhysicsModel, evaluate_coefficients

log = logging.getLogger(__name__)


class BlowUpError(FloatingPointError):
    """Non-finite field values; ``last_good`` is the state at the start of the failing chunk."""

    def __init__(self, msg, last_good=None, t=None):
        super().__init__(msg)
        self.last_good = last_good
        self.t = t


@dataclass
class FieldState:
    j: int
    varphi: np.ndarray
    phi_x: np.ndarray
    phi_t_prev: np.ndarray
    # spatial edges next to each boundary vertex one layer earlier
    bc_memory: np.ndarray = field(default_factory=lambda: np.full(2, np.nan))

    def copy(self) -> "FieldState":
        return FieldState(
            self.j, self.varphi.copy(), self.phi_x.copy(), self.phi_t_prev.copy(), self.bc_memory.copy()
        )

    def time(self, grid: SpacetimeGrid) -> float:
        return self.j * grid.dt

    @property
    def nx(self) -> int:
        return self.varphi.shape[0]

    def compatibility_defect(self) -> float:
        return float(np.max(np.abs(self.phi_x - np.diff(self.varphi)), initial=0.0))


def zero_state(grid: SpacetimeGrid) -> FieldState:
    n = grid.nx
    return FieldState(0, np.zeros(n), np.zeros(n - 1), np.zeros(n), np.zeros(2))


def seed_initial_layer(ic: InitialCondition, grid: SpacetimeGrid, model: PhysicsModel | Coefficients) -> FieldState:
    """Layer ``j = 0`` with the temporal edge that ends on it.

    Analytic families get the exact edge ``phi(x, 0) - phi(x, -dt)``.  Custom
    data gets a Taylor step backwards, ``dt*v0 - dt**2/2 * a0`` with ``a0`` taken
    from the equation of motion and a central-difference ``phi0''``.
    """
    coeffs = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
    x = grid.x
    dt = grid.dt
    if isinstance(ic, Custom) or not getattr(ic, "analytic", True):
        phi0 = np.asarray(ic(x), dtype=float)
        v0 = np.asarray(ic.velocity(x), dtype=float)
        lap = np.empty_like(phi0)
        lap[1:-1] = (phi0[2:] - 2 * phi0[1:-1] + phi0[:-2]) / grid.dx**2
        lap[0] = 2 * (phi0[1] - phi0[0]) / grid.dx**2
        lap[-1] = 2 * (phi0[-2] - phi0[-1]) / grid.dx**2
        a0 = lap - coeffs.alpha * v0 - coeffs.m2 * phi0 - coeffs.mu * np.sin(phi0) + coeffs.source(0.0)
        pt = dt * v0 - 0.5 * dt * dt * a0
        phi_back = phi0 - pt
    else:
        phi0 = np.asarray(ic(x, 0.0), dtype=float)
        phi_back = np.asarray(ic(x, -dt), dtype=float)
        pt = phi0 - phi_back
    px = np.diff(phi0)
    mem = np.array([phi_back[1] - phi_back[0], phi_back[-1] - phi_back[-2]])
    return FieldState(0, phi0.copy(), px, pt, mem)


# Kernel ---------------------------------------------------------------------


TWO_PI = 2.0 * math.pi
# Branch-following outgoing sides drop to order 0 for good once the boundary
# value strays this far from its vacuum: a kink (or its slow tail) is
# arriving, and the first-order closure amplifies such low frequencies.
BRANCH_TOL = 0.1


@njit(cache=True)
def _off_branch(phi, ref):
    d = phi - ref
    return d - TWO_PI * math.floor(d / TWO_PI + 0.5)


@njit(cache=True)
def _dec_kernel(
    phi, px, pt, mem, nsteps,
    A, B, K, M, S,
    kl, kr, vl, vr, Ul, Ur, refl, refr, cfl, hdt2, ic0,
    probe_idx, probe_out, check, resid_out,
):
    n = phi.shape[0]
    npr = probe_idx.shape[0]
    for s in range(nsteps):
        pl = px[0]
        pr = px[n - 2]
        latch_l = False
        latch_r = False
        # left boundary vertex
        if kl == 0:
            a = 2.0 * A * (pl - vl[s]) + B * pt[0] - K[0] * math.sin(phi[0]) - M[0] * phi[0] + S[0]
        elif kl == 1:
            a = vl[s] - phi[0]
        elif kl == 2 or mem[0] != mem[0]:
            a = cfl * pl
        elif kl == 4:  # local force instead of the linearized spring
            a = pt[0] + cfl * (pl - mem[0]) - hdt2 * ic0 * (M[0] * phi[0] + K[0] * math.sin(phi[0]) - S[0])
        else:
            d = phi[0] - refl
            if kl == 5:  # nearest vacuum branch
                d = _off_branch(phi[0], refl)
            if kl == 5 and abs(d) > BRANCH_TOL:
                a = cfl * pl
                latch_l = True
            else:
                a = pt[0] + cfl * (pl - mem[0]) - hdt2 * Ul * d
        # right boundary vertex (uses layer-j edges only, so do it up front)
        if kr == 0:
            b = 2.0 * A * (vr[s] - pr) + B * pt[n - 1] - K[n - 1] * math.sin(phi[n - 1]) - M[n - 1] * phi[n - 1] + S[n - 1]
        elif kr == 1:
            b = vr[s] - phi[n - 1]
        elif kr == 2 or mem[1] != mem[1]:
            b = -cfl * pr
        elif kr == 4:
            b = pt[n - 1] - cfl * (pr - mem[1]) - hdt2 * ic0 * (M[n - 1] * phi[n - 1] + K[n - 1] * math.sin(phi[n - 1]) - S[n - 1])
        else:
            d = phi[n - 1] - refr
            if kr == 5:
                d = _off_branch(phi[n - 1], refr)
            if kr == 5 and abs(d) > BRANCH_TOL:
                b = -cfl * pr
                latch_r = True
            else:
                b = pt[n - 1] - cfl * (pr - mem[1]) - hdt2 * Ur * d
        pt[0] = a
        prev = phi[0] + a
        phi[0] = prev
        aprev = a
        rmax = 0.0
        # the old px[i] is carried to the next vertex before px[i-1] is overwritten
        left = pl
        if check:
            for i in range(1, n - 1):
                right = px[i]
                a = A * (right - left) + B * pt[i] - K[i] * math.sin(phi[i]) - M[i] * phi[i] + S[i]
                pt[i] = a
                cur = phi[i] + a
                phi[i] = cur
                e = cur - prev
                px[i - 1] = e
                r = abs(left + a - e - aprev)
                if r > rmax:
                    rmax = r
                aprev = a
                left = right
                prev = cur
        else:
            for i in range(1, n - 1):
                right = px[i]
                a = A * (right - left) + B * pt[i] - K[i] * math.sin(phi[i]) - M[i] * phi[i] + S[i]
                pt[i] = a
                cur = phi[i] + a
                phi[i] = cur
                px[i - 1] = cur - prev
                left = right
                prev = cur
        pt[n - 1] = b
        cur = phi[n - 1] + b
        phi[n - 1] = cur
        px[n - 2] = cur - prev
        if check:
            r = abs(pr + b - px[n - 2] - aprev)
            if r > rmax:
                rmax = r
            resid_out[s] = rmax
        # a NaN memory keeps the side on the order-0 closure from now on
        mem[0] = math.nan if latch_l or mem[0] != mem[0] and kl == 5 else pl
        mem[1] = math.nan if latch_r or mem[1] != mem[1] and kr == 5 else pr
        for k in range(npr):
            q = probe_idx[k]
            probe_out[s, k, 0] = phi[q]
            probe_out[s, k, 1] = pt[q]
            probe_out[s, k, 2] = px[min(q, n - 2)]


@dataclass
class StepPlan:
    """Grid-sampled constants shared by every chunk of a run."""

    grid: SpacetimeGrid
    coeffs: Coefficients
    bc: bnd.BoundarySpec
    A: float
    B: float
    c0: float
    K: np.ndarray
    M: np.ndarray
    left: bnd.SidePlan
    right: bnd.SidePlan

    @property
    def time_dependent(self) -> bool:
        return self.coeffs.drive is not None

    def S(self, t: float) -> np.ndarray:
        return self.c0 * self.coeffs.source(t)


def make_plan(grid: SpacetimeGrid, model: PhysicsModel | Coefficients, bc: bnd.BoundarySpec, state: FieldState | None = None) -> StepPlan:
    coeffs = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
    dt, dx, alpha = grid.dt, grid.dx, coeffs.alpha
    c0 = dt * dt / (1.0 + 0.5 * alpha * dt)
    s0 = coeffs.source(0.0)
    phl = 0.0 if state is None else float(state.varphi[0])
    phr = 0.0 if state is None else float(state.varphi[-1])
    left = bnd.plan_side(bc.left, "left", coeffs.m2[0], coeffs.mu[0], s0[0], phl)
    right = bnd.plan_side(bc.right, "right", coeffs.m2[-1], coeffs.mu[-1], s0[-1], phr)
    return StepPlan(
        grid=grid, coeffs=coeffs, bc=bc,
        A=c0 / (dx * dx), B=c0 * (1.0 / (dt * dt) - alpha / (2.0 * dt)), c0=c0,
        K=c0 * coeffs.mu, M=c0 * coeffs.m2, left=left, right=right,
    )


_EMPTY_IDX = np.zeros(0, dtype=np.int64)


def advance(
    state: FieldState,
    plan: StepPlan,
    nsteps: int,
    probe_idx: np.ndarray = _EMPTY_IDX,
    check: bool = False,
):
    """Advance ``state`` in place by ``nsteps``.

    Returns ``(probe_block, residuals)``; ``probe_block[s, k]`` holds
    ``(phi, phi_t, phi_x)`` at probe ``k`` after step ``s``, and ``residuals``
    is the per-step max plaquette sum (zeros unless ``check``).
    """
    grid = plan.grid
    probe_idx = np.asarray(probe_idx, dtype=np.int64)
    probe_out = np.empty((nsteps, probe_idx.shape[0], 3))
    resid = np.zeros(nsteps)
    if nsteps <= 0:
        return probe_out, resid
    t_layer = (state.j + np.arange(nsteps)) * grid.dt
    vl = bnd.side_values(plan.bc.left, "left", grid.dx, t_layer, grid.dt)
    vr = bnd.side_values(plan.bc.right, "right", grid.dx, t_layer, grid.dt)
    if plan.time_dependent:
        for s in range(nsteps):
            _dec_kernel(
                state.varphi, state.phi_x, state.phi_t_prev, state.bc_memory, 1,
                plan.A, plan.B, plan.K, plan.M, plan.S(t_layer[s]),
                plan.left.code, plan.right.code, vl[s:s + 1], vr[s:s + 1],
                plan.left.U, plan.right.U, plan.left.phi_ref, plan.right.phi_ref,
                grid.courant, 0.5 * grid.dt**2, 1.0 / plan.c0,
                probe_idx, probe_out[s:s + 1], check, resid[s:s + 1],
            )
    else:
        _dec_kernel(
            state.varphi, state.phi_x, state.phi_t_prev, state.bc_memory, nsteps,
            plan.A, plan.B, plan.K, plan.M, plan.S(0.0),
            plan.left.code, plan.right.code, vl, vr,
            plan.left.U, plan.right.U, plan.left.phi_ref, plan.right.phi_ref,
            grid.courant, 0.5 * grid.dt**2, 1.0 / plan.c0,
            probe_idx, probe_out, check, resid,
        )
    state.j += nsteps
    return probe_out, resid


def step(state: FieldState, grid: SpacetimeGrid, model, bc: bnd.BoundarySpec | None = None) -> FieldState:
    """One step; returns a new state and leaves ``state`` untouched."""
    bc = bc or bnd.BoundarySpec.closed()
    new = state.copy()
    advance(new, make_plan(grid, model, bc, state), 1)
    if not np.all(np.isfinite(new.varphi)):
        raise BlowUpError("non-finite field after step", last_good=state, t=new.time(grid))
    return new


def face_residuals(before: FieldState, after: FieldState) -> np.ndarray:
    """Oriented edge sums over the plaquettes completed between two adjacent layers."""
    if after.j != before.j + 1:
        raise ValueError("states must be adjacent layers")
    pt = after.phi_t_prev
    return before.phi_x + pt[1:] - after.phi_x - pt[:-1]


# Run driver ----------------------------------------------------------------


@dataclass(frozen=True)
class Probe:
    """Pointwise recorder at the vertex nearest ``x``.

    ``quantity`` is one of ``phi``, ``phi_t``, ``phi_x`` (raw edge integrals),
    ``J``/``V`` (``phi_t/dt`` times ``g`` or 1), ``rho``/``H`` (``-g phi_x/dx``
    or ``phi_x/dx``) and ``E`` (``g phi + F``).
    """

    x: float
    quantity: str = "phi"
    name: str | None = None

    @property
    def label(self) -> str:
        return self.name or f"{self.quantity}@{self.x:g}"


_PROBE_QUANTITIES = {"phi", "phi_t", "phi_x", "J", "V", "rho", "H", "E"}


def _probe_values(block: np.ndarray, probes: Sequence[Probe], idx, plan: StepPlan) -> dict[str, np.ndarray]:
    g = plan.coeffs.g
    dx, dt = plan.grid.dx, plan.grid.dt
    out = {}
    for k, p in enumerate(probes):
        phi, pt, px = block[:, k, 0], block[:, k, 1], block[:, k, 2]
        q = p.quantity
        if q == "phi":
            v = phi
        elif q == "phi_t":
            v = pt
        elif q == "phi_x":
            v = px
        elif q == "J":
            v = g * pt / dt
        elif q == "V":
            v = pt / dt
        elif q == "rho":
            v = -g * px / dx
        elif q == "H":
            v = px / dx
        else:
            v = g * phi + plan.coeffs.F[idx[k]]
        out[p.label] = v.copy()
    return out


@dataclass
class RunResult:
    state: FieldState
    t: np.ndarray
    probes: dict[str, np.ndarray]
    max_residual: float
    n_steps: int
    dumps: list = field(default_factory=list)


def _next_due(when, j: int) -> int:
    if isinstance(when, (int, np.integer)):
        return (j // when + 1) * when
    k = bisect.bisect_right(when, j)
    return when[k] if k < len(when) else sys.maxsize


def _is_due(when, j: int) -> bool:
    if isinstance(when, (int, np.integer)):
        return j % when == 0
    k = bisect.bisect_left(when, j)
    return k < len(when) and when[k] == j


def run(
    ic: InitialCondition | FieldState,
    grid: SpacetimeGrid,
    model: PhysicsModel | Coefficients,
    bc: bnd.BoundarySpec | None = None,
    T_max: float = 0.0,
    probes: Sequence[Probe] = (),
    dump_every: int | None = None,
    on_dump: Callable[[FieldState], None] | None = None,
    observers: Sequence[tuple[int | Sequence[int], Callable[[FieldState, FieldState], None]]] = (),
    check_residual: bool = False,
    chunk: int = 4096,
) -> RunResult:
    """Time loop.

    Only the current layer is held in memory.  Probe series are recorded every
    step.  ``dump_every`` (in steps) triggers ``on_dump(state)``, or collects
    copies in ``RunResult.dumps`` if no callback is given.  Each observer is a
    pair ``(stride, fn)``; ``fn(prev, cur)`` is called with two adjacent layers
    every ``stride`` steps, which is what the energy needs.  A sorted list of
    step indices may stand in for the stride.
    """
    bc = bc or bnd.BoundarySpec.closed()
    coeffs = model if isinstance(model, Coefficients) else evaluate_coefficients(model, grid)
    if isinstance(ic, FieldState):
        state = ic.copy()
    else:
        state = seed_initial_layer(ic, grid, coeffs)
    n_steps = int(math.floor(T_max / grid.dt + 1e-9))
    if abs(n_steps * grid.dt - T_max) > 1e-9 * max(1.0, T_max):
        warnings.warn(f"T_max={T_max} is not a multiple of dt={grid.dt}; running {n_steps} steps", stacklevel=2)
    for p in probes:
        if p.quantity not in _PROBE_QUANTITIES:
            raise ValueError(f"unknown probe quantity {p.quantity!r}")
    idx = np.array([grid.nearest_vertex(p.x) for p in probes], dtype=np.int64)
    plan = make_plan(grid, coeffs, bc, state)
    dumps = []

    def dump():
        if on_dump is not None:
            on_dump(state)
        else:
            dumps.append(state.copy())

    if dump_every:
        dump()
    t_blocks, p_blocks = [], []
    max_res = 0.0
    j0 = state.j
    end = j0 + n_steps
    while state.j < end:
        nxt = min(end, state.j + chunk)
        if dump_every:
            nxt = min(nxt, (state.j // dump_every + 1) * dump_every)
        for when, _ in observers:
            nxt = min(nxt, _next_due(when, state.j))
        due = [fn for when, fn in observers if _is_due(when, nxt)]
        last_good = state.copy()
        n_first = nxt - state.j - (1 if due else 0)
        blocks = []
        if n_first:
            blocks.append(advance(state, plan, n_first, idx, check_residual))
        if due:
            prev = state.copy()
            blocks.append(advance(state, plan, 1, idx, check_residual))
        if not np.all(np.isfinite(state.varphi)):
            raise BlowUpError(f"non-finite field before t={state.time(grid):g}", last_good, t=state.time(grid))
        for block, res in blocks:
            if probes:
                p_blocks.append(block)
            if check_residual and res.size:
                max_res = max(max_res, float(res.max()))
        if probes:
            t_blocks.append(np.arange(nxt - (nxt - last_good.j) + 1, nxt + 1) * grid.dt)
        for fn in due:
            fn(prev, state)
        if dump_every and state.j % dump_every == 0:
            dump()
    if probes and p_blocks:
        allp = np.concatenate(p_blocks, axis=0)
        series = _probe_values(allp, probes, idx, plan)
        t = np.concatenate(t_blocks)
    else:
        series = {p.label: np.zeros(0) for p in probes}
        t = np.zeros(0)
    return RunResult(state=state, t=t, probes=series, max_residual=max_res, n_steps=n_steps, dumps=dumps)

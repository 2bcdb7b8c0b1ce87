"""Boundary closures expressed as assignments to boundary edges.

Every side gets one of four conditions.  Neumann-type conditions (bias and
pulse) prescribe the value of a virtual spatial edge just outside the domain;
the boundary vertex is then integrated over its half dual cell.  Dirichlet and
outgoing conditions prescribe the boundary temporal edge directly.

The scalar helpers in this module (``neumann_edge_value``, ``pulse_edge_value``,
``outgoing_phi_t``) are the reference forms; the compiled kernel in
:mod:`sgdec.stepper` reproduces them and the tests compare the two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Union

import numpy as np

Side = Literal["left", "right"]

# Kernel codes
NEUMANN = 0
DIRICHLET = 1
OUTGOING0 = 2
OUTGOING1 = 3  # linearized restoring term U*(phi - phi_ref)
OUTGOING1_FORCE = 4  # full local force m2*phi + mu*sin(phi) - s
OUTGOING1_BRANCH = 5  # as OUTGOING1, but phi_ref follows the nearest 2 pi branch


@dataclass(frozen=True)
class Dirichlet:
    """Boundary value ``phi = f(t)``; ``f`` may be a constant."""

    value: Union[float, Callable[[float], float]] = 0.0

    def at(self, t):
        t = np.asarray(t, dtype=float)
        if callable(self.value):
            return np.array([float(self.value(tt)) for tt in np.atleast_1d(t)]).reshape(t.shape)
        return np.full(t.shape, float(self.value))


@dataclass(frozen=True)
class NeumannBias:
    """``phi_x = eta + xi`` at the left end and ``eta - xi`` at the right end."""

    eta: float = 0.0
    xi: float = 0.0


@dataclass(frozen=True)
class Pulse:
    """Boundary field ``phi_x = H(t) sin(omega t)`` with a smoothed square envelope."""

    A: float
    omega: float
    sigma_rise: float
    sigma_fall: float
    T_p: float

    def __post_init__(self):
        if not (self.sigma_rise > 0 and self.sigma_fall > 0):
            raise ValueError("pulse widths must be positive")
        if self.T_p < 0:
            raise ValueError("T_p must be >= 0")

    def envelope(self, t):
        return pulse_envelope(t, self)


@dataclass(frozen=True)
class Outgoing:
    """Radiative closure of order 0 or 1.

    ``U`` is the linearized potential at the boundary.  An explicit ``U``
    gives the plain spring ``U*(phi - phi_ref)``.  With ``U=None`` the
    closure is picked from the local potential:

    * ``m2 == 0`` and ``mu > 0`` (periodic): the spring toward the nearest
      vacuum branch, ``U = mu*cos(phi_ref)``, while the boundary stays
      within ``BRANCH_TOL`` of it.  After the first larger excursion (a
      kink arriving) the side switches to order 0 for the rest of the run.
      The first-order closure amplifies the slow tail of an approaching
      kink and, with the sine force, lets a biased boundary slip over the
      barrier; order 0 absorbs both.
    * otherwise the local force ``m2*phi + mu*sin(phi) - s``.  With a mass
      term a fixed spring holds an exiting kink back and pumps energy in.
    """

    order: int = 1
    U: float | None = None

    def __post_init__(self):
        if self.order not in (0, 1):
            raise ValueError("outgoing order must be 0 or 1")
        if self.U is not None and self.U < 0:
            raise ValueError("U must be >= 0")


SideCondition = Union[Dirichlet, NeumannBias, Pulse, Outgoing]


@dataclass(frozen=True)
class BoundarySpec:
    left: SideCondition = NeumannBias()
    right: SideCondition = NeumannBias()

    @classmethod
    def closed(cls):
        return cls(NeumannBias(), NeumannBias())

    @classmethod
    def bias(cls, eta: float, xi: float):
        b = NeumannBias(eta, xi)
        return cls(b, b)

    @classmethod
    def outgoing(cls, order: int = 1, U: float | None = None):
        o = Outgoing(order, U)
        return cls(o, o)


def pulse_envelope(t, pulse: Pulse):
    """Square envelope of height ``A`` with Gaussian edges.

    The rise is centered so that it reaches ``A`` at ``t_r = 3 sigma_rise``; the
    fall starts at ``T_p - t_f`` with ``t_f = 3 sigma_fall``, and the envelope is
    switched off entirely after ``T_p + 3 sigma_fall``.
    """
    t = np.asarray(t, dtype=float)
    tr = 3.0 * pulse.sigma_rise
    tf_start = pulse.T_p - 3.0 * pulse.sigma_fall
    H = np.full(t.shape, float(pulse.A))
    rise = t < tr
    H[rise] = pulse.A * np.exp(-((t[rise] - tr) ** 2) / (2 * pulse.sigma_rise**2))
    fall = t > max(tf_start, tr)
    H[fall] = pulse.A * np.exp(-((t[fall] - max(tf_start, tr)) ** 2) / (2 * pulse.sigma_fall**2))
    H[t > pulse.T_p + 3.0 * pulse.sigma_fall] = 0.0
    H[t < 0] = 0.0
    return H


def neumann_edge_value(dx: float, eta: float, xi: float, side: Side) -> float:
    """Value of the virtual boundary edge for a bias condition."""
    if side == "left":
        return dx * (eta + xi)
    if side == "right":
        return dx * (eta - xi)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def pulse_edge_value(dx: float, pulse: Pulse, t):
    return dx * pulse_envelope(t, pulse) * np.sin(pulse.omega * np.asarray(t, dtype=float))


def outgoing_phi_t(
    side: Side,
    order: int,
    cfl: float,
    dt: float,
    phi_b: float,
    pt_old: float,
    px_now: float,
    px_prev: float | None,
    U: float = 0.0,
    phi_ref: float = 0.0,
    force: float | None = None,
) -> float:
    """New boundary temporal edge for an outgoing closure.

    ``px_now`` and ``px_prev`` are the spatial edges adjacent to the boundary
    vertex at the current and previous layers; ``cfl = dt/dx``.  Order 1
    without a previous layer falls back to order 0.  ``force``, if given,
    replaces ``U*(phi_b - phi_ref)``.
    """
    sgn = 1.0 if side == "left" else -1.0
    if order == 0 or px_prev is None or not math.isfinite(px_prev):
        return sgn * cfl * px_now
    f = U * (phi_b - phi_ref) if force is None else force
    return pt_old + sgn * cfl * (px_now - px_prev) - 0.5 * dt * dt * f


def local_vacuum(m2: float, mu: float, s: float, guess: float = 0.0) -> float:
    """Root of ``m2*phi + mu*sin(phi) = s`` nearest ``guess`` (Newton, damped).

    Used as the reference value the first-order outgoing closure relaxes
    toward; for a pure sine-Gordon boundary this is the nearest ``2 pi n``.
    """
    if m2 == 0.0 and mu == 0.0:
        return guess
    if m2 == 0.0:
        # sin(phi) = s/mu; pick the stable branch (cos > 0) nearest guess
        if abs(s) > mu:
            return guess
        base = math.asin(s / mu)
        n = round((guess - base) / (2 * math.pi))
        return base + 2 * math.pi * n
    phi = guess
    for _ in range(100):
        f = m2 * phi + mu * math.sin(phi) - s
        d = m2 + mu * math.cos(phi)
        if d <= 0:
            d = m2 + mu
        step = f / d
        phi -= step
        if abs(step) < 1e-14 * max(1.0, abs(phi)):
            break
    return phi


def branch_ref(phi_b: float, phi_ref: float, code: int) -> float:
    if code != OUTGOING1_BRANCH:
        return phi_ref
    return phi_ref + 2 * math.pi * math.floor((phi_b - phi_ref) / (2 * math.pi) + 0.5)


@dataclass(frozen=True)
class SidePlan:
    """Kernel-ready description of one side."""

    code: int
    U: float = 0.0
    phi_ref: float = 0.0


def plan_side(cond: SideCondition, side: Side, m2: float, mu: float, s: float, phi_b: float) -> SidePlan:
    if isinstance(cond, (NeumannBias, Pulse)):
        return SidePlan(NEUMANN)
    if isinstance(cond, Dirichlet):
        return SidePlan(DIRICHLET)
    if isinstance(cond, Outgoing):
        if cond.order == 0:
            return SidePlan(OUTGOING0)
        if cond.U is None:
            if m2 == 0.0 and mu > 0.0 and abs(s) < mu:
                ref = local_vacuum(0.0, mu, s, guess=phi_b)
                return SidePlan(OUTGOING1_BRANCH, U=mu * math.cos(ref), phi_ref=ref)
            return SidePlan(OUTGOING1_FORCE)
        ref = local_vacuum(m2, mu, s, guess=phi_b)
        return SidePlan(OUTGOING1, U=cond.U, phi_ref=ref)
    raise TypeError(f"unknown boundary condition {cond!r}")


def side_values(cond: SideCondition, side: Side, dx: float, t_layer: np.ndarray, dt: float) -> np.ndarray:
    """Per-step values consumed by the kernel for steps starting at ``t_layer``.

    Neumann-type sides return the virtual edge at the current layer; Dirichlet
    returns the target boundary value at the next layer.  Outgoing sides
    need no values.
    """
    if isinstance(cond, NeumannBias):
        return np.full(t_layer.shape, neumann_edge_value(dx, cond.eta, cond.xi, side))
    if isinstance(cond, Pulse):
        return pulse_edge_value(dx, cond, t_layer)
    if isinstance(cond, Dirichlet):
        return cond.at(t_layer + dt)
    return np.zeros(t_layer.shape)


def is_time_dependent(cond: SideCondition) -> bool:
    return isinstance(cond, Pulse) or (isinstance(cond, Dirichlet) and callable(cond.value))


# State-level wrappers ------------------------------------------------------


def apply_neumann_bias(state, grid, eta: float, xi: float, side: Side) -> float:
    """Virtual edge value for ``state``'s layer (the state itself is not read)."""
    return neumann_edge_value(grid.dx, eta, xi, side)


def apply_pulse(state, grid, pulse: Pulse, t: float, side: Side) -> float:
    if t < 0:
        raise ValueError("t must be >= 0")
    return float(pulse_edge_value(grid.dx, pulse, t))


def apply_outgoing(
    state, grid, order: int, U: float, side: Side, phi_ref: float = 0.0, force: float | None = None,
) -> float:
    """New boundary temporal edge for ``state`` under an outgoing closure."""
    if side == "left":
        ib, ie, k = 0, 0, 0
    elif side == "right":
        ib, ie, k = grid.nx - 1, grid.nx - 2, 1
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    mem = state.bc_memory[k] if state.bc_memory is not None else None
    return outgoing_phi_t(
        side, order, grid.courant, grid.dt,
        phi_b=float(state.varphi[ib]), pt_old=float(state.phi_t_prev[ib]),
        px_now=float(state.phi_x[ie]), px_prev=mem, U=U, phi_ref=phi_ref, force=force,
    )

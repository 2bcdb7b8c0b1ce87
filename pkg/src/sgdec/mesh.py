"""Uniform 1+1D space-time mesh and its oriented cell complex.

Vertices are labelled ``(i, j)`` with ``i`` the spatial and ``j`` the temporal
index, both zero-based.  Spatial edges ``e_x(i, j)`` join ``(i, j) -> (i+1, j)``
and temporal edges ``e_t(i, j)`` join ``(i, j) -> (i, j+1)``.  Face ``(i, j)`` is
the rectangle with lower-left corner ``(i, j)``.

The dual mesh is never stored: on a uniform rectangular grid every interior
dual cell is ``dx * dt`` and boundary dual cells are ``dx * dt / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

SPATIAL = "x"
TEMPORAL = "t"


@dataclass(frozen=True)
class SpacetimeGrid:
    nx: int
    dx: float
    dt: float
    x_min: float = 0.0

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < 3:
            raise ValueError(f"nx must be an integer >= 3, got {self.nx}")
        if not (self.dx > 0 and self.dt > 0):
            raise ValueError("dx and dt must be positive")
        if not self.dt < self.dx:
            raise ValueError(
                f"stability rule violated: dt={self.dt} must be < dx={self.dx} (courant < 1)"
            )

    @property
    def courant(self) -> float:
        return self.dt / self.dx

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.nx)

    @property
    def x_edges(self) -> np.ndarray:
        """Midpoints of the spatial edges."""
        return self.x_min + self.dx * (np.arange(self.nx - 1) + 0.5)

    @property
    def length(self) -> float:
        return (self.nx - 1) * self.dx

    @property
    def x_max(self) -> float:
        return self.x_min + (self.nx - 1) * self.dx

    @property
    def n_edges_x(self) -> int:
        return self.nx - 1

    @property
    def n_faces(self) -> int:
        """Faces completed by one time step."""
        return self.nx - 1

    def x_at(self, i: int) -> float:
        return self.x_min + self.dx * i

    def nearest_vertex(self, x: float) -> int:
        i = int(np.floor((x - self.x_min) / self.dx + 0.5))
        if not 0 <= i < self.nx:
            raise ValueError(f"x={x} lies outside [{self.x_min}, {self.x_max}]")
        return i

    def contains(self, x: float) -> bool:
        return self.x_min - 0.5 * self.dx <= x <= self.x_max + 0.5 * self.dx


def build_grid(L: float, dx: float, dt: float, x_min: float = 0.0) -> SpacetimeGrid:
    """Grid with ``round(L/dx) + 1`` vertices spanning ``[x_min, x_min + L]``."""
    if not (dx > 0 and dt > 0):
        raise ValueError("dx and dt must be positive")
    if dt >= dx:
        raise ValueError(f"stability rule violated: dt={dt} must be < dx={dx}")
    if L < 2 * dx:
        raise ValueError(f"domain length L={L} too small for dx={dx} (need L >= 2*dx)")
    return SpacetimeGrid(nx=int(round(L / dx)) + 1, dx=float(dx), dt=float(dt), x_min=float(x_min))


@dataclass(frozen=True, order=True)
class EdgeId:
    kind: Literal["x", "t"]
    i: int
    j: int


@dataclass(frozen=True, order=True)
class FaceId:
    i: int
    j: int


def edge_midpoint(grid: SpacetimeGrid, e: EdgeId) -> tuple[float, float]:
    if e.kind == SPATIAL:
        return grid.x_at(e.i) + 0.5 * grid.dx, e.j * grid.dt
    return grid.x_at(e.i), (e.j + 0.5) * grid.dt


def edge_at(grid: SpacetimeGrid, kind: str, x: float, t: float) -> EdgeId:
    """Inverse of :func:`edge_midpoint`."""
    if kind == SPATIAL:
        i = int(np.floor((x - grid.x_min) / grid.dx))
        j = int(np.floor(t / grid.dt + 0.5))
    elif kind == TEMPORAL:
        i = int(np.floor((x - grid.x_min) / grid.dx + 0.5))
        j = int(np.floor(t / grid.dt))
    else:
        raise ValueError(f"unknown edge kind {kind!r}")
    return EdgeId(kind, i, j)


def face_boundary(
    grid: SpacetimeGrid, f: FaceId, n_layers: int | None = None
) -> list[tuple[EdgeId, int]]:
    """Counter-clockwise boundary of a face with orientations.

    Bottom spatial edge (+), right temporal edge (+), top spatial edge (-),
    left temporal edge (-).  Summing oriented edge differences telescopes
    the four corner values to zero.
    """
    if not 0 <= f.i < grid.nx - 1 or f.j < 0:
        raise IndexError(f"face {f} out of range")
    if n_layers is not None and f.j >= n_layers - 1:
        raise IndexError(f"face {f} out of range for {n_layers} time layers")
    return [
        (EdgeId(SPATIAL, f.i, f.j), +1),
        (EdgeId(TEMPORAL, f.i + 1, f.j), +1),
        (EdgeId(SPATIAL, f.i, f.j + 1), -1),
        (EdgeId(TEMPORAL, f.i, f.j), -1),
    ]


def dual_cell_weights(grid: SpacetimeGrid) -> np.ndarray:
    """Length of each vertex's dual cell in units of dx (1 inside, 1/2 at the ends)."""
    w = np.ones(grid.nx)
    w[0] = w[-1] = 0.5
    return w

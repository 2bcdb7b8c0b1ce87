"""Coefficients of the generalized wave equation

    phi_tt - phi_xx + alpha*phi_t + m2(x)*phi + mu(x)*sin(phi) = s(x, t)

with ``s = -beta - g*F(x) + drive(x, t)``.  Pure sine-Gordon, the perturbed
Josephson equation, the massless Klein-Gordon (Schwinger, kappa = 0) and the
normalized massive Schwinger equation are all parameter choices of this one
form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .mesh import SpacetimeGrid

Profile = Union[float, Callable[[np.ndarray], np.ndarray]]


def _step(x: np.ndarray) -> np.ndarray:
    # Heaviside with the midpoint value at the jump
    return np.heaviside(x, 0.5)


@dataclass(frozen=True)
class CapacitorSource:
    """Plates ``-Q`` at ``center - length/2`` and ``+Q`` at ``center + length/2``."""

    Q: float
    length: float
    center: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float) - self.center
        return self.Q * (_step(x + self.length / 2) - _step(x - self.length / 2))


@dataclass(frozen=True)
class PointChargeSource:
    """Background field of a fixed point charge: ``F(x) = Q * Theta(x - x_c)``.

    ``F`` vanishes to the left of the charge.  For a Schwinger atom whose kink
    winds by ``+2*pi`` use ``Q = -2*pi*g`` so that ``g*phi + F`` vanishes on
    both sides.
    """

    Q: float
    x_c: float = 0.0

    def __call__(self, x):
        return self.Q * _step(np.asarray(x, dtype=float) - self.x_c)


@dataclass(frozen=True)
class Microshort:
    x: float
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("microshort strength must be positive")


@dataclass(frozen=True)
class ConstrictionProfile:
    """Critical current raised to ``mu_inside`` on each segment, with linear tapers.

    ``segments`` holds ``(center, length)`` pairs; each segment is flanked by
    tapers of width ``taper`` that ramp back to ``mu_outside``.
    """

    segments: tuple[tuple[float, float], ...]
    mu_inside: float
    taper: float = 10.0
    mu_outside: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.mu_outside, dtype=float)
        for center, length in self.segments:
            d = np.abs(x - center) - length / 2
            if self.taper > 0:
                frac = np.clip(1.0 - d / self.taper, 0.0, 1.0)
            else:
                frac = (d <= 0).astype(float)
            out = np.maximum(out, self.mu_outside + (self.mu_inside - self.mu_outside) * frac)
        return out


@dataclass(frozen=True)
class PhysicsModel:
    alpha: float = 0.0
    mass2: float = 0.0
    mu: Profile = 1.0
    microshorts: tuple[Microshort, ...] = ()
    beta: float = 0.0
    g: float = 0.0
    background: Callable[[np.ndarray], np.ndarray] | None = None
    drive: Callable[[np.ndarray, float], np.ndarray] | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.mass2 < 0:
            raise ValueError("mass2 must be >= 0")
        if self.g < 0:
            raise ValueError("g must be >= 0")

    @classmethod
    def sine_gordon(cls, alpha=0.0, beta=0.0, mu: Profile = 1.0, microshorts: Sequence[Microshort] = ()):
        return cls(alpha=alpha, beta=beta, mu=mu, microshorts=tuple(microshorts))

    @classmethod
    def massless_schwinger(cls, g: float, background=None):
        return cls(mass2=g * g, mu=0.0, g=g, background=background)

    @classmethod
    def massive_schwinger(cls, g: float, background=None, dynamical_mass: bool = True):
        """Normalized massive model; ``dynamical_mass=False`` drops the ``g**2 phi`` term."""
        return cls(mass2=g * g if dynamical_mass else 0.0, mu=1.0, g=g, background=background)

    @property
    def is_linear(self) -> bool:
        return self.mu == 0.0 and not self.microshorts

    def mu_at(self, x: np.ndarray) -> np.ndarray:
        if callable(self.mu):
            return np.asarray(self.mu(x), dtype=float) * np.ones_like(x)
        return np.full(np.shape(x), float(self.mu))

    def background_at(self, x: np.ndarray) -> np.ndarray:
        if self.background is None:
            return np.zeros(np.shape(x))
        return np.asarray(self.background(x), dtype=float) * np.ones_like(x)


@dataclass
class Coefficients:
    """Per-vertex coefficient arrays sampled on a grid."""

    m2: np.ndarray
    mu: np.ndarray
    F: np.ndarray
    s_static: np.ndarray
    alpha: float
    g: float
    beta: float
    drive: Callable[[np.ndarray, float], np.ndarray] | None = None
    x: np.ndarray = field(repr=False, default=None)

    def source(self, t: float) -> np.ndarray:
        if self.drive is None:
            return self.s_static
        return self.s_static + np.asarray(self.drive(self.x, t), dtype=float)


def evaluate_coefficients(model: PhysicsModel, grid: SpacetimeGrid) -> Coefficients:
    """Sample ``m2``, ``mu`` and the static source on the grid vertices.

    A microshort becomes a spike of height ``mu_s/dx`` on its nearest vertex,
    so that its integral over that vertex's dual cell equals ``mu_s``.
    """
    x = grid.x
    mu = model.mu_at(x).astype(float)
    for short in model.microshorts:
        if not grid.contains(short.x):
            raise ValueError(f"microshort at x={short.x} lies outside the domain")
        mu[grid.nearest_vertex(short.x)] += short.mu / grid.dx
    if np.any(mu < 0):
        raise ValueError("critical current profile must be non-negative")
    F = model.background_at(x)
    s_static = -model.beta - model.g * F
    return Coefficients(
        m2=np.full(grid.nx, float(model.mass2)),
        mu=mu,
        F=F,
        s_static=np.asarray(s_static, dtype=float) * np.ones(grid.nx),
        alpha=float(model.alpha),
        g=float(model.g),
        beta=float(model.beta),
        drive=model.drive,
        x=x,
    )


@dataclass(frozen=True)
class SchwingerScaling:
    kappa: float
    g_physical: float
    length_scale: float  # x, t -> length_scale * x, t
    field_scale: float  # phi -> field_scale * phi
    g_normalized: float


def normalize_schwinger(kappa: float, g_physical: float) -> SchwingerScaling:
    """Rescaling that brings the massive bosonized model to unit sine coefficient."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if g_physical < 0:
        raise ValueError("g must be non-negative")
    lam = math.sqrt(2 * math.pi * kappa)
    return SchwingerScaling(
        kappa=kappa,
        g_physical=g_physical,
        length_scale=lam,
        field_scale=2 * math.sqrt(math.pi),
        g_normalized=g_physical / lam,
    )


def denormalize_schwinger(scaling: SchwingerScaling) -> tuple[float, float]:
    lam = scaling.length_scale
    return lam * lam / (2 * math.pi), scaling.g_normalized * lam

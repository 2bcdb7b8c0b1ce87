"""Closed-form sine-Gordon solutions used as initial data and as test oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


def _check_speed(u: float):
    if not abs(u) < 1:
        raise ValueError(f"|u| must be < 1, got {u}")


def lorentz_factor(u: float) -> float:
    _check_speed(u)
    return 1.0 / math.sqrt(1.0 - u * u)


def kink(x, t=0.0, x0=0.0, u=0.0, n=0, polarity=1):
    """Traveling kink ``polarity * 4 atan(exp((x - x0 - u t)/sqrt(1-u^2))) + 2 pi n``."""
    _check_speed(u)
    w = math.sqrt(1.0 - u * u)
    with np.errstate(over="ignore"):  # exp -> inf maps cleanly to atan = pi/2
        core = np.arctan(np.exp((np.asarray(x) - x0 - u * t) / w))
    return polarity * 4.0 * core + 2 * np.pi * n


def kink_antikink(x, t=0.0, x0=0.0, u=0.5, d=20.0):
    """Kink-antikink pair approaching each other with speeds ``u`` about ``x0``.

    The pair collides at ``t = d/(2u)``.  The right member winds by ``-2 pi``
    (an antikink in the ``phi_x`` sign convention) and the left by ``+2 pi``
    for ``u > 0``; far from the pair ``phi`` returns to zero on both sides.
    """
    _check_speed(u)
    if u == 0:
        raise ValueError("kink_antikink requires u != 0")
    w = math.sqrt(1.0 - u * u)
    num = np.sinh((u * np.asarray(t) - d / 2) / w)
    with np.errstate(over="ignore"):
        den = u * np.cosh((np.asarray(x) - x0) / w)
    return -4.0 * np.arctan(num / den)


def breather(x, t=0.0, nu=0.5, x0=0.0, t0=0.0):
    """Rest-frame breather with internal angular frequency ``cos(nu)``."""
    if not 0 < nu < math.pi / 2:
        raise ValueError("nu must lie in (0, pi/2)")
    x = np.asarray(x)
    return 4.0 * np.arctan(
        math.tan(nu) * np.sin(math.cos(nu) * (np.asarray(t) - t0)) / np.cosh(math.sin(nu) * (x - x0))
    )


def boosted_breather(x, t=0.0, nu=0.5, x0=0.0, t0=0.0, u=0.0):
    gamma = lorentz_factor(u)
    x = np.asarray(x)
    t = np.asarray(t)
    return breather(gamma * (x - u * t), gamma * (t - u * x), nu=nu, x0=x0, t0=t0)


def kink_energy(u: float = 0.0, mu: float = 1.0) -> float:
    """Energy of a sine-Gordon kink, ``8 sqrt(mu) / sqrt(1-u^2)``."""
    return 8.0 * math.sqrt(mu) * lorentz_factor(u)


def kink_energy_density(x, t=0.0, x0=0.0, u=0.0):
    _check_speed(u)
    w = math.sqrt(1.0 - u * u)
    sech = 1.0 / np.cosh((np.asarray(x) - x0 - u * t) / w)
    # phi_x = 2 sech / w, phi_t = -u phi_x, 1 - cos(phi) = 2 sech^2
    return 0.5 * (1 + u * u) * (2 * sech / w) ** 2 + 2 * sech**2


def reflection_shift(u: float) -> float:
    """Forward jump of a kink in one collision with an antikink of the same speed.

    Read off the asymptotics of the two-soliton solution; a kink reflecting
    from a free (Neumann) end collides with its mirror image and gains this
    much distance.
    """
    _check_speed(u)
    return 2.0 * math.sqrt(1.0 - u * u) * math.log(1.0 / abs(u))


# Initial-condition variants -------------------------------------------------


class InitialCondition:
    analytic = True

    def __call__(self, x, t=0.0):
        raise NotImplementedError


@dataclass(frozen=True)
class Kink(InitialCondition):
    x0: float = 0.0
    u: float = 0.0
    n: int = 0
    polarity: int = 1

    def __post_init__(self):
        _check_speed(self.u)
        if self.polarity not in (1, -1):
            raise ValueError("polarity must be +1 or -1")

    def __call__(self, x, t=0.0):
        return kink(x, t, self.x0, self.u, self.n, self.polarity)


@dataclass(frozen=True)
class KinkAntikinkPair(InitialCondition):
    x0: float = 0.0
    u: float = 0.5
    d: float = 20.0

    def __post_init__(self):
        _check_speed(self.u)
        if self.u == 0:
            raise ValueError("pair velocity must be non-zero")
        if not self.d > 0:
            raise ValueError("d must be positive")

    def __call__(self, x, t=0.0):
        return kink_antikink(x, t, self.x0, self.u, self.d)


@dataclass(frozen=True)
class Breather(InitialCondition):
    nu: float = 0.5
    x0: float = 0.0
    t0: float = 0.0
    u: float = 0.0

    def __post_init__(self):
        if not 0 < self.nu < math.pi / 2:
            raise ValueError("nu must lie in (0, pi/2)")
        _check_speed(self.u)

    def __call__(self, x, t=0.0):
        return boosted_breather(x, t, self.nu, self.x0, self.t0, self.u)


@dataclass(frozen=True)
class Zero(InitialCondition):
    def __call__(self, x, t=0.0):
        return np.zeros(np.shape(x))


@dataclass(frozen=True)
class Custom(InitialCondition):
    """User data ``phi0(x)`` and ``v0(x) = phi_t(x, 0)``."""

    phi0: Callable[[np.ndarray], np.ndarray]
    v0: Callable[[np.ndarray], np.ndarray] | None = None
    analytic = False

    def __call__(self, x, t=0.0):
        if t != 0.0:
            raise ValueError("custom initial data is only defined at t=0")
        return np.asarray(self.phi0(x), dtype=float)

    def velocity(self, x):
        if self.v0 is None:
            return np.zeros(np.shape(x))
        return np.asarray(self.v0(x), dtype=float)


@dataclass(frozen=True)
class Sum(InitialCondition):
    """Superposition of analytic initial conditions (not an exact solution)."""

    parts: tuple[InitialCondition, ...]

    def __call__(self, x, t=0.0):
        return sum(p(x, t) for p in self.parts)

"""Named scenario catalog.

Each preset is a plain config dict (schema version 1), so ``sgdec run --preset``
and ``load_config`` go through the same validation.  Sweep presets reference a
base preset plus value axes.
"""
from __future__ import annotations

import copy
import math

import numpy as np

from .config import SCHEMA_VERSION, SimulationConfig, apply_overrides, from_dict

CLOSED = {"left": {"type": "neumann"}, "right": {"type": "neumann"}}
OUTGOING = {"left": {"type": "outgoing", "order": 1}, "right": {"type": "outgoing", "order": 1}}


def _cfg(name, grid, model, ic, boundaries, T_max, probes=(), **extra):
    d = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "grid": grid,
        "model": model,
        "ic": ic,
        "boundaries": copy.deepcopy(boundaries),
        "T_max": T_max,
        "probes": list(probes),
        "dump": {"count": 500},
        "outputs": {"directory": f"out/{name}", "formats": ["csv", "sgf1", "ppm", "report"]},
    }
    d.update(extra)
    return d


def _biased(eta, xi):
    side = {"type": "neumann", "eta": eta, "xi": xi}
    return {"left": dict(side), "right": dict(side)}


def _terminal_velocity(alpha, beta):
    # power balance 2*pi*beta = 8*alpha*gamma*u
    k = math.pi * beta / (4 * alpha)
    return k / math.sqrt(1 + k * k)


def _fluxon(name, T=50000.0, dx=0.05, dt=0.04, bounds=CLOSED, alpha=0.0, beta=0.0):
    return _cfg(
        name,
        {"L": 100.0, "dx": dx, "dt": dt},
        {"kind": "sg", "alpha": alpha, "beta": beta},
        {"type": "kink", "x0": 0.0, "u": 0.55},
        bounds, T,
        probes=[{"x": 0.0, "quantity": "V", "name": "V0"}],
    )


def _microshort(name, beta, T):
    alpha = 0.005
    return _cfg(
        name,
        {"L": 40.0, "dx": 0.05, "dt": 0.04},
        {"kind": "sg", "alpha": alpha, "beta": beta, "microshorts": [{"x": -10.0, "mu": 1.0}]},
        # antifluxon: the bias pushes it toward -x, onto the short
        {"type": "kink", "x0": 10.0, "u": -_terminal_velocity(alpha, beta), "polarity": -1},
        CLOSED, T,
        probes=[{"x": -10.0, "quantity": "phi", "name": "phi_short"}],
    )


def _capacitor(name, mu=None, Q=4.0, half=2600.0, T=25000.0, kind="massless_schwinger"):
    model = {"kind": kind, "g": 1.2, "sources": [{"type": "capacitor", "Q": Q, "length": 40.0}]}
    if mu is not None:
        model["mu"] = mu
    return _cfg(
        name,
        {"L": 2 * half, "dx": 1 / 3, "dt": 0.125},
        model,
        {"type": "zero"},
        OUTGOING, T,
        probes=[
            {"x": 100.0, "quantity": "J", "name": "J100"},
            {"x": 0.0, "quantity": "J", "name": "J0"},
            {"x": 0.0, "quantity": "E", "name": "E0"},
            {"x": 100.0, "quantity": "E", "name": "E100"},
            {"x": 100.0, "quantity": "phi_x", "name": "phix100"},
        ],
    )


def _atom(name, x0, dynamical_mass=True, lo=-300.0, hi=300.0, T=6000.0, dx=0.1):
    g = 0.3
    return _cfg(
        name,
        {"L": hi - lo, "dx": dx, "dt": 0.8 * dx, "x_min": lo},
        {"kind": "massive_schwinger", "g": g, "dynamical_mass": dynamical_mass,
         "sources": [{"type": "point_charge", "Q": -2 * math.pi * g, "x_c": 0.0}]},
        {"type": "kink", "x0": x0, "u": 0.55},
        OUTGOING, T,
        probes=[{"x": 0.0, "quantity": "E", "name": "E0"}],
    )


def _pair(name, g, u, d, half=500.0, T=4000.0, dx=0.1):
    return _cfg(
        name,
        {"L": 2 * half, "dx": dx, "dt": 0.8 * dx},
        {"kind": "massive_schwinger", "g": g},
        {"type": "kink_antikink", "x0": 0.0, "u": u, "d": d},
        OUTGOING, T,
        probes=[{"x": 0.0, "quantity": "phi", "name": "phi0"}],
    )


def _constriction(name, mu_cs, segments, lo, hi, x0, bounds, T):
    return _cfg(
        name,
        {"L": hi - lo, "dx": 0.05, "dt": 0.04, "x_min": lo},
        {"kind": "sg", "mu": {"constriction": {"segments": segments, "mu_inside": mu_cs, "taper": 10.0}}},
        {"type": "kink", "x0": x0, "u": 0.85},
        bounds, T,
    )


def _pulse(name, A, omega, sigma, T_p, T=250.0):
    left = {"type": "pulse", "A": A, "omega": omega, "sigma_rise": sigma, "sigma_fall": sigma, "T_p": T_p}
    return _cfg(
        name,
        {"L": 160.0, "dx": 0.02, "dt": 0.016, "x_min": 0.0},
        {"kind": "sg"},
        {"type": "zero"},
        {"left": left, "right": {"type": "neumann"}}, T,
        probes=[{"x": 0.0, "quantity": "phi", "name": "phi_left"}],
    )


PRESETS: dict[str, dict] = {
    d["name"]: d
    for d in [
        _fluxon("bare_fluxon"),
        _fluxon("bare_fluxon_coarse", dx=0.4, dt=0.32),
        _fluxon("biased_fluxon", bounds=_biased(0.002, 0.006)),
        _fluxon("lossy_fluxon", T=1000.0, bounds=_biased(0.002, 0.006), alpha=0.003),
        _fluxon("lossy_fluxon_strong", T=1000.0, bounds=_biased(0.002, 0.006), alpha=0.03),
        _fluxon("lossy_biased_fluxon", T=1000.0, bounds=_biased(0.002, 0.006), alpha=0.003, beta=0.001),
        _cfg("lossy_breather", {"L": 100.0, "dx": 0.05, "dt": 0.04},
             {"kind": "sg", "alpha": 0.003}, {"type": "breather", "nu": 1.0, "u": 0.55},
             _biased(0.002, 0.006), 1000.0),
        _cfg("vortex_antivortex", {"L": 100.0, "dx": 0.05, "dt": 0.04}, {"kind": "sg"},
             {"type": "kink_antikink", "u": 0.55, "d": 66.0}, CLOSED, 1000.0),
        _cfg("breather", {"L": 100.0, "dx": 0.05, "dt": 0.04}, {"kind": "sg"},
             {"type": "breather", "nu": 1.0, "u": 0.55}, CLOSED, 1000.0),
        _cfg("vortex_antivortex_lossy_slow", {"L": 100.0, "dx": 0.05, "dt": 0.04}, {"kind": "sg", "alpha": 0.003},
             {"type": "kink_antikink", "u": 0.4, "d": 66.0}, CLOSED, 1500.0),
        _cfg("vortex_antivortex_lossy_fast", {"L": 100.0, "dx": 0.05, "dt": 0.04}, {"kind": "sg", "alpha": 0.003},
             {"type": "kink_antikink", "u": 0.55, "d": 66.0}, CLOSED, 1500.0),
        _microshort("microshort_pinned", 0.002, 3000.0),
        _microshort("microshort_pass", 0.005, 200.0),
        _capacitor("capacitor_massless"),
        _capacitor("capacitor_massive", mu=0.1, Q=100.0, half=1200.0, T=2000.0, kind="massive_schwinger"),
        _atom("schwinger_atom", -10.0),
        _atom("schwinger_atom_x0_0", 0.0),
        _atom("schwinger_atom_unscreened", 0.0, dynamical_mass=False, lo=-2200.0, hi=200.0, T=2000.0),
        _pair("positronium", 0.3, 0.55, 22.0),
        _pair("positronium_fractal", 0.32, 0.3, 6.0, half=300.0, T=1500.0),
        _constriction("constriction", 10.0, [[0.0, 40.0]], -100.0, 100.0, -60.0, CLOSED, 400.0),
        _constriction("constriction_mild", 3.0, [[0.0, 40.0]], -100.0, 100.0, -60.0, CLOSED, 400.0),
        _constriction("constriction_triple", 3.0, [[-90.0, 40.0], [0.0, 40.0], [90.0, 40.0]],
                      -250.0, 250.0, -150.0, OUTGOING, 600.0),
        _pulse("pulse_multi", 1.5, 0.8, 10.0, 250.0),
        _pulse("pulse_tuned", 1.4, 0.6, 10.0, 70.0),
    ]
}


def _arange(lo, hi, step):
    n = int(round((hi - lo) / step))
    return [round(lo + k * step, 10) for k in range(n + 1)]


SWEEPS: dict[str, dict] = {
    "positronium_fractal_sweep": {
        "base": "positronium_fractal",
        # d/u is held at 20, so u and d share one axis
        "axes": [{"paths": ["ic.u", "ic.d"], "scale": [1.0, 20.0], "values": _arange(0.05, 0.70, 0.01)}],
        "reducers": ["bound_vs_scattered", "final_energy"],
    },
    "pulse_sweep": {
        "base": "pulse_tuned",
        "axes": [
            {"paths": ["boundaries.left.A"], "values": _arange(1.0, 2.0, 0.1)},
            {"paths": ["boundaries.left.sigma_rise", "boundaries.left.sigma_fall"], "values": _arange(5.0, 15.0, 1.0)},
            {"paths": ["boundaries.left.omega"], "values": _arange(0.5, 0.9, 0.1)},
            {"paths": ["boundaries.left.T_p"], "values": _arange(40.0, 80.0, 2.0)},
        ],
        "reducers": ["soliton_census"],
    },
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def preset_dict(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}") from None


def get_preset(name: str, overrides=()) -> SimulationConfig:
    return from_dict(apply_overrides(preset_dict(name), overrides))


def describe(name: str) -> str:
    d = PRESETS[name]
    g = d["grid"]
    return (f"{name}: model={d['model']['kind']} ic={d['ic']['type']} L={g['L']:g} "
            f"dx={g['dx']:.4g} dt={g['dt']:.4g} T={d['T_max']:g}")


def sweep_size(name: str) -> int:
    return int(np.prod([len(a["values"]) for a in SWEEPS[name]["axes"]]))

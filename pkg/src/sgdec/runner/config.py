"""JSON run configuration: schema, validation and construction of solver objects.

A config is a JSON object with ``schema_version`` 1.  The top-level keys are
``name``, ``grid``, ``model``, ``ic``, ``boundaries``, ``T_max``, ``probes``,
``dump``, ``outputs`` and ``method``; see ``docs/config.md`` for the field
reference.  Validation collects every problem it finds and reports each with
its dotted parameter path.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .. import analytic, boundary as bnd
from ..mesh import SpacetimeGrid, build_grid
from ..model import CapacitorSource, ConstrictionProfile, Microshort, PhysicsModel, PointChargeSource

SCHEMA_VERSION = 1

MODEL_KINDS = ("sg", "massless_schwinger", "massive_schwinger")
METHODS = ("dec", "euler", "cn")
QUANTITIES = ("phi", "phi_t", "phi_x", "J", "V", "rho", "H", "E")
FORMATS = ("csv", "sgf1", "ppm", "report")


class ConfigError(Exception):
    """Raised with every validation problem, not just the first."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class GridConfig:
    L: float
    dx: float
    dt: float
    x_min: float | None = None  # default centres the domain on 0


@dataclass
class ModelConfig:
    kind: str = "sg"
    alpha: float = 0.0
    beta: float = 0.0
    g: float = 0.0
    mu: Any = None  # number, {"constriction": {...}} or None for the kind's default
    microshorts: list = field(default_factory=list)
    sources: list = field(default_factory=list)
    dynamical_mass: bool = True


@dataclass
class DumpConfig:
    count: int | None = 500
    every: int | None = None
    times: list | None = None


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "report"])


@dataclass
class SimulationConfig:
    grid: GridConfig
    model: ModelConfig
    ic: dict
    boundaries: dict
    T_max: float
    name: str = "run"
    probes: list = field(default_factory=list)
    dump: DumpConfig = field(default_factory=DumpConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    method: str = "dec"
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)

    # construction -------------------------------------------------------

    def build_grid(self) -> SpacetimeGrid:
        g = self.grid
        x_min = -g.L / 2 if g.x_min is None else g.x_min
        return build_grid(g.L, g.dx, g.dt, x_min)

    def build_model(self) -> PhysicsModel:
        m = self.model
        background = _background(m.sources)
        if m.kind == "sg":
            mu = 1.0 if m.mu is None else _mu_profile(m.mu)
            shorts = [Microshort(float(s["x"]), float(s["mu"])) for s in m.microshorts]
            return PhysicsModel(alpha=m.alpha, beta=m.beta, mu=mu, microshorts=tuple(shorts),
                                g=m.g, background=background)
        if m.kind == "massless_schwinger":
            return PhysicsModel(alpha=m.alpha, mass2=m.g**2, mu=0.0, g=m.g, background=background)
        mu = 1.0 if m.mu is None else _mu_profile(m.mu)
        return PhysicsModel(alpha=m.alpha, beta=m.beta, mass2=m.g**2 if m.dynamical_mass else 0.0,
                            mu=mu, g=m.g, background=background)

    def build_ic(self) -> analytic.InitialCondition:
        return _ic(self.ic)

    def build_boundaries(self) -> bnd.BoundarySpec:
        return bnd.BoundarySpec(_side(self.boundaries["left"]), _side(self.boundaries["right"]))

    def dump_stride(self) -> int | list[int] | None:
        """Step stride for snapshots, or a sorted step list when explicit times are given."""
        n_steps = max(1, int(math.floor(self.T_max / self.grid.dt + 1e-9)))
        if self.dump.times:
            # the first dumpable layer is j=1; earlier times round up to it
            return sorted({min(n_steps, max(1, int(round(t / self.grid.dt)))) for t in self.dump.times})
        if self.dump.every:
            return int(self.dump.every)
        if self.dump.count:
            return max(1, n_steps // int(self.dump.count))
        return None


# builders ------------------------------------------------------------------


def _background(sources: list):
    parts = []
    for s in sources:
        if s["type"] == "capacitor":
            parts.append(CapacitorSource(float(s["Q"]), float(s["length"]), float(s.get("center", 0.0))))
        else:
            parts.append(PointChargeSource(float(s["Q"]), float(s.get("x_c", 0.0))))
    if not parts:
        return None
    if len(parts) == 1:
        return parts[0]
    return _SumBackground(tuple(parts))


@dataclass(frozen=True)
class _SumBackground:
    parts: tuple

    def __call__(self, x):
        return sum(p(x) for p in self.parts)


def _mu_profile(spec):
    if isinstance(spec, (int, float)):
        return float(spec)
    c = spec["constriction"]
    return ConstrictionProfile(
        segments=tuple((float(a), float(b)) for a, b in c["segments"]),
        mu_inside=float(c["mu_inside"]),
        taper=float(c.get("taper", 10.0)),
        mu_outside=float(c.get("mu_outside", 1.0)),
    )


def _ic(spec: dict) -> analytic.InitialCondition:
    kind = spec["type"]
    if kind == "zero":
        return analytic.Zero()
    if kind == "kink":
        return analytic.Kink(float(spec.get("x0", 0.0)), float(spec.get("u", 0.0)),
                             int(spec.get("n", 0)), int(spec.get("polarity", 1)))
    if kind == "kink_antikink":
        return analytic.KinkAntikinkPair(float(spec.get("x0", 0.0)), float(spec["u"]), float(spec["d"]))
    if kind == "breather":
        return analytic.Breather(float(spec["nu"]), float(spec.get("x0", 0.0)),
                                 float(spec.get("t0", 0.0)), float(spec.get("u", 0.0)))
    if kind == "sum":
        return analytic.Sum(tuple(_ic(p) for p in spec["parts"]))
    raise ValueError(f"unknown ic type {kind!r}")


def _side(spec: dict):
    kind = spec["type"]
    if kind == "neumann":
        return bnd.NeumannBias(float(spec.get("eta", 0.0)), float(spec.get("xi", 0.0)))
    if kind == "dirichlet":
        return bnd.Dirichlet(float(spec.get("value", 0.0)))
    if kind == "pulse":
        return bnd.Pulse(float(spec["A"]), float(spec["omega"]), float(spec["sigma_rise"]),
                         float(spec["sigma_fall"]), float(spec["T_p"]))
    if kind == "outgoing":
        U = spec.get("U")
        return bnd.Outgoing(int(spec.get("order", 1)), None if U is None else float(U))
    raise ValueError(f"unknown boundary type {kind!r}")


# validation ----------------------------------------------------------------

_TOP_KEYS = {"schema_version", "name", "grid", "model", "ic", "boundaries", "T_max",
             "probes", "dump", "outputs", "method"}
_GRID_KEYS = {"L", "dx", "dt", "x_min"}
_MODEL_KEYS = {"kind", "alpha", "beta", "g", "mu", "microshorts", "sources", "dynamical_mass"}
_IC_KEYS = {
    "zero": {"type"},
    "kink": {"type", "x0", "u", "n", "polarity"},
    "kink_antikink": {"type", "x0", "u", "d"},
    "breather": {"type", "nu", "x0", "t0", "u"},
    "sum": {"type", "parts"},
}
_SIDE_KEYS = {
    "neumann": {"type", "eta", "xi"},
    "dirichlet": {"type", "value"},
    "pulse": {"type", "A", "omega", "sigma_rise", "sigma_fall", "T_p"},
    "outgoing": {"type", "order", "U"},
}
_SOURCE_KEYS = {"capacitor": {"type", "Q", "length", "center"}, "point_charge": {"type", "Q", "x_c"}}


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def err(self, path: str, msg: str):
        self.errors.append(f"{path}: {msg}")

    def keys(self, obj, allowed: set, path: str, required: set = frozenset()) -> bool:
        if not isinstance(obj, dict):
            self.err(path, "expected an object")
            return False
        for k in sorted(set(obj) - allowed):
            self.err(f"{path}.{k}" if path else k, "unknown key")
        for k in sorted(required - set(obj)):
            self.err(f"{path}.{k}" if path else k, "missing required key")
        return True

    def num(self, obj, key, path, *, required=False, positive=False, nonneg=False, default=None):
        p = f"{path}.{key}" if path else key
        if key not in obj or obj[key] is None:
            if required:
                if key in obj:
                    self.err(p, "must not be null")
                return None
            return default
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.err(p, f"expected a finite number, got {v!r}")
            return None
        if positive and not v > 0:
            self.err(p, f"must be > 0, got {v}")
        if nonneg and v < 0:
            self.err(p, f"must be >= 0, got {v}")
        return float(v)


def validate(raw: dict) -> list[str]:
    """Every problem with ``raw`` as a list of ``path: message`` strings."""
    c = _Checker()
    if not c.keys(raw, _TOP_KEYS, "", {"schema_version", "grid", "model", "ic", "boundaries", "T_max"}):
        return c.errors
    if "schema_version" in raw and raw["schema_version"] != SCHEMA_VERSION:
        c.err("schema_version", f"unsupported version {raw['schema_version']!r} (expected {SCHEMA_VERSION})")

    grid = raw.get("grid")
    L = dx = dt = x_min = None
    if grid is not None and c.keys(grid, _GRID_KEYS, "grid", {"L", "dx", "dt"}):
        L = c.num(grid, "L", "grid", required=True, positive=True)
        dx = c.num(grid, "dx", "grid", required=True, positive=True)
        dt = c.num(grid, "dt", "grid", required=True, positive=True)
        x_min = c.num(grid, "x_min", "grid")
        if dx and dt and dt >= dx:
            c.err("grid.dt", f"CFL stability rule requires dt < dx (got dt={dt}, dx={dx})")
        if L and dx and L / dx < 2 - 1e-9:
            c.err("grid.dx", "domain must hold at least 3 vertices")
    if L is not None and x_min is None:
        x_min = -L / 2
    in_domain = (lambda x: x_min - 1e-9 <= x <= x_min + L + 1e-9) if L is not None else (lambda x: True)

    T = c.num(raw, "T_max", "", required=True, nonneg=True)
    model = raw.get("model")
    if model is not None:
        _check_model(c, model, in_domain)
    if "ic" in raw:
        _check_ic(c, raw["ic"], "ic")
    bounds = raw.get("boundaries")
    if bounds is not None and c.keys(bounds, {"left", "right"}, "boundaries", {"left", "right"}):
        for side in ("left", "right"):
            if side in bounds:
                _check_side(c, bounds[side], f"boundaries.{side}")

    probes = raw.get("probes", [])
    if not isinstance(probes, list):
        c.err("probes", "expected a list")
    else:
        names = set()
        for i, p in enumerate(probes):
            path = f"probes[{i}]"
            if not c.keys(p, {"x", "quantity", "name"}, path, {"x", "quantity"}):
                continue
            x = c.num(p, "x", path, required=True)
            if x is not None and not in_domain(x):
                c.err(f"{path}.x", f"probe at x={x} lies outside the domain")
            if p.get("quantity") not in QUANTITIES:
                c.err(f"{path}.quantity", f"must be one of {', '.join(QUANTITIES)}")
            name = p.get("name") or f"{p.get('quantity')}@{p.get('x')}"
            if name in names:
                c.err(f"{path}.name", f"duplicate probe name {name!r}")
            names.add(name)

    dump = raw.get("dump")
    if dump is not None and c.keys(dump, {"count", "every", "times"}, "dump"):
        for k in ("count", "every"):
            v = dump.get(k)
            if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 1):
                c.err(f"dump.{k}", "must be a positive integer")
        times = dump.get("times")
        if times is not None:
            if not isinstance(times, list) or not all(isinstance(t, (int, float)) for t in times):
                c.err("dump.times", "expected a list of numbers")
            elif T is not None and any(t < 0 or t > T for t in times):
                c.err("dump.times", "times must lie in [0, T_max]")

    outputs = raw.get("outputs")
    if outputs is not None and c.keys(outputs, {"directory", "formats"}, "outputs"):
        fm = outputs.get("formats", [])
        if not isinstance(fm, list) or any(f not in FORMATS for f in fm):
            c.err("outputs.formats", f"each format must be one of {', '.join(FORMATS)}")
        if "directory" in outputs and not isinstance(outputs["directory"], str):
            c.err("outputs.directory", "expected a string")

    method = raw.get("method", "dec")
    if method not in METHODS:
        c.err("method", f"must be one of {', '.join(METHODS)}")
    elif method == "cn" and isinstance(model, dict):
        if model.get("kind") != "massless_schwinger":
            c.err("method", "Crank-Nicolson is only available for the linear massless model")
    return c.errors


def _check_model(c: _Checker, m, in_domain):
    if not c.keys(m, _MODEL_KEYS, "model", {"kind"}):
        return
    kind = m.get("kind")
    if kind not in MODEL_KINDS:
        c.err("model.kind", f"must be one of {', '.join(MODEL_KINDS)}")
    c.num(m, "alpha", "model", nonneg=True)
    c.num(m, "beta", "model")
    g = c.num(m, "g", "model", nonneg=True)
    if kind in ("massless_schwinger", "massive_schwinger") and not g:
        c.err("model.g", f"{kind} needs g > 0")
    mu = m.get("mu")
    if kind == "massless_schwinger" and mu not in (None, 0, 0.0):
        c.err("model.mu", "the massless model has no sine term; leave mu unset")
    if isinstance(mu, dict):
        if c.keys(mu, {"constriction"}, "model.mu", {"constriction"}):
            cs = mu["constriction"]
            if c.keys(cs, {"segments", "mu_inside", "taper", "mu_outside"}, "model.mu.constriction",
                       {"segments", "mu_inside"}):
                c.num(cs, "mu_inside", "model.mu.constriction", required=True, nonneg=True)
                c.num(cs, "taper", "model.mu.constriction", nonneg=True)
                c.num(cs, "mu_outside", "model.mu.constriction", nonneg=True)
                segs = cs.get("segments")
                if not isinstance(segs, list) or not all(
                    isinstance(s, list) and len(s) == 2 and all(isinstance(v, (int, float)) for v in s) for s in segs
                ):
                    c.err("model.mu.constriction.segments", "expected a list of [center, length] pairs")
    elif mu is not None:
        c.num(m, "mu", "model", nonneg=True)
    shorts = m.get("microshorts", [])
    if shorts and kind != "sg":
        c.err("model.microshorts", "microshorts are only defined for the sg model")
    if not isinstance(shorts, list):
        c.err("model.microshorts", "expected a list")
        shorts = []
    for i, s in enumerate(shorts):
        path = f"model.microshorts[{i}]"
        if c.keys(s, {"x", "mu"}, path, {"x", "mu"}):
            x = c.num(s, "x", path, required=True)
            c.num(s, "mu", path, required=True, positive=True)
            if x is not None and not in_domain(x):
                c.err(f"{path}.x", f"microshort at x={x} lies outside the domain")
    sources = m.get("sources", [])
    if not isinstance(sources, list):
        c.err("model.sources", "expected a list")
        sources = []
    for i, s in enumerate(sources):
        path = f"model.sources[{i}]"
        if not isinstance(s, dict) or s.get("type") not in _SOURCE_KEYS:
            c.err(f"{path}.type", f"must be one of {', '.join(_SOURCE_KEYS)}")
            continue
        if c.keys(s, _SOURCE_KEYS[s["type"]], path, {"type", "Q"} | ({"length"} if s["type"] == "capacitor" else set())):
            c.num(s, "Q", path, required=True)
            if s["type"] == "capacitor":
                c.num(s, "length", path, required=True, positive=True)
                c.num(s, "center", path)
            else:
                c.num(s, "x_c", path)
    if not isinstance(m.get("dynamical_mass", True), bool):
        c.err("model.dynamical_mass", "expected true or false")


def _check_ic(c: _Checker, ic, path: str):
    if not isinstance(ic, dict) or ic.get("type") not in _IC_KEYS:
        c.err(f"{path}.type", f"must be one of {', '.join(_IC_KEYS)}")
        return
    kind = ic["type"]
    req = {"type"} | {"kink_antikink": {"u", "d"}, "breather": {"nu"}, "sum": {"parts"}}.get(kind, set())
    if not c.keys(ic, _IC_KEYS[kind], path, req):
        return
    for k in _IC_KEYS[kind] - {"type", "parts"}:
        c.num(ic, k, path)
    u = ic.get("u", 0.0)
    if isinstance(u, (int, float)) and not abs(u) < 1:
        c.err(f"{path}.u", f"|u| must be < 1 (light cone), got {u}")
    if kind == "kink_antikink":
        if ic.get("u") == 0:
            c.err(f"{path}.u", "pair velocity must be non-zero")
        d = ic.get("d")
        if isinstance(d, (int, float)) and d <= 0:
            c.err(f"{path}.d", "must be > 0")
    if kind == "kink":
        if ic.get("polarity", 1) not in (1, -1):
            c.err(f"{path}.polarity", "must be +1 or -1")
        if not isinstance(ic.get("n", 0), int):
            c.err(f"{path}.n", "must be an integer")
    if kind == "breather":
        nu = ic.get("nu")
        if isinstance(nu, (int, float)) and not 0 < nu < math.pi / 2:
            c.err(f"{path}.nu", "must lie in (0, pi/2)")
    if kind == "sum":
        parts = ic.get("parts")
        if not isinstance(parts, list) or not parts:
            c.err(f"{path}.parts", "expected a non-empty list")
        else:
            for i, p in enumerate(parts):
                _check_ic(c, p, f"{path}.parts[{i}]")


def _check_side(c: _Checker, s, path: str):
    if not isinstance(s, dict) or s.get("type") not in _SIDE_KEYS:
        c.err(f"{path}.type", f"must be one of {', '.join(_SIDE_KEYS)}")
        return
    kind = s["type"]
    req = {"type"} | ({"A", "omega", "sigma_rise", "sigma_fall", "T_p"} if kind == "pulse" else set())
    if not c.keys(s, _SIDE_KEYS[kind], path, req):
        return
    if kind == "pulse":
        c.num(s, "A", path, required=True)
        c.num(s, "omega", path, required=True)
        c.num(s, "sigma_rise", path, required=True, positive=True)
        c.num(s, "sigma_fall", path, required=True, positive=True)
        c.num(s, "T_p", path, required=True, nonneg=True)
    elif kind == "outgoing":
        if s.get("order", 1) not in (0, 1):
            c.err(f"{path}.order", "outgoing order must be 0 or 1")
        c.num(s, "U", path, nonneg=True)
    elif kind == "neumann":
        c.num(s, "eta", path)
        c.num(s, "xi", path)
    else:
        c.num(s, "value", path)


# loading -------------------------------------------------------------------


def from_dict(raw: dict) -> SimulationConfig:
    errors = validate(raw)
    if errors:
        raise ConfigError(errors)
    raw = copy.deepcopy(raw)
    return SimulationConfig(
        schema_version=raw["schema_version"],
        name=raw.get("name", "run"),
        grid=GridConfig(**raw["grid"]),
        model=ModelConfig(**raw["model"]),
        ic=raw["ic"],
        boundaries=raw["boundaries"],
        T_max=float(raw["T_max"]),
        probes=raw.get("probes", []),
        dump=DumpConfig(**raw["dump"]) if "dump" in raw else DumpConfig(),
        outputs=OutputConfig(**raw["outputs"]) if "outputs" in raw else OutputConfig(),
        method=raw.get("method", "dec"),
    )


def parse_config_text(text: str, source: str = "<string>") -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"{source}:{e.lineno}:{e.colno}: parse error: {e.msg}"]) from None


def load_config(path: str | Path, overrides: list[str] = ()) -> SimulationConfig:
    path = Path(path)
    raw = parse_config_text(path.read_text(), str(path))
    return from_dict(apply_overrides(raw, overrides))


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``a.b.c=value`` assignments; values are parsed as JSON when possible."""
    raw = copy.deepcopy(raw)
    errors = []
    for item in overrides:
        if "=" not in item:
            errors.append(f"override {item!r}: expected key=value")
            continue
        key, _, text = item.partition("=")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = key.strip().split(".")
        for p in parts[:-1]:
            if not isinstance(node, dict):
                break
            node = node.setdefault(p, {})
        if not isinstance(node, dict):
            errors.append(f"override {item!r}: {key} does not name an object field")
            continue
        node[parts[-1]] = value
    if errors:
        raise ConfigError(errors)
    return raw

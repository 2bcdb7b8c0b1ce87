"""``sgdec`` command line.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical blow-up,
3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .. import diagnostics as dg
from ..reference import loglog_slope, profile_runtimes
from ..stepper import BlowUpError, FieldState
from . import io
from .config import ConfigError, apply_overrides, from_dict, load_config, parse_config_text
from .execute import simulate
from .presets import SWEEPS, describe, get_preset, preset_dict, preset_names, sweep_size
from .sweep import Axis, SweepSpec, count_alternations, run_sweep, sweep_from_preset

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("sgdec")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _config_from_args(args, extra_overrides=()):
    overrides = list(args.override or []) + list(extra_overrides)
    if args.preset:
        if args.config:
            raise ConfigError(["give either a config file or --preset, not both"])
        return get_preset(args.preset, overrides)
    if not args.config:
        raise ConfigError(["a config file or --preset NAME is required"])
    return load_config(args.config, overrides)


def cmd_run(args) -> int:
    extra = [f'method="{args.method}"'] if args.method else []
    cfg = _config_from_args(args, extra)
    out = Path(args.out) if args.out else Path(cfg.outputs.directory)
    o = simulate(cfg, out)
    s = o.summary()
    print(f"{cfg.name}: {s['n_steps']} steps in {s['wall_time_s']:.2f}s, "
          f"max face residual {s['max_face_residual']:.2e}, outputs in {out}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in preset_names():
        print(describe(name))
    for name in sorted(SWEEPS):
        print(f"{name}: sweep over {SWEEPS[name]['base']} with {sweep_size(name)} points")
    return EXIT_OK


def _load_sweep(args) -> SweepSpec:
    if args.preset:
        return sweep_from_preset(args.preset, args.jobs)
    if not args.spec:
        raise ConfigError(["a sweep spec file or --preset NAME is required"])
    raw = parse_config_text(Path(args.spec).read_text(), args.spec)
    base = raw.get("base")
    if isinstance(base, str):
        base = preset_dict(base)
    base = apply_overrides(base, raw.get("overrides", []))
    from_dict(base)  # validate once up front
    return SweepSpec(base=base, axes=[Axis.from_dict(a) for a in raw.get("axes", [])],
                     reducers=raw.get("reducers", ["final_energy"]), max_parallel=args.jobs)


def cmd_sweep(args) -> int:
    spec = _load_sweep(args)
    report = Path(args.report)
    cache = Path(args.cache) if args.cache else report.with_suffix(".cache.jsonl")

    def progress(k, n):
        if k % max(1, n // 20) == 0 or k == n:
            log.info("sweep %d/%d", k, n)

    rows = run_sweep(spec, report, cache, progress)
    failed = sum(1 for r in rows if r.get("status") != "ok")
    line = f"{len(rows)} points written to {report} ({failed} failed)"
    if "bound_vs_scattered" in spec.reducers:
        line += f"; bound/scattered alternations: {count_alternations(rows)}"
    print(line)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    data = io.read_sgf1(args.file)
    model = grid = None
    if args.preset or args.config:
        cfg = _config_from_args(args)
        grid, model = cfg.build_grid(), cfg.build_model()
        if grid.nx != data.nx:
            raise ConfigError([f"config grid has nx={grid.nx}, file has nx={data.nx}"])
    from ..mesh import SpacetimeGrid

    grid = grid or SpacetimeGrid(nx=data.nx, dx=data.dx, dt=data.dt, x_min=data.x_min)
    rows = []
    for k in range(len(data.t)):
        st = FieldState(j=int(round(data.t[k] / data.dt)), varphi=data.phi[k], phi_x=data.phi_x[k],
                        phi_t_prev=data.phi_t[k], bc_memory=None)
        kinks = dg.track_kinks(st, grid)
        row = {
            "t": float(data.t[k]),
            "compatibility_defect": float(np.max(np.abs(np.diff(st.varphi) - st.phi_x))) if data.nx > 1 else 0.0,
            "winding": float(st.varphi[-1] - st.varphi[0]) / (2 * np.pi),
            "n_kinks": len(kinks),
            "kink_positions": " ".join(f"{kk.position:.4f}" for kk in kinks),
        }
        if model is not None:
            # one temporal edge per snapshot, so the kinetic term uses it on both sides
            e = dg.total_energy(st, st.phi_t_prev, grid, model)
            row.update(energy_lagged=e.total, charge=-float(model.g) * float(st.varphi[-1] - st.varphi[0]))
        rows.append(row)
    if args.out:
        io.write_report_csv(args.out, rows)
        print(f"{len(rows)} snapshots diagnosed, report in {args.out}")
    else:
        w = sys.stdout
        keys = list(rows[0]) if rows else []
        w.write(",".join(keys) + "\n")
        for r in rows:
            w.write(",".join(str(r[k]) for k in keys) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in ("dec", "euler", "cn")]
    if bad:
        raise ConfigError([f"--methods: unknown method(s) {', '.join(bad)}"])
    base = _config_from_args(args)
    out = Path(args.out or f"out/compare_{base.name}")
    series, summary = {}, []
    for m in methods:
        cfg = from_dict({**base.to_dict(), "method": m})
        o = simulate(cfg, out / m)
        e = o.energy
        series[m] = e
        tail = e["total"][e["t"] > args.settle] if e else np.zeros(0)
        summary.append({"method": m, "wall_time_s": o.wall_time,
                        "energy_first": float(e["total"][0]), "energy_last": float(e["total"][-1]),
                        "energy_std_after_settle": float(np.std(tail)) if tail.size else float("nan")})
    n = min(len(s["t"]) for s in series.values())
    rows = []
    for k in range(n):
        row = {"t": float(series[methods[0]]["t"][k])}
        for m in methods:
            row[f"energy_{m}"] = float(series[m]["total"][k])
        rows.append(row)
    io.write_report_csv(out / "energy_compare.csv", rows)
    io.write_report_csv(out / "compare_summary.csv", summary)
    for s in summary:
        print(f"{s['method']:>6}: E {s['energy_first']:.6g} -> {s['energy_last']:.6g}, "
              f"std after t={args.settle:g}: {s['energy_std_after_settle']:.3e}, {s['wall_time_s']:.2f}s")
    return EXIT_OK


def cmd_profile(args) -> int:
    res = [float(v) for v in args.resolutions.split(",")]
    methods = [m.strip() for m in args.methods.split(",")]
    rows = profile_runtimes(res, args.T, methods, args.repeats)
    table = [{"method": r.method, "dx": r.dx, "nx": r.nx, "n_steps": r.n_steps,
              "gridpoints": r.gridpoints, "seconds": r.seconds} for r in rows]
    for r in table:
        print(f"{r['method']:>6} dx={r['dx']:<6g} gridpoints={r['gridpoints']:<12d} {r['seconds']:.3f}s")
    if len(res) > 1:
        for m in methods:
            print(f"{m} log-log slope: {loglog_slope(rows, m):.3f}")
    if args.out:
        io.write_report_csv(args.out, table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sgdec", description="Edge-field integrator for sine-Gordon type models")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def config_args(sp, positional="config"):
        sp.add_argument(positional, nargs="?", help="JSON config file")
        sp.add_argument("--preset", help="named preset instead of a file")
        sp.add_argument("--override", nargs="*", metavar="KEY=VALUE", help="e.g. grid.dt=0.125")

    r = sub.add_parser("run", help="run one simulation")
    config_args(r)
    r.add_argument("--out", help="output directory")
    r.add_argument("--method", choices=("dec", "euler", "cn"))
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("sweep", help="run a parameter sweep")
    s.add_argument("spec", nargs="?", help="JSON sweep spec")
    s.add_argument("--preset", choices=sorted(SWEEPS))
    s.add_argument("--report", default="sweep_report.csv")
    s.add_argument("--cache", help="resume cache (default: <report>.cache.jsonl)")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(fn=cmd_sweep)

    pr = sub.add_parser("presets", help="list presets")
    pr.set_defaults(fn=cmd_presets)

    d = sub.add_parser("diagnose", help="recompute diagnostics from an SGF1 file")
    d.add_argument("file")
    d.add_argument("--config")
    d.add_argument("--preset")
    d.add_argument("--override", nargs="*")
    d.add_argument("--out", help="report CSV (default: stdout)")
    d.set_defaults(fn=cmd_diagnose)

    c = sub.add_parser("compare", help="run one config with several methods")
    config_args(c)
    c.add_argument("--methods", default="dec,euler,cn")
    c.add_argument("--settle", type=float, default=100.0, help="start of the energy statistics window")
    c.add_argument("--out")
    c.set_defaults(fn=cmd_compare)

    f = sub.add_parser("profile", help="runtime table on the bare-fluxon case")
    f.add_argument("--resolutions", default="0.05,0.1,0.2,0.4")
    f.add_argument("--methods", default="dec,euler")
    f.add_argument("--T", type=float, default=50000.0)
    f.add_argument("--repeats", type=int, default=1)
    f.add_argument("--out")
    f.set_defaults(fn=cmd_profile)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.fn(args)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as e:
        print(f"numerical blow-up at t={e.t:g}: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except (OSError, io.OutputError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

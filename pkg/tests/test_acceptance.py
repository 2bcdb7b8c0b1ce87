"""Acceptance gate: one test per criterion, each printing a single result line.

Criteria 2, 10 and 13 are marked ``slow`` but still run by default; deselect
them with ``-m "not slow"`` for a quick pass.
"""
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from sgdec import experiments as ex
from sgdec.runner.presets import preset_names

ROOT = Path(__file__).resolve().parent.parent


def verdict(n: int, ok: bool, detail: str):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def meson():
    return ex.capacitor_meson(T=5000.0)


def test_criterion_01_discrete_charge_conservation():
    reports = ex.preset_face_residuals(preset_names(), max_steps=2000)
    worst = max(reports, key=lambda r: r.max_residual)
    sums = ex.rational_face_sums(4, 4)
    ok = worst.max_residual <= 5e-13 and all(s == 0 for s in sums)
    verdict(1, ok, f"max face residual {worst.max_residual:.2e} ({worst.name}) over {len(reports)} presets, "
                   f"{len(sums)} rational face sums, nonzero: {sum(s != 0 for s in sums)}")


@pytest.mark.slow
def test_criterion_02_long_time_fluxon():
    r = ex.fluxon_collisions("dec", 0.05, 0.04, 50000.0)
    # the finite domain clips the kink tail, so compare the topological number
    n_wind = round(abs(r.winding) / (2 * math.pi))
    ok = r.collisions == 278 and n_wind == 1 and abs(r.speed - 0.55) <= 0.005
    verdict(2, ok, f"collisions {r.collisions} (want 278), winding number {n_wind} "
                   f"(raw |dphi| {abs(r.winding):.6f}), speed {r.speed:.4f}, {r.seconds:.0f}s")


def test_criterion_03_coarse_method_ranking():
    dec = ex.fluxon_collisions("dec", 0.4, 0.32, 50000.0).collisions
    eul = ex.fluxon_collisions("euler", 0.4, 0.32, 50000.0).collisions
    exact = dec == 276 and eul == 268
    near = abs(dec - 276) <= 1 and abs(eul - 268) <= 1
    ok = exact or (near and dec > eul and dec - eul >= 8)
    verdict(3, ok, f"DEC {dec} (want 276), Euler {eul} (want 268)")


def test_criterion_04_capacitor_energy():
    s = ex.capacitor_energy(("dec", "euler", "cn"), T=1000.0)
    settle = 100.0
    d, e = s["dec"].std_after(settle), s["euler"].std_after(settle)
    cn = s["cn"].after(settle)
    # rises below this relative floor are read as a flat plateau, not growth
    rise = s["cn"].max_rise_after(settle)
    mono = rise <= 1e-8 * abs(cn[-1]) and cn[-1] < cn[0]
    ok = d < e and mono
    verdict(4, ok, f"std after t={settle:g}: DEC {d:.7g} vs Euler {e:.7g}; "
                   f"CN {cn[0]:.6g} -> {cn[-1]:.6g}, largest rise {rise:.1e}")


def test_criterion_05_meson_frequency(meson):
    dev = meson.block_deviation(t_from=1000.0, periods=10)
    _, w = meson.frequency()
    final = abs(w[-10:].mean() - meson.g) / meson.g
    same_sign = bool(np.all(dev > 0) or np.all(dev < 0))
    monotone = bool(np.all(np.diff(np.abs(dev)) <= 0))
    ok = final < 0.02 and same_sign and monotone
    verdict(5, ok, f"omega {w[-10:].mean():.5f} vs g={meson.g} ({100 * final:.2f}%), "
                   f"{dev.size} blocks, one-sided {same_sign}, monotone {monotone}")


def test_criterion_06_envelope_decay(meson):
    T = float(meson.t[-1])
    fit = meson.envelope((T / 2, T))
    ok = fit.decaying and abs(fit.exponent + 0.5) <= 0.15
    exp = "none" if fit.exponent is None else f"{fit.exponent:.3f}"
    verdict(6, ok, f"envelope exponent on [{T / 2:g}, {T:g}]: {exp} (want -0.5 +- 0.15)")


def test_criterion_07_outgoing_boundary():
    f = ex.reflected_energy_fraction((0, 1))
    ok = f[1] < 0.01 and f[1] < f[0]
    verdict(7, ok, f"reflected energy: order 1 {f[1]:.2e}, order 0 {f[0]:.2e}")


def test_criterion_08_schwinger_atom():
    a = ex.schwinger_atom("schwinger_atom_x0_0", T=2000.0)
    amps = [a.amplitude(k) for k in range(4)]
    bounded = bool(np.all(np.isfinite(a.x)) and np.max(np.abs(a.x)) < 40)
    decaying = all(p > q for p, q in zip(amps, amps[1:]))
    b = ex.schwinger_atom("schwinger_atom_unscreened", T=2000.0)
    slope, r2 = b.linear_fit_last_quarter()
    ok = bounded and decaying and slope < 0 and r2 > 0.999
    verdict(8, ok, f"(a) max|x| {np.nanmax(np.abs(a.x)):.2f}, quarter amplitudes "
                   f"{', '.join(f'{v:.3f}' for v in amps)}; (b) slope {slope:.4f}, R^2 {r2:.9f}")


def test_criterion_09_positronium():
    p = ex.positronium(T=4000.0)
    rel = p.relative_change_per_100(t_from=3000.0)
    swing = p.central_swing(last=200.0)
    ok = bool(np.all(np.abs(rel) < 1e-3)) and swing > 0.5
    verdict(9, ok, f"late change per 100: max |{np.max(np.abs(rel)):.2e}| (want < 1e-3), "
                   f"central swing {swing:.2f}")


@pytest.mark.slow
def test_criterion_10_fractal_alternations(tmp_path):
    s = ex.fractal_sweep(report=tmp_path / "fractal.csv", cache=tmp_path / "fractal.jsonl")
    bound = sum(o == "bound" for o in s.outcome)
    ok = s.alternations >= 3 and len(s.outcome) == 66
    verdict(10, ok, f"{s.alternations} alternations over {len(s.outcome)} points ({bound} bound)")


def test_criterion_11_microshort():
    pin = ex.microshort("microshort_pinned")
    late = pin.x[pin.t > 0.75 * pin.t[-1]]
    off = float(np.max(np.abs(late - pin.x_e)))
    passed = ex.microshort("microshort_pass")
    crossed = bool(np.any(passed.x < passed.x_s - 3.0))
    ok = off <= 3.0 and crossed
    verdict(11, ok, f"u_t={pin.u_terminal:.3f}: late |x - x_e| <= {off:.3f} (x_e={pin.x_e:.3f}); "
                    f"u_t={passed.u_terminal:.3f}: crossed the short {crossed}")


def test_criterion_12_constriction_budget():
    b = ex.constriction_budget("constriction_triple")
    loss = 100 * b.loss_fraction
    ok = abs(loss - 3.0) <= 1.5
    verdict(12, ok, f"u {b.u_in:.4f} -> {b.u_out:.4f}, kinetic loss {loss:.2f}% (want 3 +- 1.5)")


@pytest.mark.slow
def test_criterion_13_runtime_scaling():
    res = (0.05, 0.1, 0.2, 0.4)
    tab = ex.runtime_table(res, T=50000.0)
    faster = all(tab.seconds("dec", dx) <= tab.seconds("euler", dx) for dx in res)
    sd, se = tab.slope("dec"), tab.slope("euler")
    ok = faster and abs(sd - 1) <= 0.1 and abs(se - 1) <= 0.1
    times = "; ".join(f"dx={dx:g} {tab.seconds('dec', dx):.2f}/{tab.seconds('euler', dx):.2f}s" for dx in res)
    verdict(13, ok, f"DEC/Euler {times}; slopes {sd:.3f}/{se:.3f}")


def test_criterion_14_property_suite():
    p = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        str(ROOT / "tests" / "test_properties.py")],
                       capture_output=True, text=True, cwd=ROOT)
    tail = p.stdout.strip().splitlines()[-1] if p.stdout.strip() else p.stderr.strip()[-200:]
    verdict(14, p.returncode == 0, f"property suite: {tail}")

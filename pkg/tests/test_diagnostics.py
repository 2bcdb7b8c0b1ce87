import math

import numpy as np
import pytest

from sgdec import diagnostics as dg
from sgdec.analytic import Kink, KinkAntikinkPair, kink_energy
from sgdec.mesh import build_grid
from sgdec.model import PhysicsModel
from sgdec.stepper import run, seed_initial_layer, step


def _pair(ic, grid, model):
    a = seed_initial_layer(ic, grid, model)
    return a, step(a, grid, model)


def test_window_weights_cover_the_domain_once():
    grid = build_grid(10.0, 0.1, 0.05)
    wv, we = dg.window_weights(grid)
    assert wv.sum() == pytest.approx(grid.nx - 1)
    assert we.sum() == pytest.approx(grid.nx - 1)
    wv1, _ = dg.window_weights(grid, 2.0, 5.0)
    assert wv1.sum() * grid.dx == pytest.approx(3.0)
    with pytest.raises(ValueError):
        dg.window_weights(grid, 5.0, 5.0)


@pytest.mark.parametrize("u", [0.0, 0.5, 0.8])
def test_moving_kink_energy(u):
    grid = build_grid(60.0, 0.02, 0.01, -30.0)
    m = PhysicsModel()
    prev, cur = _pair(Kink(0.0, u), grid, m)
    assert dg.energy_of_pair(prev, cur, grid, m).total == pytest.approx(kink_energy(u), rel=2e-4)


def test_windowed_energies_add_up():
    grid = build_grid(40.0, 0.05, 0.04, -20.0)
    m = PhysicsModel(alpha=0.0)
    prev, cur = _pair(KinkAntikinkPair(0.0, 0.4, 10.0), grid, m)
    full = dg.energy_of_pair(prev, cur, grid, m).total
    parts = dg.windowed_energy(prev, cur, grid, m, -20, 1.37).total + dg.windowed_energy(prev, cur, grid, m, 1.37, 20).total
    assert parts == pytest.approx(full, rel=1e-12)
    with pytest.raises(ValueError):
        dg.windowed_energy(prev, cur, grid, m, 30, 40)


def test_energy_requires_adjacent_layers():
    grid = build_grid(10.0, 0.1, 0.05)
    a, b = _pair(Kink(), grid, PhysicsModel())
    with pytest.raises(ValueError):
        dg.energy_of_pair(b, a, grid, PhysicsModel())


def test_track_kinks_finds_positions_and_polarity():
    grid = build_grid(60.0, 0.05, 0.04, -30.0)
    s = seed_initial_layer(KinkAntikinkPair(0.0, 0.3, 16.0), grid, PhysicsModel())
    ks = dg.track_kinks(s, grid)
    assert [k.polarity for k in ks] == [1, -1]
    # phi = pi where u cosh(x/w) = sinh(d/(2w))
    w = math.sqrt(1 - 0.3**2)
    xc = w * math.acosh(math.sinh(8.0 / w) / 0.3)
    assert ks[0].position == pytest.approx(-xc, abs=1e-3)
    assert ks[1].position == pytest.approx(xc, abs=1e-3)


def test_kink_tracker_velocity():
    grid = build_grid(60.0, 0.05, 0.04, -30.0)
    tr = dg.KinkTracker(grid)
    run(Kink(-5.0, 0.6), grid, PhysicsModel(), T_max=10.0, observers=[(25, tr)])
    _, x, v = tr.single()
    assert np.nanmedian(v) == pytest.approx(0.6, abs=2e-3)
    assert x[-1] == pytest.approx(1.0, abs=0.02)


def test_boundary_collision_counter_on_a_triangle_wave():
    grid = build_grid(40.0, 0.1, 0.05, -20.0)
    t = np.linspace(0, 10, 4001)
    x = 19.0 * (2 * np.abs(2 * (t - np.floor(t + 0.5))) - 1)  # bounces between -19 and 19
    assert dg.count_boundary_collisions(x, grid) == 19
    # turning points far from the walls do not count
    assert dg.count_boundary_collisions(0.3 * x, grid) == 0


def test_oscillation_frequency_of_a_sine():
    t = np.linspace(0, 200, 20001)
    _, w = dg.oscillation_frequency(t, np.sin(1.3 * t + 0.2))
    assert np.allclose(w, 1.3, atol=1e-6)
    with pytest.raises(ValueError):
        dg.oscillation_frequency(t[:50], np.sin(t[:50]))


def test_envelope_exponent():
    t = np.linspace(1, 2000, 400001)
    fit = dg.envelope_decay_exponent(t, t**-0.5 * np.cos(2.0 * t), (50, 2000))
    assert fit.decaying and fit.exponent == pytest.approx(-0.5, abs=1e-3)
    flat = dg.envelope_decay_exponent(t, np.cos(2.0 * t), (50, 2000))
    assert not flat.decaying and flat.exponent is None


def test_observables_switch_on_coupling():
    grid = build_grid(10.0, 0.1, 0.05)
    s = seed_initial_layer(Kink(), grid, PhysicsModel())
    assert set(dg.observables(s, grid, PhysicsModel())) == {"H", "V"}
    obs = dg.observables(s, grid, PhysicsModel(mu=0.0, g=0.5))
    assert obs["Q"] == pytest.approx(dg.total_charge(s, 0.5))
    assert obs["Q"] < 0


def test_face_residual_of_a_step():
    grid = build_grid(10.0, 0.1, 0.05)
    a, b = _pair(Kink(0.0, 0.2), grid, PhysicsModel())
    assert dg.face_residual_max(a, b) < 1e-14
    assert dg.radiated_fraction(2.0, 1.5) == 0.25
    assert dg.relative_drift(np.array([2.0, 2.5, 1.5])) == 0.5


def test_energy_drift_without_damping():
    grid = build_grid(100.0, 0.05, 0.04, -50.0)
    m = PhysicsModel()
    rec = dg.EnergyRecorder(grid, m)
    run(KinkAntikinkPair(0.0, 0.55, 30.0), grid, m, T_max=1000.0, observers=[(5, rec)])
    assert dg.relative_drift(rec.arrays()["total"]) <= 1e-3

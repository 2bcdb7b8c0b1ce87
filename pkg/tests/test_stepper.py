import math

import numpy as np
import pytest

from sgdec import boundary as bnd
from sgdec.analytic import Custom, Kink, Zero, kink
from sgdec.mesh import build_grid
from sgdec.model import PhysicsModel
from sgdec.stepper import (
    BlowUpError, FieldState, Probe, advance, face_residuals, make_plan, run, seed_initial_layer, step,
)


def test_seed_uses_exact_backward_edge():
    grid = build_grid(20.0, 0.1, 0.08, -10.0)
    s = seed_initial_layer(Kink(0.0, 0.5), grid, PhysicsModel())
    assert np.allclose(s.phi_t_prev, kink(grid.x, 0.0, 0.0, 0.5) - kink(grid.x, -0.08, 0.0, 0.5), atol=1e-15)
    assert np.array_equal(s.phi_x, np.diff(s.varphi))


def test_seed_custom_taylor_step():
    grid = build_grid(20.0, 0.1, 0.08, -10.0)
    ic = Custom(lambda x: np.zeros_like(x), lambda x: np.ones_like(x))
    s = seed_initial_layer(ic, grid, PhysicsModel(mu=0.0))
    # zero field, unit velocity and no force: the edge is exactly dt
    assert np.allclose(s.phi_t_prev, 0.08)


def test_interior_update_matches_the_formula():
    grid = build_grid(2.0, 0.5, 0.25)
    m = PhysicsModel(alpha=0.2, mass2=0.3, mu=0.7, beta=0.1)
    rng = np.random.default_rng(0)
    phi = rng.normal(size=grid.nx)
    pt = rng.normal(size=grid.nx)
    s = FieldState(0, phi.copy(), np.diff(phi), pt.copy())
    new = step(s, grid, m)
    dt, dx, a = 0.25, 0.5, 0.2
    c0 = dt * dt / (1 + a * dt / 2)
    i = 2
    expect = c0 * ((phi[i + 1] - 2 * phi[i] + phi[i - 1]) / dx**2 + (1 / dt**2 - a / (2 * dt)) * pt[i]
                   - 0.3 * phi[i] - 0.7 * math.sin(phi[i]) - 0.1)
    assert new.phi_t_prev[i] == pytest.approx(expect, rel=1e-13)


def test_step_leaves_input_untouched():
    grid = build_grid(10.0, 0.1, 0.08, -5.0)
    s = seed_initial_layer(Kink(0.0, 0.3), grid, PhysicsModel())
    before = s.copy()
    step(s, grid, PhysicsModel())
    assert np.array_equal(s.varphi, before.varphi) and s.j == 0


def test_face_residuals_vanish():
    grid = build_grid(40.0, 0.1, 0.08, -20.0)
    s0 = seed_initial_layer(Kink(0.0, 0.7), grid, PhysicsModel(alpha=0.01, beta=0.003))
    s1 = step(s0, grid, PhysicsModel(alpha=0.01, beta=0.003))
    assert np.max(np.abs(face_residuals(s0, s1))) < 5e-13
    with pytest.raises(ValueError):
        face_residuals(s0, s0)


def test_chunking_does_not_change_results():
    grid = build_grid(40.0, 0.1, 0.08, -20.0)
    m = PhysicsModel()
    a = run(Kink(0.0, 0.5), grid, m, T_max=16.0, chunk=7).state
    b = run(Kink(0.0, 0.5), grid, m, T_max=16.0).state
    assert np.array_equal(a.varphi, b.varphi)


def test_probes_and_observers():
    grid = build_grid(40.0, 0.1, 0.08, -20.0)
    seen = []
    res = run(Kink(0.0, 0.5), grid, PhysicsModel(), T_max=8.0,
              probes=[Probe(0.0, "phi", "c"), Probe(0.0, "V")],
              observers=[(25, lambda p, c: seen.append((p.j, c.j)))])
    assert res.t.size == 100 and res.t[-1] == pytest.approx(8.0)
    i = grid.nearest_vertex(0.0)
    assert res.probes["c"][-1] == res.state.varphi[i]
    assert res.probes["V@0"][-1] == pytest.approx(res.state.phi_t_prev[i] / 0.08, rel=1e-15)
    assert seen == [(24, 25), (49, 50), (74, 75), (99, 100)]


def test_unknown_probe_quantity():
    grid = build_grid(10.0, 0.1, 0.08)
    with pytest.raises(ValueError):
        run(Zero(), grid, PhysicsModel(), T_max=0.08, probes=[Probe(1.0, "nope")])


def test_dumps_collected():
    grid = build_grid(10.0, 0.1, 0.08)
    res = run(Zero(), grid, PhysicsModel(), T_max=0.8, dump_every=5)
    assert [d.j for d in res.dumps] == [0, 5, 10]


def test_blow_up_is_reported():
    grid = build_grid(10.0, 0.1, 0.08)
    s = seed_initial_layer(Zero(), grid, PhysicsModel())
    s.varphi[5] = np.inf
    with pytest.raises(BlowUpError) as e:
        run(s, grid, PhysicsModel(), T_max=0.8)
    assert e.value.last_good is not None


def test_outgoing_force_closure_equals_spring_for_klein_gordon():
    # m2*phi - s is exactly U*(phi - phi_ref) with U = m2, phi_ref = s/m2
    grid = build_grid(40.0, 0.1, 0.08, -20.0)
    m = PhysicsModel(mass2=1.44, mu=0.0, beta=-0.3)
    ic = Custom(lambda x: np.exp(-x**2), lambda x: np.zeros_like(x))
    a = run(ic, grid, m, bnd.BoundarySpec.outgoing(1), T_max=40.0).state
    spring = bnd.Outgoing(1, U=1.44)
    b = run(ic, grid, m, bnd.BoundarySpec(spring, spring), T_max=40.0).state
    assert np.allclose(a.varphi, b.varphi, atol=1e-12)


def test_advance_returns_probe_block():
    grid = build_grid(10.0, 0.1, 0.08, -5.0)
    s = seed_initial_layer(Kink(0.0, 0.2), grid, PhysicsModel())
    plan = make_plan(grid, PhysicsModel(), bnd.BoundarySpec.closed(), s)
    i = grid.nearest_vertex(1.0)
    block, res = advance(s, plan, 3, np.array([i]), check=True)
    assert block.shape == (3, 1, 3)
    assert block[-1, 0, 0] == s.varphi[i]
    assert block[-1, 0, 2] == s.phi_x[i]
    assert res.max() < 1e-13

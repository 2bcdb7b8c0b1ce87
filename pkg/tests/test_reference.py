import numpy as np
import pytest

from sgdec import boundary as bnd
from sgdec.analytic import Custom, Kink
from sgdec.mesh import build_grid
from sgdec.model import CapacitorSource, PhysicsModel, evaluate_coefficients
from sgdec.reference import (
    VertexEnergyRecorder, cn_dense, cn_system, crank_nicolson_run, euler_run, loglog_slope, make_plan,
    profile_runtimes, seed_second_order, thomas,
)
from sgdec.stepper import run


def test_euler_tracks_dec_to_roundoff():
    grid = build_grid(40.0, 0.1, 0.08, -20.0)
    m = PhysicsModel(alpha=0.01)
    a = run(Kink(0.0, 0.5), grid, m, T_max=40.0).state
    b = euler_run(Kink(0.0, 0.5), grid, m, T_max=40.0).state
    assert np.max(np.abs(a.varphi - b.varphi)) < 1e-10


@pytest.mark.parametrize("bc", [bnd.BoundarySpec.closed(), bnd.BoundarySpec.bias(0.01, 0.02),
                                bnd.BoundarySpec.outgoing(0), bnd.BoundarySpec.outgoing(1)])
def test_euler_boundaries_match_dec(bc):
    grid = build_grid(20.0, 0.1, 0.08, -10.0)
    m = PhysicsModel(mass2=1.44, mu=0.0)
    ic = Custom(lambda x: np.exp(-x**2), lambda x: np.zeros_like(x))
    a = run(ic, grid, m, bc, T_max=30.0).state
    b = euler_run(ic, grid, m, bc, T_max=30.0).state
    assert np.max(np.abs(a.varphi - b.varphi)) < 1e-10


def test_thomas_matches_dense_solve_on_8_points():
    grid = build_grid(7.0, 1.0, 0.5)
    m = PhysicsModel(mass2=1.44, mu=0.0, alpha=0.1, g=1.2, background=CapacitorSource(1.0, 2.0, 3.5))
    coeffs = evaluate_coefficients(m, grid)
    rng = np.random.default_rng(1)
    p0, p1 = rng.normal(size=8), rng.normal(size=8)
    for bc in (bnd.BoundarySpec.closed(), bnd.BoundarySpec.outgoing(1),
               bnd.BoundarySpec(bnd.Dirichlet(0.5), bnd.NeumannBias(0.1, 0.0))):
        plan = make_plan(grid, coeffs, bc)
        lo, di, up, rhs = cn_system(p0, p1, grid, coeffs, plan, 0.0, 0.0, 0.1, 0.0, 0.1)
        dense = np.linalg.solve(cn_dense(lo, di, up), rhs)
        assert np.allclose(thomas(lo, di, up, rhs), dense, rtol=0, atol=1e-12)


def test_cn_refuses_nonlinear_models():
    grid = build_grid(10.0, 0.1, 0.08)
    with pytest.raises(ValueError, match="linear"):
        crank_nicolson_run(Kink(0.0, 0.1), grid, PhysicsModel(), T_max=0.08)


def test_cn_energy_decays_without_boundaries():
    grid = build_grid(40.0, 0.1, 0.08, -20.0)
    m = PhysicsModel(mass2=1.0, mu=0.0)
    rec = VertexEnergyRecorder(grid, m)
    ic = Custom(lambda x: np.exp(-x**2), lambda x: np.zeros_like(x))
    crank_nicolson_run(ic, grid, m, T_max=20.0, observers=[(5, rec)])
    e = rec.arrays()["total"]
    assert e[-1] < e[0]


def test_second_order_seed_is_consistent():
    grid = build_grid(10.0, 0.1, 0.08, -5.0)
    s = seed_second_order(Kink(0.0, 0.4), grid, PhysicsModel())
    assert np.allclose(s.phi_t_prev, s.varphi_curr - s.varphi_prev)
    c = s.copy()
    c.bc_memory[0] = 1.0
    assert s.bc_memory[0] == 0.0


def test_profile_rows_and_slope():
    rows = profile_runtimes((0.4, 0.2), T_max=40.0, methods=("dec",), repeats=1)
    assert [r.nx for r in rows] == [251, 501]
    assert rows[1].gridpoints == rows[1].nx * rows[1].n_steps == 501 * 250
    assert np.isfinite(loglog_slope(rows, "dec"))
    with pytest.raises(ValueError):
        loglog_slope(rows[:1], "dec")

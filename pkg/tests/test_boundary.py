import math

import numpy as np
import pytest

from sgdec import boundary as bnd
from sgdec.analytic import Kink, Zero
from sgdec.mesh import build_grid
from sgdec.model import PhysicsModel
from sgdec.stepper import run


def test_neumann_edge_values():
    assert bnd.neumann_edge_value(0.1, 0.2, 0.05, "left") == pytest.approx(0.025)
    assert bnd.neumann_edge_value(0.1, 0.2, 0.05, "right") == pytest.approx(0.015)
    with pytest.raises(ValueError):
        bnd.neumann_edge_value(0.1, 0.0, 0.0, "top")


def test_pulse_envelope_shape():
    p = bnd.Pulse(A=1.5, omega=0.8, sigma_rise=10.0, sigma_fall=10.0, T_p=250.0)
    t = np.array([-1.0, 30.0, 100.0, 220.0, 281.0])
    H = bnd.pulse_envelope(t, p)
    assert H[0] == 0.0
    assert H[1] == pytest.approx(1.5)
    assert H[2] == pytest.approx(1.5)
    assert H[3] == pytest.approx(1.5)
    assert H[4] == 0.0
    # half way down the rise: exp(-1/2)
    assert bnd.pulse_envelope(np.array([20.0]), p)[0] == pytest.approx(1.5 * math.exp(-0.5))


@pytest.mark.parametrize("kw", [dict(sigma_rise=0.0), dict(T_p=-1.0)])
def test_pulse_validation(kw):
    args = dict(A=1.0, omega=1.0, sigma_rise=1.0, sigma_fall=1.0, T_p=10.0)
    args.update(kw)
    with pytest.raises(ValueError):
        bnd.Pulse(**args)


def test_outgoing_order0_is_upwind():
    assert bnd.outgoing_phi_t("left", 0, 0.8, 0.08, 0.0, 0.0, 0.5, None) == pytest.approx(0.4)
    assert bnd.outgoing_phi_t("right", 0, 0.8, 0.08, 0.0, 0.0, 0.5, None) == pytest.approx(-0.4)
    # order 1 without history falls back to order 0
    assert bnd.outgoing_phi_t("left", 1, 0.8, 0.08, 0.0, 0.3, 0.5, float("nan")) == pytest.approx(0.4)


def test_local_vacuum_branches():
    assert bnd.local_vacuum(0.0, 1.0, 0.0, guess=6.0) == pytest.approx(2 * math.pi)
    v = bnd.local_vacuum(0.0, 1.0, 0.5, guess=0.1)
    assert v == pytest.approx(math.asin(0.5))
    v = bnd.local_vacuum(0.09, 1.0, 0.3, guess=0.0)
    assert 0.09 * v + math.sin(v) == pytest.approx(0.3, abs=1e-13)


def test_plan_selection():
    o = bnd.Outgoing(1)
    assert bnd.plan_side(o, "left", 0.0, 1.0, 0.0, 0.0).code == bnd.OUTGOING1_BRANCH
    assert bnd.plan_side(o, "left", 1.44, 0.0, 0.0, 0.0).code == bnd.OUTGOING1_FORCE
    assert bnd.plan_side(o, "left", 0.09, 1.0, 0.0, 0.0).code == bnd.OUTGOING1_FORCE
    p = bnd.plan_side(bnd.Outgoing(1, U=2.0), "left", 0.0, 1.0, 0.0, 0.0)
    assert (p.code, p.U) == (bnd.OUTGOING1, 2.0)
    assert bnd.plan_side(bnd.Outgoing(0), "right", 0.0, 1.0, 0.0, 0.0).code == bnd.OUTGOING0


def test_branch_reference_wraps():
    assert bnd.branch_ref(2 * math.pi + 0.2, 0.0, bnd.OUTGOING1_BRANCH) == pytest.approx(2 * math.pi)
    assert bnd.branch_ref(2 * math.pi + 0.2, 0.0, bnd.OUTGOING1) == 0.0


def test_zero_amplitude_pulse_matches_neumann_bitwise():
    grid = build_grid(20.0, 0.1, 0.08, 0.0)
    m = PhysicsModel.sine_gordon()
    ic = Kink(10.0, 0.3)
    pulse = bnd.Pulse(A=0.0, omega=0.7, sigma_rise=3.0, sigma_fall=3.0, T_p=20.0)
    a = run(ic, grid, m, bnd.BoundarySpec(pulse, pulse), T_max=8.0).state
    b = run(ic, grid, m, bnd.BoundarySpec.closed(), T_max=8.0).state
    assert np.array_equal(a.varphi, b.varphi)
    assert np.array_equal(a.phi_t_prev, b.phi_t_prev)


def test_dirichlet_holds_the_value():
    grid = build_grid(20.0, 0.1, 0.08)
    bc = bnd.BoundarySpec(bnd.Dirichlet(0.0), bnd.Dirichlet(lambda t: 0.1 * t))
    s = run(Zero(), grid, PhysicsModel.sine_gordon(), bc, T_max=4.0).state
    assert s.varphi[0] == 0.0
    assert s.varphi[-1] == pytest.approx(0.4)


def test_bias_first_step_from_rest():
    # from phi = 0 the half-cell update gives pt = 2 dt^2/dx * (virtual edge)/dx
    grid = build_grid(20.0, 0.1, 0.08, -10.0)
    eta, xi = 0.02, 0.05
    s = run(Zero(), grid, PhysicsModel.sine_gordon(), bnd.BoundarySpec.bias(eta, xi), T_max=0.08).state
    k = 2 * grid.dt**2 / grid.dx
    assert s.varphi[0] == pytest.approx(-k * (eta + xi), rel=1e-12)
    assert s.varphi[-1] == pytest.approx(k * (eta - xi), rel=1e-12)
    assert np.all(s.varphi[1:-1] == 0.0)


@pytest.mark.parametrize("u", [0.15, 0.3, 0.6, 0.9])
def test_kink_leaves_through_outgoing_side(u):
    grid = build_grid(60.0, 0.1, 0.08, -30.0)
    res = run(Kink(0.0, u), grid, PhysicsModel.sine_gordon(), bnd.BoundarySpec.outgoing(1),
              T_max=round((40 / u + 80) / 0.08) * 0.08)
    s = res.state
    # the kink is gone and it left at most a small radiation tail
    assert np.max(np.abs(s.varphi - np.round(s.varphi[0] / (2 * math.pi)) * 2 * math.pi)) < 0.3

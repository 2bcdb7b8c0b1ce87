"""Hypothesis checks of the structural identities of the edge-field scheme."""
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from sgdec import boundary as bnd
from sgdec import diagnostics as dg
from sgdec.analytic import Breather, Custom, Kink, KinkAntikinkPair, kink
from sgdec.mesh import build_grid
from sgdec.model import CapacitorSource, PhysicsModel
from sgdec.stepper import FieldState, face_residuals, run, seed_initial_layer, step

courant = st.floats(0.3, 0.95)
speeds = st.floats(-0.9, 0.9).filter(lambda u: abs(u) > 0.05)

models = st.builds(
    PhysicsModel,
    alpha=st.floats(0.0, 0.2),
    beta=st.floats(-0.05, 0.05),
    mu=st.floats(0.0, 2.0),
    mass2=st.floats(0.0, 2.0),
)

boundaries = st.sampled_from([
    bnd.BoundarySpec.closed(),
    bnd.BoundarySpec.bias(0.02, -0.01),
    bnd.BoundarySpec.outgoing(0),
    bnd.BoundarySpec.outgoing(1),
    bnd.BoundarySpec(bnd.Dirichlet(0.0), bnd.Dirichlet(2 * math.pi)),
])


def _ic(kind, u):
    return {"kink": Kink(-3.0, u), "pair": KinkAntikinkPair(0.0, abs(u), 8.0), "breather": Breather(0.7)}[kind]


@settings(max_examples=25)
@given(models, boundaries, courant, speeds, st.sampled_from(["kink", "pair", "breather"]))
def test_face_residual_and_compatibility(model, bc, c, u, kind):
    grid = build_grid(30.0, 0.1, 0.1 * c, -15.0)
    s = seed_initial_layer(_ic(kind, u), grid, model)
    for _ in range(3):
        nxt = step(s, grid, model, bc)
        assert np.max(np.abs(face_residuals(s, nxt))) <= 5e-13
        s = nxt
    r = run(s, grid, model, bc, T_max=200 * grid.dt, check_residual=True)
    assert r.max_residual <= 5e-13
    # the spatial edges are differences of the same stored floats
    assert np.array_equal(r.state.phi_x, np.diff(r.state.varphi))


@settings(max_examples=15)
@given(speeds, courant, st.sampled_from(["kink", "pair"]))
def test_tracked_kinks_stay_inside_the_light_cone(u, c, kind):
    grid = build_grid(60.0, 0.1, 0.1 * c, -30.0)
    tr = dg.KinkTracker(grid)
    run(_ic(kind, u), grid, PhysicsModel(), T_max=400 * grid.dt, observers=[(10, tr)])
    v = tr.all_velocities()
    assert v.size > 0
    assert np.all(np.abs(v) <= 1.0)


@settings(max_examples=15)
@given(st.floats(0.2, 2.0), courant, st.floats(0.5, 4.0))
def test_charge_is_constant_with_pinned_ends(g, c, q):
    grid = build_grid(40.0, 0.1, 0.1 * c, -20.0)
    m = PhysicsModel(mu=0.0, g=g, background=CapacitorSource(q, 10.0, 0.0))
    bc = bnd.BoundarySpec(bnd.Dirichlet(0.0), bnd.Dirichlet(0.0))
    ic = Custom(lambda x: np.exp(-x**2), lambda x: np.zeros_like(x))
    qs = []
    run(ic, grid, m, bc, T_max=500 * grid.dt, observers=[(1, lambda a, b: qs.append(-g * float(np.sum(b.phi_x))))])
    assert np.ptp(qs) <= 1e-10


@settings(max_examples=15)
@given(st.floats(0.2, 2.0), courant, speeds)
def test_charge_changes_only_through_the_ends(g, c, u):
    grid = build_grid(30.0, 0.1, 0.1 * c, -15.0)
    m = PhysicsModel(mu=1.0, g=g)
    gap = []

    def check(a, b):
        dq = -g * (np.sum(b.phi_x) - np.sum(a.phi_x))
        gap.append(abs(dq + g * (b.phi_t_prev[-1] - b.phi_t_prev[0])))

    run(Kink(-5.0, u), grid, m, bnd.BoundarySpec.outgoing(0), T_max=300 * grid.dt, observers=[(1, check)])
    assert max(gap) <= 1e-10


def _kink_error(dx, u=0.5, T=4.0):
    grid = build_grid(40.0, dx, 0.5 * dx, -20.0)
    r = run(Kink(-2.0, u), grid, PhysicsModel(), T_max=T)
    return float(np.max(np.abs(r.state.varphi - kink(grid.x, T, -2.0, u))))


def test_second_order_convergence_to_the_travelling_kink():
    e = [_kink_error(dx) for dx in (0.2, 0.1, 0.05)]
    ratios = [e[0] / e[1], e[1] / e[2]]
    assert all(3.6 < r < 4.4 for r in ratios), (e, ratios)


# Mixed sine plus mass models trap the kink chaotically, so round-off grows
# exponentially there (0.5 sine-Klein-Gordon drifts by 2e-4 in 1e4 steps).
# The scheme is exactly reversible; the float check uses non-chaotic dynamics.
reversible_models = st.one_of(
    st.builds(PhysicsModel, alpha=st.just(0.0), beta=st.floats(-0.02, 0.02)),
    st.builds(PhysicsModel, alpha=st.just(0.0), mu=st.just(0.0), mass2=st.floats(0.1, 2.0)),
)


@settings(max_examples=6)
@given(speeds, reversible_models)
def test_time_reversal_at_zero_damping(u, m):
    grid = build_grid(30.0, 0.1, 0.08, -15.0)
    s0 = seed_initial_layer(Kink(-3.0, u), grid, m)
    fwd = run(s0, grid, m, T_max=10_000 * grid.dt).state
    nxt = step(fwd, grid, m)
    back = FieldState(0, fwd.varphi.copy(), fwd.phi_x.copy(), -nxt.phi_t_prev)
    rev = run(back, grid, m, T_max=10_000 * grid.dt).state
    assert np.max(np.abs(rev.varphi - s0.varphi)) <= 1e-8
    assert np.max(np.abs(rev.phi_t_prev + step(s0, grid, m).phi_t_prev)) <= 1e-8

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgdec.mesh import build_grid
from sgdec.model import (
    CapacitorSource, ConstrictionProfile, Microshort, PhysicsModel, PointChargeSource,
    denormalize_schwinger, evaluate_coefficients, normalize_schwinger,
)


def test_microshort_spike_height():
    grid = build_grid(40.0, 0.05, 0.04, -20.0)
    m = PhysicsModel.sine_gordon(microshorts=[Microshort(-10.0, 1.0)])
    c = evaluate_coefficients(m, grid)
    i = grid.nearest_vertex(-10.0)
    assert c.mu[i] == pytest.approx(21.0, abs=1e-12)  # 1 + 1/0.05
    assert np.all(np.delete(c.mu, i) == 1.0)


def test_microshort_outside_domain():
    grid = build_grid(10.0, 0.1, 0.08)
    with pytest.raises(ValueError, match="outside"):
        evaluate_coefficients(PhysicsModel.sine_gordon(microshorts=[Microshort(20.0, 1.0)]), grid)


def test_capacitor_source_sign_and_extent():
    src = CapacitorSource(Q=4.0, length=40.0)
    assert src(np.array([-30.0, 0.0, 30.0])).tolist() == [0.0, 4.0, 0.0]
    assert src(np.array([-20.0, 20.0])).tolist() == [2.0, 2.0]  # midpoint at the plates


def test_point_charge_screens_a_kink():
    g = 0.3
    F = PointChargeSource(-2 * math.pi * g)
    x = np.array([-5.0, 5.0])
    # g*phi + F vanishes on both sides of a kink centred on the charge
    assert np.allclose(g * np.array([0.0, 2 * math.pi]) + F(x), 0.0)


def test_source_collects_bias_and_background():
    grid = build_grid(10.0, 0.5, 0.25, -5.0)
    m = PhysicsModel(mass2=1.44, mu=0.0, g=1.2, beta=0.1, background=CapacitorSource(4.0, 4.0))
    c = evaluate_coefficients(m, grid)
    inside = np.abs(grid.x) < 2
    assert np.allclose(c.source(0.0)[inside], -0.1 - 1.2 * 4.0)
    assert np.allclose(c.source(0.0)[np.abs(grid.x) > 2], -0.1)


def test_constriction_profile_tapers_linearly():
    p = ConstrictionProfile(((0.0, 40.0),), mu_inside=3.0, taper=10.0)
    assert p(np.array([0.0, 20.0, 25.0, 30.0, 40.0])).tolist() == [3.0, 3.0, 2.0, 1.0, 1.0]


def test_model_presets():
    assert PhysicsModel.massless_schwinger(1.2).mass2 == pytest.approx(1.44)
    assert PhysicsModel.massless_schwinger(1.2).is_linear
    m = PhysicsModel.massive_schwinger(0.3, dynamical_mass=False)
    assert m.mass2 == 0.0 and m.mu == 1.0


@given(st.floats(0.01, 100.0), st.floats(0.0, 10.0))
def test_schwinger_normalization_round_trip(kappa, g):
    k2, g2 = denormalize_schwinger(normalize_schwinger(kappa, g))
    assert k2 == pytest.approx(kappa, rel=1e-12)
    assert g2 == pytest.approx(g, rel=1e-12, abs=1e-15)


def test_normalization_rejects_bad_kappa():
    with pytest.raises(ValueError):
        normalize_schwinger(0.0, 1.0)

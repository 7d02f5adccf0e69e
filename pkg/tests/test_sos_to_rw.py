import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from walkline import presets
from walkline import rw_to_sos
from walkline import sos_to_rw as s
from walkline.core import (
    GroundState,
    GroundStateMismatch,
    NoConvergence,
    PositivityFailure,
    Regime,
    detailed_balance_residual,
    validate_kernel,
)

LN2 = math.log(2)


# continued fraction

def test_cf_critical_square_well():
    V = np.zeros(50)
    V[0] = -LN2
    inv = s.continued_fraction_invert(V)
    np.testing.assert_allclose(inv.a, 1.0, atol=1e-14)
    np.testing.assert_allclose(inv.phi.phi, 0.0, atol=1e-14)


def test_cf_flat_potential_is_transient():
    inv = s.continued_fraction_invert(np.zeros(100))
    X = np.arange(100)
    np.testing.assert_allclose(inv.a, (X + 2) / (X + 1), rtol=1e-13)
    x = X[40:] + 0.5
    # 2 x phi(x) -> -2
    assert np.all(np.abs(2 * x * inv.phi.phi[40:] + 2) < 2.0 / x)


def test_cf_deep_well_fails_at_one():
    V = np.zeros(10)
    V[0] = -2.0
    a1 = 2 * math.exp(0) - 1 / (2 * math.exp(-2))
    assert a1 < 0
    with pytest.raises(PositivityFailure) as exc:
        s.continued_fraction_invert(V)
    assert exc.value.index == 1
    assert exc.value.value == pytest.approx(a1)


def test_cf_forward_recursion_drifts_off_decaying_solution():
    # the decaying ground-state coupling is a repelling fixed point of the recursion
    m = presets.square_well_model(-1.0, 400)
    g = s.perron_ground_state(m)
    a_gs = s.ground_state_a(m, g)
    assert s.recursion_residual(m.V, a_gs, g.log_rho).max() < 1e-12
    a_cf = s.continued_fraction_invert(m.V, g.log_rho).a
    gap = np.abs(a_cf[:200] - a_gs[:200])
    assert gap[:20].max() < 1e-9
    assert gap.max() > 1e-3


# closed forms

def test_square_well_transition_point():
    r = s.square_well_analysis(-LN2)
    assert r.first_ansatz
    a, rho = r.second_ansatz
    assert a == pytest.approx(1.0, abs=1e-15)
    assert rho == pytest.approx(1.0, abs=1e-15)


def test_square_well_partial():
    r = s.square_well_analysis(-1.0)
    a, rho = r.second_ansatz
    assert a == pytest.approx((math.e - 1) ** -0.5, rel=1e-15)
    assert a == pytest.approx(0.7629, abs=1e-4)
    assert not r.first_ansatz
    assert r.regime is Regime.PARTIAL_WETTING


def test_square_well_both_ansatz():
    r = s.square_well_analysis(-0.5)
    a, _ = r.second_ansatz
    assert a == pytest.approx(1.2415, abs=1e-4)
    assert r.first_ansatz
    assert r.regime is Regime.COMPLETE_WETTING


def test_double_step_reduces_to_square_well():
    for v0 in list(np.linspace(-3, 1, 100)) + [-LN2 - 1e-9, -LN2 + 1e-9]:
        assert s.double_step_analysis(v0, 0.0).regime is s.square_well_analysis(v0).regime


def test_double_step_root():
    r = s.double_step_analysis(0.0, -1.0)
    A, B, C = 1 - math.exp(-1), 2 - 2 * math.exp(-1), -math.exp(-1)
    assert (A, B, C) == pytest.approx((0.63212, 1.26424, -0.36788), abs=1e-5)
    a2 = (-B + math.sqrt(B * B - 4 * A * C)) / (2 * A)
    assert r.roots == pytest.approx((math.sqrt(a2),), rel=1e-12)
    assert r.roots[0] == pytest.approx(0.5078, abs=1e-4)
    assert r.regime is Regime.PARTIAL_WETTING


def test_double_step_complete():
    r = s.double_step_analysis(1.0, 1.0)
    assert r.first_ansatz and r.regime is Regime.COMPLETE_WETTING


def test_double_step_two_roots_for_positive_v1():
    r = s.double_step_analysis(-3.0, 0.1)
    assert len(r.roots) == 2
    assert r.regime is Regime.PARTIAL_WETTING
    for a in r.roots:
        ea0, ea1 = math.exp(-3.0), math.exp(0.1)
        rho = r.rho(a)
        # first two recursion steps with constant a_X = a for X >= 1
        a0 = 2 * rho * ea0
        assert 2 * rho * ea1 == pytest.approx(a + 1 / a0, rel=1e-10)


def test_double_step_first_ansatz_solves_recursion():
    r = s.double_step_analysis(0.5, 0.2)
    V = np.zeros(60)
    V[:2] = 0.5, 0.2
    a = r.first_ansatz_a(np.arange(60))
    assert s.recursion_residual(V, a, 0.0).max() < 1e-13


# Perron ground state

@pytest.mark.parametrize("M", [10, 101, 2000])
def test_flat_potential_ground_state(M):
    m = presets.wall_potential_model([], M)
    g = s.perron_ground_state(m)
    theta = math.pi / (M + 2)
    assert g.rho == pytest.approx(math.cos(theta), abs=1e-14)
    v = np.sin(theta * (np.arange(M + 1) + 1))
    np.testing.assert_allclose(np.exp(-g.U / 2), v / v[0], rtol=1e-9)


def test_rho_trend_flat_potential():
    trend = s.rho_trend(lambda M: presets.wall_potential_model([], M), [50, 200, 2000])
    rhos = [r for _, r in trend]
    assert rhos == sorted(rhos)
    assert abs(rhos[-1] - 1) < 1e-3


def test_square_well_rho_vs_dense_solver():
    m = presets.square_well_model(-1.0, 300)
    K = m.gibbs_kernel()
    top = eigh_tridiagonal(np.diag(K), np.diag(K, 1), eigvals_only=True)[-1]
    assert s.perron_ground_state(m).rho == pytest.approx(top, rel=1e-13)


def test_square_well_rho_closed_form():
    g = s.perron_ground_state(presets.square_well_model(-1.0, 2000))
    assert g.rho == pytest.approx(s.square_well_analysis(-1.0).second_ansatz[1], abs=1e-6)
    assert g.rho == pytest.approx(1.03685, abs=1e-5)


def test_general_step_ground_state_power_iteration():
    U = rw_to_sos.log_potential(2.0, 40)
    m = rw_to_sos.sos_from_general(rw_to_sos.geometric_base(1.0), U)
    g = s.perron_ground_state(m)
    assert g.rho == pytest.approx(np.linalg.eigvalsh(m.gibbs_kernel())[-1], rel=1e-10)
    assert g.residual < 1e-10
    with pytest.raises(NoConvergence):
        s.perron_ground_state(m, max_iter=3)


# ground-state kernel

def test_flat_potential_ground_state_kernel_is_doob_transform():
    M = 200
    m = presets.wall_potential_model([], M)
    k = s.kernel_from_sos(m, s.perron_ground_state(m))
    theta = math.pi / (M + 2)
    X = np.arange(M)
    up = 0.5 * np.sin(theta * (X + 2)) / (math.cos(theta) * np.sin(theta * (X + 1)))
    np.testing.assert_allclose(np.diag(k.P, 1), up, rtol=1e-10)
    assert k.P[0, 1] == pytest.approx(1.0, abs=1e-13)
    # not the simple walk: the drift points away from the wall
    assert k.P[1, 2] == pytest.approx(0.75, abs=1e-3)


def test_simple_walk_from_shifted_well():
    # the simple reflected walk corresponds to the critical well V = -ln 2 at X = 0
    M = 400
    V = np.zeros(M + 1)
    V[0] = -LN2
    inv = s.continued_fraction_invert(V)
    k = rw_to_sos.kernel_from_phi(inv.phi)
    np.testing.assert_allclose(np.diag(k.P, 1)[1:], 0.5, atol=1e-14)


def test_square_well_kernel_constant_ratio():
    M = 2000
    m = presets.square_well_model(-1.0, M)
    g = s.perron_ground_state(m)
    k = s.kernel_from_sos(m, g)
    x = np.arange(1, M // 2 + 1)
    ratio = k.P[x, x - 1] / k.P[x, x + 1]
    np.testing.assert_allclose(ratio, math.e - 1, atol=1e-6)
    assert detailed_balance_residual(k, g.U) < 1e-10


def test_ground_state_gauge_invariance():
    m = presets.square_well_model(-1.0, 100)
    g = s.perron_ground_state(m)
    k1 = s.kernel_from_sos(m, g)
    k2 = s.kernel_from_sos(m, GroundState(g.rho, g.U + 7.5))
    np.testing.assert_allclose(k1.P, k2.P, rtol=1e-12)


def test_ground_state_mismatch():
    m = presets.square_well_model(-1.0, 100)
    g = s.perron_ground_state(m)
    with pytest.raises(GroundStateMismatch):
        s.kernel_from_sos(m, GroundState(g.rho * 1.01, g.U))

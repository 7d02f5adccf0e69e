import math

import numpy as np
import pytest

from walkline import core
from walkline.core import (
    AsymmetricSupport,
    BridgePath,
    SosModel,
    Structure,
    WalkKernel,
    detailed_balance_residual,
    validate_kernel,
    w_from_detailed_balance,
)
from walkline import rw_to_sos

LN2 = math.log(2)


def test_simple_walk_is_valid(simple_walk):
    assert validate_kernel(simple_walk(8)) == []


def test_short_row_is_reported():
    P = rw_to_sos.metropolis_full_kernel(np.zeros(7)).P.copy()
    P[3] *= 0.9
    msgs = validate_kernel(WalkKernel(P, "lazy-nearest-neighbor", "metropolis-wall"))
    assert len(msgs) == 1
    assert "row 3" in msgs[0] and "deficit 0.1" in msgs[0]


def test_metropolis_reflect_kernel_valid():
    k = rw_to_sos.metropolis_reflect_kernel(np.log1p(np.arange(30.0)))
    assert validate_kernel(k) == []
    # independent row-sum check
    np.testing.assert_allclose(k.P.sum(axis=1), 1.0, atol=1e-15)


def test_nearest_neighbor_structure_violation():
    P = np.array([[0, 1, 0], [0.5, 0.25, 0.25], [0, 0.5, 0.5]])
    msgs = validate_kernel(WalkKernel(P, Structure.NEAREST_NEIGHBOR))
    assert any("P(1|1)" in m for m in msgs)


def test_detailed_balance_symmetric_kernel():
    P = np.array([[0.5, 0.5, 0], [0.5, 0.0, 0.5], [0, 0.5, 0.5]])
    assert detailed_balance_residual(WalkKernel(P, "lazy-nearest-neighbor", "metropolis-wall"),
                                     np.zeros(3)) == 0.0


def test_detailed_balance_general_metropolis():
    U = rw_to_sos.log_potential(2.0, 40)
    k = rw_to_sos.general_metropolis_kernel(rw_to_sos.geometric_base(1.0), U)
    assert detailed_balance_residual(k, U) < 1e-14


def test_detailed_balance_pm1_with_invariant_potential():
    phi = rw_to_sos.power_tail_phi(1.2, 0.3, 60)
    k = rw_to_sos.kernel_from_phi(phi)
    U = rw_to_sos.invariant_potential_from_phi(phi)
    # the truncation row holds, its flux with M-1 still balances
    assert detailed_balance_residual(k, U) < 1e-12
    # oracle: U from the kernel rates directly
    np.testing.assert_allclose(U, core.reversible_potential(k), atol=1e-12)


def test_w_from_simple_walk(simple_walk):
    m = w_from_detailed_balance(simple_walk(6))
    assert m.W[0, 1] == pytest.approx(0.5 * LN2, abs=1e-15)
    for x in range(1, 6):
        assert m.W[x, x + 1] == pytest.approx(LN2, abs=1e-15)
        assert m.W[x, x - 1] == pytest.approx(LN2 if x > 1 else 0.5 * LN2, abs=1e-15)
    assert np.isinf(m.W[0, 2]) and np.isinf(m.W[1, 1])


def test_w_from_symmetric_kernel():
    P = np.array([[0.25, 0.75, 0], [0.75, 0.0, 0.25], [0, 0.25, 0.75]])
    m = w_from_detailed_balance(WalkKernel(P, "lazy-nearest-neighbor", "metropolis-wall"))
    with np.errstate(divide="ignore"):
        np.testing.assert_allclose(m.W, -np.log(P), atol=1e-15)


def test_w_from_metropolis_matches_direct_translation():
    U = rw_to_sos.log_potential(1.0, 20)
    k = rw_to_sos.metropolis_full_kernel(U)
    m = w_from_detailed_balance(k)
    direct = rw_to_sos.sos_from_metropolis(U, "metropolis-wall")
    i = np.arange(20)
    np.testing.assert_allclose(m.W[i, i + 1], direct.W[i, i + 1], atol=1e-14)
    np.testing.assert_allclose(m.W[i, i + 1], 0.5 * np.abs(np.diff(U)) + LN2, atol=1e-14)


def test_asymmetric_support_rejected():
    P = np.array([[0, 1.0], [0.0, 1.0]])
    with pytest.raises(AsymmetricSupport):
        w_from_detailed_balance(WalkKernel(P, "lazy-nearest-neighbor"))


def test_sos_model_requires_exact_symmetry():
    W = np.array([[1.0, 2.0], [2.0 + 1e-15, 1.0]])
    with pytest.raises(ValueError):
        SosModel(np.zeros(2), W)


def test_bridge_path_checks():
    assert BridgePath((0, 1, 0)).N == 2
    with pytest.raises(ValueError):
        BridgePath((0, 1))
    with pytest.raises(ValueError):
        BridgePath((0, -1, 0))


def test_infer_structure():
    assert core.infer_structure(np.array([[0, 1], [1, 0]])) is Structure.NEAREST_NEIGHBOR
    assert core.infer_structure(np.eye(3)) is Structure.LAZY_NEAREST_NEIGHBOR
    assert core.infer_structure(np.ones((3, 3)) / 3) is Structure.GENERAL_STEP


def test_tail_amplitude():
    assert core.TailInfo(1.2).amplitude == pytest.approx(1.2 * 3.2 / 8)


def test_w_from_detailed_balance_bitwise_symmetric():
    U = rw_to_sos.log_potential(0.7, 25)
    for k in (rw_to_sos.metropolis_full_kernel(U, 0.2),
              rw_to_sos.general_metropolis_kernel(rw_to_sos.geometric_base(0.5), U)):
        W = w_from_detailed_balance(k).W
        assert np.array_equal(W, W.T)


@pytest.mark.parametrize("make", [
    lambda U: rw_to_sos.metropolis_full_kernel(U),
    lambda U: rw_to_sos.general_metropolis_kernel(rw_to_sos.geometric_base(1.0), U),
])
def test_metropolis_measure_is_stationary(make):
    U = rw_to_sos.log_potential(1.5, 40)
    k = make(U)
    assert detailed_balance_residual(k, U) < 1e-14
    pi = np.exp(-U)
    assert np.abs(pi @ k.P - pi).max() < 1e-10


def test_reflecting_wall_measure_is_stationary():
    # the wall row is not Metropolis, so e^{-U} is off at X = 0; use the kernel's own measure
    U = rw_to_sos.log_potential(1.5, 40)
    k = rw_to_sos.metropolis_reflect_kernel(U, 0.3)
    Uk = core.reversible_potential(k)
    np.testing.assert_allclose(Uk[1:] - Uk[1], U[1:] - U[1], atol=1e-12)
    assert detailed_balance_residual(k, Uk) < 1e-14
    pi = np.exp(-Uk)
    assert np.abs(pi @ k.P - pi).max() < 1e-10


def test_every_constructor_validates():
    from walkline import presets, sos_to_rw
    U = rw_to_sos.log_potential(2.0, 30)
    kernels = [
        rw_to_sos.kernel_from_phi(rw_to_sos.power_tail_phi(1.2, 1.0, 30)),
        rw_to_sos.metropolis_full_kernel(U),
        rw_to_sos.metropolis_reflect_kernel(U),
        rw_to_sos.general_metropolis_kernel(rw_to_sos.geometric_base(1.0), U),
        rw_to_sos.general_metropolis_kernel(rw_to_sos.nearest_neighbor_base(), U),
    ]
    for m in (presets.square_well_model(-1.0, 60), presets.double_step_model(-0.5, 0.3, 60)):
        kernels.append(sos_to_rw.kernel_from_sos(m, sos_to_rw.perron_ground_state(m)))
    for k in kernels:
        assert validate_kernel(k) == [], k.structure

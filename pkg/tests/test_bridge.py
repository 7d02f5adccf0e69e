import itertools
import math

import numpy as np
import pytest

from walkline import bridge as b
from walkline import presets, rw_to_sos
from walkline import sos_to_rw
from walkline.core import ForbiddenStep, GroundState, TooLarge, ZeroBridgeProbability


def brute_bridges(N, steps, M):
    out = []
    for seq in itertools.product(steps, repeat=N):
        x = np.concatenate([[0], np.cumsum(seq)])
        if x[-1] == 0 and x.min() >= 0 and x.max() <= M:
            out.append(tuple(x))
    return sorted(set(out))


def test_forced_bridge(simple_walk):
    k = simple_walk(5)
    assert b.bridge_log_prob_rw(k, (0, 1, 0)) == 0.0
    assert math.exp(b.partition_function(k, 2)) == pytest.approx(0.5, abs=1e-15)


def test_odd_length_has_no_bridge(simple_walk):
    assert b.partition_function(simple_walk(5), 3) == -math.inf
    with pytest.raises(ZeroBridgeProbability):
        b.sample_bridges(simple_walk(5), 3, 10, seed=0)
    with pytest.raises(ZeroBridgeProbability):
        b.height_marginal(simple_walk(5), 3, 1)


def test_mirrored_sos_values(simple_walk):
    k = simple_walk(5)
    m = rw_to_sos.sos_from_phi(rw_to_sos.EdgeCoupling(np.zeros(6)))
    assert b.bridge_log_weight_sos(m, (0, 1, 0)) == pytest.approx(0.0, abs=1e-15)
    assert b.partition_function(m, 2) == pytest.approx(math.log(0.5), abs=1e-15)
    assert b.partition_function(m, 5) == -math.inf


def test_bridge_counts():
    assert b.count_bridges(2, (-1, 1), 10) == 1
    assert b.count_bridges(4, (-1, 1), 10) == 2
    steps = (-1, 0, 1)
    assert b.count_bridges(6, steps, 10) == len(brute_bridges(6, steps, 10))
    paths = b.enumerate_paths(6, steps, 10)
    assert sorted(map(tuple, paths)) == brute_bridges(6, steps, 10)


def test_enumeration_respects_cutoff_and_long_steps():
    steps = range(-3, 4)
    got = sorted(map(tuple, b.enumerate_paths(5, steps, 4)))
    assert got == brute_bridges(5, steps, 4)


def test_enumeration_limit(monkeypatch):
    monkeypatch.setattr(b, "MAX_PATHS", 10)
    with pytest.raises(TooLarge):
        b.enumerate_paths(10, (-1, 0, 1), 10)


def test_forced_sample(simple_walk):
    paths = b.sample_bridges(simple_walk(4), 2, 50, seed=1)
    assert np.all(paths == [0, 1, 0])
    assert b.sample_bridge(simple_walk(4), 2, seed=3).x == (0, 1, 0)


def test_marginal_endpoints_and_N4(simple_walk):
    k = simple_walk(6)
    for n in (0, 4):
        p = b.height_marginal(k, 4, n)
        assert p[0] == pytest.approx(1.0) and p[1:].sum() == 0
    p = b.height_marginal(k, 4, 2)
    assert p[0] == pytest.approx(2 / 3, abs=1e-15)
    assert p[2] == pytest.approx(1 / 3, abs=1e-15)


def test_marginal_matches_enumeration():
    k = rw_to_sos.kernel_from_phi(rw_to_sos.power_tail_phi(0.7, 0.2, 12))
    paths = b.enumerate_paths(10, (-1, 1), 12)
    pr = np.exp(b.bridge_log_probs(k, paths))
    assert pr.sum() == pytest.approx(1.0, abs=1e-13)
    for n in (3, 5):
        ref = np.bincount(paths[:, n], weights=pr, minlength=13)
        np.testing.assert_allclose(b.height_marginal(k, 10, n), ref, atol=1e-14)


def test_forbidden_step(simple_walk):
    with pytest.raises(ForbiddenStep):
        b.path_log_weight(simple_walk(5), (0, 1, 1, 0))


def test_sampler_deterministic_and_seed_sensitive():
    k = rw_to_sos.kernel_from_phi(rw_to_sos.power_tail_phi(0.5, 0.0, 8))
    a = b.sample_bridges(k, 8, 1000, seed=42)
    assert np.array_equal(a, b.sample_bridges(k, 8, 1000, seed=42))
    assert not np.array_equal(a, b.sample_bridges(k, 8, 1000, seed=43))
    assert np.all(a[:, 0] == 0) and np.all(a[:, -1] == 0)
    assert np.all(np.abs(np.diff(a, axis=1)) == 1)


def test_sampler_general_step_law():
    U = rw_to_sos.log_potential(2.0, 8)
    k = rw_to_sos.general_metropolis_kernel(rw_to_sos.geometric_base(1.0, 2), U)
    paths = b.enumerate_paths(4, range(-2, 3), 8)
    pr = np.exp(b.bridge_log_probs(k, paths))
    draws = b.sample_bridges(k, 4, 200_000, seed=7)
    keys = {tuple(p): i for i, p in enumerate(paths)}
    counts = np.bincount([keys[tuple(d)] for d in draws], minlength=len(paths))
    assert 0.5 * np.abs(counts / counts.sum() - pr).sum() < 0.01


def test_gauge_invariance_of_bridge_law():
    m = presets.square_well_model(-1.0, 30)
    g = sos_to_rw.perron_ground_state(m)
    k1 = sos_to_rw.kernel_from_sos(m, g)
    k2 = sos_to_rw.kernel_from_sos(m, GroundState(g.rho, g.U - 3.0))
    paths = b.enumerate_paths(8, (-1, 1), 30)
    np.testing.assert_allclose(b.bridge_log_probs(k1, paths), b.bridge_log_probs(k2, paths),
                               atol=1e-13)
    np.testing.assert_allclose(b.bridge_log_probs(k1, paths), b.bridge_log_probs(m, paths),
                               atol=1e-13)


def test_large_N_partition_function_finite():
    m = presets.square_well_model(-1.0, 2000)
    z = b.partition_function(m, 1600)
    assert np.isfinite(z)


def test_shift_of_V_cancels():
    m = presets.double_step_model(-1.0, 0.4, 12)
    paths = b.enumerate_paths(10, (-1, 1), 12)
    shifted = m.with_V(m.V + 2.5)
    assert np.abs(b.bridge_log_probs(m, paths) - b.bridge_log_probs(shifted, paths)).max() < 1e-12


@pytest.mark.parametrize("N", [2, 6, 12])
def test_partition_function_is_sum_of_weights(N):
    U = rw_to_sos.log_potential(1.0, 8)
    for model in (rw_to_sos.sos_from_metropolis(U, "metropolis-wall"),
                  rw_to_sos.sos_from_phi(rw_to_sos.power_tail_phi(-0.7, 0.4, 8))):
        paths = b.enumerate_paths(N, model.step_set(), 8)
        lt = b.log_transfer(model)
        # the union step set also lists steps that are only allowed at some heights
        total = math.fsum(np.exp(lt[paths[:, :-1], paths[:, 1:]].sum(axis=1)))
        assert b.partition_function(model, N) == pytest.approx(math.log(total), abs=1e-12)

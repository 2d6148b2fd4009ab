import math

import numpy as np
import pytest

import walklab as wl
from walklab.chains import (APERIODIC, ChainError, chain_from_kernel,
                            distances, evolve, mixing_profile, point_mass,
                            power_chain, srw_chain)


def petersen_adjacency():
    g = wl.build_named("petersen")
    a = np.zeros((10, 10))
    for u, v in g.edges:
        a[u, v] = a[v, u] = 1.0
    return a


def test_srw_k4(k4_chain):
    p = k4_chain.kernel.toarray()
    assert np.allclose(p, (np.ones((4, 4)) - np.eye(4)) / 3.0)
    assert np.allclose(k4_chain.stationary, 0.25)
    assert k4_chain.period_info == APERIODIC


def test_srw_petersen(petersen_chain):
    assert np.allclose(petersen_chain.stationary, 0.1)
    assert petersen_chain.period_info == APERIODIC


def test_srw_two_component_inflation(c6):
    chain = srw_chain(wl.inflate(c6, 2))
    assert len(chain.components) == 2
    assert chain.period_info == APERIODIC
    assert np.allclose(chain.stationary, 1.0 / 6.0)


def test_srw_rejects_isolated():
    g = wl.make_graph(3, [(0, 1)])
    with pytest.raises(ChainError, match=r"\[2\]"):
        srw_chain(g)


def test_evolve_k4_one_step(k4_chain):
    mu = evolve(k4_chain, point_mass(4, 0), 1)
    assert np.allclose(mu, [0, 1 / 3, 1 / 3, 1 / 3])


def test_evolve_stationarity(petersen_chain):
    pi = petersen_chain.stationary
    for t in (1, 5, 17):
        assert np.allclose(evolve(petersen_chain, pi, t), pi, atol=1e-14)


def test_evolve_petersen_two_steps(petersen, petersen_chain):
    # oracle: A^2 = J + 2I - A, so P^2 = (J + 2I - A)/9
    a = petersen_adjacency()
    oracle = (np.ones((10, 10)) + 2 * np.eye(10) - a) / 9.0
    mu = evolve(petersen_chain, point_mass(10, 0), 2)
    assert np.allclose(mu, oracle[0], atol=1e-14)
    assert math.isclose(mu[0], 1 / 3)
    assert sorted(set(np.round(mu, 12))) == [0.0, round(1 / 9, 12), round(1 / 3, 12)]


def test_evolve_semigroup(petersen_chain):
    mu_s = evolve(petersen_chain, point_mass(10, 3), 4)
    two_leg = evolve(petersen_chain, evolve(petersen_chain, point_mass(10, 3), 1), 3)
    assert np.abs(mu_s - two_leg).max() <= 1e-10


def test_distances_k4(k4_chain):
    tv0, l20 = distances(k4_chain, 0, 0)
    assert math.isclose(tv0, 0.75)
    assert math.isclose(l20, 3.0)
    tv1, l21 = distances(k4_chain, 0, 1)
    assert math.isclose(tv1, 0.25)
    assert math.isclose(l21, 1 / 3)


def test_distances_petersen_t4(petersen_chain):
    # P^4 row: 15/81 at start, 4/81 on neighbors, 9/81 elsewhere
    tv, _ = distances(petersen_chain, 0, 4)
    assert abs(tv - 41 / 270) < 1e-12


def test_jensen_inequality_everywhere(petersen_chain, k4_chain):
    for chain in (petersen_chain, k4_chain):
        for x in range(chain.n):
            for t in range(8):
                tv, l2 = distances(chain, x, t)
                assert 4 * tv * tv <= l2 + 1e-12


def test_mixing_profile_petersen(petersen_chain):
    prof = mixing_profile(petersen_chain, [0.25])
    expected = (0.9, 0.7, 0.3, 23 / 90, 41 / 270)
    assert len(prof.tv_curve) >= 5
    for got, want in zip(prof.tv_curve[:5], expected):
        assert abs(got - want) < 1e-10
    assert prof.mixing_times[0.25] == 4
    assert prof.cutoff_ratios[0.25] == 4.0
    assert prof.exact_starts


def test_mixing_profile_k4(k4_chain):
    prof = mixing_profile(k4_chain, [0.25])
    assert prof.mixing_times[0.25] == 1
    # TV(0) = 3/4 hits the 0.75 target at t = 0, so the ratio divides by 0
    assert prof.mixing_times[0.75] == 0
    assert prof.cutoff_ratios[0.25] == math.inf


def test_mixing_profile_bipartite_error():
    chain = srw_chain(wl.build_named("cycle", 4))
    with pytest.raises(ChainError, match="periodic"):
        mixing_profile(chain, [0.25])


def test_mixing_profile_reducible_error(c6):
    chain = srw_chain(wl.inflate(c6, 2))
    with pytest.raises(ChainError, match="reducible"):
        mixing_profile(chain, [0.25])


def test_mixing_profile_sampled_starts(random_cubic_medium):
    chain = srw_chain(random_cubic_medium)
    exact = mixing_profile(chain, [0.25])
    sampled = mixing_profile(chain, [0.25], exact_start_limit=50,
                             sample_starts=16)
    assert not sampled.exact_starts
    assert len(sampled.starts) == 16
    # a start subset can only lower the worst-start curve
    assert sampled.mixing_times[0.25] <= exact.mixing_times[0.25]


def test_power_chain_identity(k4_chain):
    assert power_chain(k4_chain, 1) is k4_chain


def test_power_chain_k4_square(k4_chain):
    p2 = power_chain(k4_chain, 2)
    dense = p2.kernel.toarray()
    assert math.isclose(dense[0, 0], 1 / 3)
    assert math.isclose(dense[0, 1], 2 / 9)


def test_power_chain_petersen_cube(petersen_chain):
    # oracle: A^3 = 2J + 3A - 2I over 27
    a = petersen_adjacency()
    oracle = (2 * np.ones((10, 10)) + 3 * a - 2 * np.eye(10)) / 27.0
    p3 = power_chain(petersen_chain, 3)
    assert np.allclose(p3.kernel.toarray(), oracle, atol=1e-14)


def test_power_chain_matches_evolve(petersen_chain):
    p4 = power_chain(petersen_chain, 4)
    for x in range(10):
        direct = evolve(petersen_chain, point_mass(10, x), 4)
        one = evolve(p4, point_mass(10, x), 1)
        assert np.abs(direct - one).max() <= 1e-10


def test_chain_from_kernel_validates():
    bad = np.array([[0.5, 0.5], [0.9, 0.2]])
    with pytest.raises(ChainError, match="rows"):
        chain_from_kernel(bad, np.array([0.5, 0.5]))
    asym = np.array([[0.0, 1.0], [0.5, 0.5]])
    with pytest.raises(ChainError, match="balance"):
        chain_from_kernel(asym, np.array([0.5, 0.5]))


def test_tv_monotone_on_profile(random_cubic_medium):
    chain = srw_chain(random_cubic_medium)
    prof = mixing_profile(chain, [0.25])
    curve = prof.tv_curve
    assert all(curve[i + 1] <= curve[i] + 1e-12 for i in range(len(curve) - 1))
    l2 = prof.l2sq_curve
    assert all(l2[i + 1] <= l2[i] + 1e-10 for i in range(len(l2) - 1))

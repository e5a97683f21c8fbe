from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla
from scipy import stats

from lyapgraph.errors import ConfigError, DepthInsufficientError
from lyapgraph.graph import antitree, d_ary_tree, line_chain, materialize, sphere_decomposition
from lyapgraph.laplacian import dirichlet_matrix
from lyapgraph.radial import radial_recursion, reduce_to_radial
from lyapgraph.rng import block_streams, path_stream
from lyapgraph.stochastic import (
    BirthDeathRates,
    Walker,
    explosion_probe,
    first_jump_samples,
    mc_continuous_functional,
    mc_discrete_functional,
    min_of_exponentials,
    radial_ratio_estimate,
    simulate_ctmc,
    simulate_dtmc,
)


def _slice(gen, depth):
    gs = materialize(gen, depth)
    return gs, sphere_decomposition(gs)


def test_streams_are_reproducible_and_distinct():
    a = path_stream(3, 7).random(4)
    np.testing.assert_array_equal(a, path_stream(3, 7).random(4))
    assert not np.array_equal(a, path_stream(3, 8).random(4))
    assert not np.array_equal(a, path_stream(3, 7, 1).random(4))
    assert not np.array_equal(a, path_stream((3, 1), 7).random(4))
    spans = [(s, e) for s, e, _ in block_streams(0, 10_000, block=4096)]
    assert spans == [(0, 4096), (4096, 8192), (8192, 10_000)]


def test_walker_transition_probabilities():
    gs, d = _slice(antitree([1, 2, 3, "..."]), 4)
    w = Walker(gs)
    x = int(d.spheres[1][0])
    u = np.random.default_rng(0).random(60_000)
    targets = w.jump(np.full(u.size, x), u)
    row = gs.weights[x]
    p = dict(zip(row.indices, row.data / row.data.sum()))
    counts = {y: int(np.sum(targets == y)) for y in p}
    assert sum(counts.values()) == u.size
    for y, py in p.items():
        se = math.sqrt(py * (1 - py) / u.size)
        assert abs(counts[y] / u.size - py) < 4 * se


def test_dtmc_moves_along_edges():
    gs, d = _slice(d_ary_tree(3), 8)
    path = simulate_dtmc(gs, (0,), 200, seed=1, stop_level=6, decomp=d)
    for a, b in zip(path.states, path.states[1:]):
        assert gs.weights[a, b] > 0


def test_ctmc_holding_times():
    gs, d = _slice(d_ary_tree(2), 3)
    holds = []
    for seed in range(400):
        p = simulate_ctmc(gs, (0,), n_jumps=1, seed=seed)
        holds.append(p.times[1])
    # the root has deg 2
    assert stats.kstest(holds, "expon", args=(0, 0.5)).pvalue > 0.01
    with pytest.raises(ConfigError):
        simulate_ctmc(gs, (0,))


def test_boundary_hit_raises():
    gs, d = _slice(d_ary_tree(2), 3)
    with pytest.raises(DepthInsufficientError):
        mc_continuous_functional(gs, d, (0,), 3, 0.0, 100)


def test_min_of_exponentials_law():
    rates = np.array([0.5, 1.0, 2.5])
    t, k = min_of_exponentials(rates, 10_000, seed=2)
    assert stats.kstest(t, "expon", args=(0, 1 / rates.sum())).pvalue > 0.01
    p = rates / rates.sum()
    freq = np.bincount(k, minlength=3) / k.size
    assert np.all(np.abs(freq - p) < 3 * np.sqrt(p * (1 - p) / k.size) + 1e-12)


def test_artificial_clock_does_not_change_first_jump():
    gs, d = _slice(antitree([1, 3, 2]), 4)
    x = gs.vertices[d.spheres[1][0]]
    t0, y0 = first_jump_samples(gs, x, 10_000, seed=1)
    t1, y1 = first_jump_samples(gs, x, 10_000, seed=2, artificial=5.0)
    assert stats.ks_2samp(t0, t1).pvalue > 0.01
    for y in np.unique(y0):
        p0, p1 = np.mean(y0 == y), np.mean(y1 == y)
        se = math.sqrt(p0 * (1 - p0) / 10_000 * 2)
        assert abs(p0 - p1) < 4 * se


def test_zero_potential_gives_one():
    gs, d = _slice(d_ary_tree(2), 8)
    est = mc_continuous_functional(gs, d, (0,), 5, 0.0, 500, seed=1)
    assert np.all(est.samples == 1.0) and est.mean == 1.0
    est = mc_discrete_functional(gs, d, (0,), 5, 1.0, 500, seed=1)
    assert est.mean == 1.0
    r = radial_ratio_estimate(gs, d, 5, 0.0, 200, seed=1)
    np.testing.assert_array_equal(r.ratio, 1.0)


def test_mean_exit_time_matches_linear_solve():
    gs, d = _slice(antitree([1, 2, 3, "..."]), 7)
    N = 4
    U = d.ball(N)
    dm = dirichlet_matrix(gs, U)
    # E T solves Delta u = 1 on B_N with u = 0 outside
    u = spla.spsolve(dm.operator.tocsc(), np.ones(U.size))
    est = mc_continuous_functional(gs, d, (0, 0), N, 0.0, 20_000, seed=4)
    se = est.exit_times.std(ddof=1) / math.sqrt(est.n_paths)
    assert abs(est.exit_times.mean() - u[0]) < 4 * se


def test_ratio_estimate_matches_recursion():
    gs, d = _slice(d_ary_tree(2), 8)
    lam = 0.1
    N = 4
    r = radial_ratio_estimate(gs, d, N, lam, 20_000, seed=3)
    W = radial_recursion(reduce_to_radial(gs, d), lam, n_max=N).W
    for n in range(N + 1):
        assert abs(r.ratio[n] - W[n]) <= 4 * r.se[n] + 1e-15


def test_estimates_are_reproducible():
    gs, d = _slice(d_ary_tree(2), 8)
    a = mc_continuous_functional(gs, d, (0,), 4, 0.1, 300, seed=9)
    b = mc_continuous_functional(gs, d, (0,), 4, 0.1, 300, seed=9)
    np.testing.assert_array_equal(a.samples, b.samples)


def test_explosion_probe():
    rep = explosion_probe(BirthDeathRates(lambda n: (n + 1) ** 2), 0, 10.0, 2000, 2000, seed=1)
    assert rep.prob > 0.99
    # sum 1/(n+1)^2 over the first 2000 jumps
    exact = sum(1 / (n + 1) ** 2 for n in range(2000))
    assert abs(rep.mean_time - exact) < 4 * rep.mean_time_se
    rep = explosion_probe(BirthDeathRates(1.0), 0, 10.0, 2000, 500)
    assert rep.prob == 0.0
    rep = explosion_probe(line_chain(1.0, 1.0), 0, 10.0, 500, 200)
    assert rep.prob == 0.0
    with pytest.raises(ConfigError):
        explosion_probe(d_ary_tree(2), 0, 1.0, 10, 10)
    with pytest.raises(ConfigError):
        BirthDeathRates(-1.0).arrays(3)

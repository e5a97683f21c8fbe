from __future__ import annotations

import math

import numpy as np
import pytest

from lyapgraph.eigen import (
    annulus,
    dirichlet_eigs,
    harmonic_glue,
    persson_scan,
    resolvent_superharmonic,
    weyl_ratio,
)
from lyapgraph.errors import CapacityError, ConfigError, PreconditionError
from lyapgraph.graph import d_ary_tree, edge_list, line_chain, materialize, sphere_decomposition


def _slice(gen, depth):
    gs = materialize(gen, depth)
    return gs, sphere_decomposition(gs)


def test_path_dirichlet_spectrum():
    n = 12
    gs, _ = _slice(edge_list([(i, i + 1, 1.0) for i in range(n + 1)]), n + 2)
    U = [(i,) for i in range(1, n + 1)]
    res = dirichlet_eigs(gs, U, k="all", vectors=True)
    exact = 2 - 2 * np.cos(np.arange(1, n + 1) * math.pi / (n + 1))
    np.testing.assert_allclose(res.values, exact, atol=1e-13)
    # eigenvectors are orthonormal for the m-weighted inner product
    V = res.vectors
    np.testing.assert_allclose(V.T @ (gs.measure[res.region, None] * V), np.eye(n), atol=1e-12)


def test_trace_equals_degree_sum():
    gs, _ = _slice(d_ary_tree(3, weighting="normalized"), 5)
    t = weyl_ratio(gs)
    assert t.eigenvalues.sum() == pytest.approx(t.degrees.sum(), rel=1e-12)
    assert t.index[0] == 1 and len(t.ratio) == gs.interior.size


def test_weyl_capacity():
    gs, _ = _slice(d_ary_tree(2), 6)
    with pytest.raises(CapacityError):
        weyl_ratio(gs, limit=10)


def test_dense_and_iterative_agree():
    gs, _ = _slice(d_ary_tree(2), 12)
    assert gs.interior.size > 2000
    it = dirichlet_eigs(gs, k=3, seed=1)
    assert it.method == "iterative"
    de = dirichlet_eigs(gs, k=3, method="dense")
    np.testing.assert_allclose(it.values, de.values, rtol=1e-10)
    assert np.all(it.residuals < 1e-8)


def test_iterative_is_seed_stable():
    gs, _ = _slice(d_ary_tree(2), 12)
    a = dirichlet_eigs(gs, k=2, seed=0).values
    b = dirichlet_eigs(gs, k=2, seed=5).values
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_bad_k():
    gs, _ = _slice(d_ary_tree(2), 3)
    with pytest.raises(ConfigError):
        dirichlet_eigs(gs, k=0)
    with pytest.raises(ConfigError):
        dirichlet_eigs(gs, k="most")


def test_ball_eigenvalue_decreases_with_radius():
    gs, d = _slice(d_ary_tree(3), 8)
    vals = [dirichlet_eigs(gs, d.ball(N)).lambda1 for N in range(8)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_persson_scan_increases():
    gs, d = _slice(d_ary_tree(2), 10)
    rows = persson_scan(gs, d, range(0, 8))
    vals = [v[0] for _, v in rows]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert [K for K, _ in rows] == list(range(8))


def test_resolvent_and_glue_on_tree():
    gs, d = _slice(d_ary_tree(2), 12)
    res = resolvent_superharmonic(gs, d, 2)
    A = annulus(gs, d, 2)
    assert np.all(res.phi[A] > 0) and np.all(res.phi[d.level <= 2] == 0)
    assert res.lam == pytest.approx(0.9 * res.lambda1)
    glue = harmonic_glue(gs, d, res)
    assert glue.ok
    assert np.all(glue.W[gs.interior] > 0)


def test_resolvent_needs_lambda_below_bottom():
    gs, d = _slice(d_ary_tree(2), 8)
    with pytest.raises(PreconditionError):
        resolvent_superharmonic(gs, d, 2, lam=10.0)


def test_flatten_glue_on_chain():
    gs, d = _slice(line_chain(2.0, 1.0), 30)
    res = resolvent_superharmonic(gs, d, 1)
    glue = harmonic_glue(gs, d, res, method="flatten")
    assert glue.ok
    gs, d = _slice(d_ary_tree(2), 8)
    res = resolvent_superharmonic(gs, d, 1)
    with pytest.raises(PreconditionError):
        harmonic_glue(gs, d, res, method="flatten")

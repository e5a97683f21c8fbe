from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapgraph.errors import (
    AsymmetricGraphError,
    CapacityError,
    ConfigError,
    NotWSSError,
    PreconditionError,
)
from lyapgraph.graph import (
    antitree,
    as_sequence,
    branching_tree,
    d_ary_tree,
    degree_profile,
    degree_table,
    detect_wss,
    edge_list,
    factorial_tree,
    full_levels,
    induced_subgraph,
    line_chain,
    materialize,
    parse_sequence,
    parse_vertex,
    radial_tree,
    sphere_decomposition,
    tree_complete_spheres,
    vertex_str,
)
from lyapgraph.laplacian import apply_laplacian


def _slice(gen, depth):
    gs = materialize(gen, depth)
    return gs, sphere_decomposition(gs)


def test_binary_tree_counts():
    gs, d = _slice(d_ary_tree(2), 3)
    assert gs.n == 15
    assert [len(s) for s in d.spheres] == [1, 2, 4, 8]
    assert gs.interior.size == 7
    assert np.all(gs.boundary == (d.level == 3))
    assert gs.eta[gs.idx((0,))] == 2
    assert np.all(gs.eta[gs.interior][1:] == 3)


def test_normalized_weights_have_unit_degree():
    gs, _ = _slice(d_ary_tree(3, weighting="normalized"), 4)
    I = gs.interior
    np.testing.assert_allclose(gs.deg[I], 1.0, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(gs.measure[I], gs.eta[I])


def test_radial_tree_sphere_sizes():
    _, d = _slice(radial_tree([3, 4]), 3)
    assert [len(s) for s in d.spheres] == [1, 3, 9, 27]


def test_antitree_is_complete_between_spheres():
    gs, d = _slice(antitree([1, 2, 3, "..."]), 4)
    assert [len(s) for s in d.spheres] == [1, 2, 3, 4, 5]
    ep, em, e0 = degree_table(gs, d)
    for n in range(4):
        s = d.spheres[n]
        assert np.all(ep[s] == n + 2)
        assert np.all(em[s] == (n if n else 0))
        assert np.all(e0[s] == 0)


def test_tree_with_complete_spheres_has_sphere_edges():
    gs, d = _slice(tree_complete_spheres(3), 3)
    p = detect_wss(gs, d)
    assert p is not None
    np.testing.assert_array_equal(p.deg_zero, [0, 2, 8])
    np.testing.assert_array_equal(p.deg_plus, [3, 3, 3])


def test_factorial_tree_sizes():
    _, d = _slice(factorial_tree(), 4)
    assert [len(s) for s in d.spheres] == [1, 1, 2, 6, 24]


def test_line_chain_measure_balance():
    gs, d = _slice(line_chain([1, 2, 3], [1, 1, 2]), 4)
    np.testing.assert_allclose(gs.measure, [1, 1, 1, 1.5, 2.25])
    ep, em, _ = degree_table(gs, d)
    I = gs.interior
    np.testing.assert_allclose((ep / gs.measure)[I], [1, 2, 3, 3])
    np.testing.assert_allclose((em / gs.measure)[I], [0, 1, 2, 2])


def test_edge_list_path_and_measures():
    gen = edge_list([(0, 1, 2.0), (1, 2, 1.0)], measures={0: 1.0, 1: 2.0, 2: 1.0})
    gs, d = _slice(gen, 5)
    assert gs.weighting == "explicit"
    assert gs.interior.size == 3
    f = np.array([1.0, 0.0, 0.0])
    # (1/m(x)) sum_y E(x,y)(f(x) - f(y))
    np.testing.assert_allclose(apply_laplacian(gs, f), [2.0, -1.0, 0.0])


def test_edge_list_rejects_bad_input():
    with pytest.raises(AsymmetricGraphError):
        edge_list([(0, 1, 1.0), (1, 0, 2.0)])
    with pytest.raises(ConfigError):
        edge_list([(0, 0, 1.0)])
    with pytest.raises(ConfigError):
        edge_list([(0, 1, -1.0)])
    with pytest.raises(ConfigError):
        edge_list([(0, 1, 1.0)], measures={0: 1.0})


def test_both_directions_with_equal_weight_allowed():
    gs, _ = _slice(edge_list([(0, 1, 1.5), (1, 0, 1.5)]), 2)
    assert gs.weights[0, 1] == 1.5


def test_capacity_error():
    with pytest.raises(CapacityError):
        materialize(d_ary_tree(3), 12, max_vertices=1000)


def test_vertex_roundtrip():
    for v in [(0,), (0, 1, 2), (3, 14)]:
        assert parse_vertex(vertex_str(v)) == v
    with pytest.raises(ConfigError):
        parse_vertex("a.b")


def test_sequences():
    s = as_sequence([1, 2, "..."])
    assert [s(n) for n in range(5)] == [1, 2, 3, 4, 5]
    s = as_sequence([4, 7])
    assert [s(n) for n in range(4)] == [4, 7, 7, 7]
    assert as_sequence(2.5)(100) == 2.5
    (f,) = parse_sequence("(n + 1)**2")
    assert [f(n) for n in range(4)] == [1, 4, 9, 16]
    assert parse_sequence("1, 2, ...") == [1.0, 2.0, "..."]
    with pytest.raises(ConfigError):
        parse_sequence("__import__('os')")
    with pytest.raises(ConfigError):
        parse_sequence("1, x")


def test_wss_detection():
    gs, d = _slice(d_ary_tree(2), 5)
    p = detect_wss(gs, d)
    assert p is not None and p.n_levels == full_levels(gs, d) == 5
    gen = branching_tree(lambda x: 3 if x == (0,) else (1 if x[-1] == 0 else 2))
    gs, d = _slice(gen, 4)
    assert detect_wss(gs, d) is None


def test_degree_profile_root():
    gs, d = _slice(d_ary_tree(4), 3)
    p = degree_profile(gs, d, (0,))
    assert (p.eta_plus, p.eta_minus, p.eta_zero, p.m) == (4, 0, 0, 1)
    p = degree_profile(gs, d, (0, 2))
    assert (p.deg_plus, p.deg_minus, p.deg) == (4, 1, 5)


def test_induced_subgraph_marks_new_boundary():
    gs, d = _slice(d_ary_tree(2), 4)
    sub = induced_subgraph(gs, d.ball(2))
    assert sub.n == 7
    assert sub.boundary.sum() == 4


def test_boundary_vertices_refuse_operators():
    gs, d = _slice(d_ary_tree(2), 2)
    with pytest.raises(PreconditionError):
        gs.require_interior(d.spheres[2])


def test_not_wss_error_type():
    assert issubclass(NotWSSError, PreconditionError)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 3), min_size=1, max_size=6), st.sampled_from(["combinatorial", "normalized"]))
def test_random_trees_are_symmetric_and_layered(branch, weighting):
    gen = branching_tree(lambda x: branch[(len(x) - 1) % len(branch)], weighting=weighting)
    gs, d = _slice(gen, 4)
    W = gs.weights
    assert abs(W - W.T).max() == 0
    r, c = W.nonzero()
    assert np.all(np.abs(d.level[r] - d.level[c]) <= 1)
    assert np.all(gs.measure > 0)
    total = sum(len(s) for s in d.spheres)
    assert total == gs.n
    for n in range(1, d.n_levels):
        assert len(d.spheres[n]) == len(d.spheres[n - 1]) * branch[(n - 1) % len(branch)]
    assert math.isclose(float(gs.deg[gs.interior].max()), 1.0) or weighting == "combinatorial"

"""Acceptance suite: one test and one printed verdict per criterion."""

from __future__ import annotations

import math
import time

import numpy as np
from conftest import criterion
from scipy import stats

from lyapgraph.bounds import (
    fujiwara_pair,
    lyapunov_bounded_bound,
    lyapunov_ratio_bound,
    lyapunov_spi_beta,
    spi_s_grid,
    verify_spi,
)
from lyapgraph.coupling import coupled_simulate
from lyapgraph.eigen import dirichlet_eigs, harmonic_glue, resolvent_superharmonic, weyl_ratio
from lyapgraph.graph import (
    antitree,
    d_ary_tree,
    edge_list,
    factorial_tree,
    line_chain,
    materialize,
    radial_tree,
    sphere_decomposition,
    tree_complete_spheres,
)
from lyapgraph.laplacian import hardy_potential, inner, quadratic_form
from lyapgraph.radial import (
    averaging_check,
    jacobi_dirichlet_eigs,
    radial_recursion,
    reduce_to_radial,
)
from lyapgraph.stochastic import (
    BirthDeathRates,
    explosion_probe,
    first_jump_samples,
    mc_continuous_functional,
    min_of_exponentials,
    radial_ratio_estimate,
)


def _slice(gen, depth):
    gs = materialize(gen, depth)
    return gs, sphere_decomposition(gs)


def _random_graph(rng, n, weighting):
    # a random spanning tree plus a few chords, random weights and measures
    edges = [(k, int(rng.integers(k)), float(rng.uniform(0.1, 3))) for k in range(1, n)]
    for _ in range(n // 2):
        u, v = rng.choice(n, 2, replace=False)
        if not any({u, v} == {a, b} for a, b, _ in edges):
            edges.append((int(u), int(v), float(rng.uniform(0.1, 3))))
    measures = {k: float(rng.uniform(0.2, 2)) for k in range(n)} if weighting == "explicit" else None
    return edge_list(edges, measures, weighting=weighting)


@criterion(1)
def test_tree_constants(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 4):
        for w, exact in (("combinatorial", d + 1 - 2 * math.sqrt(d)),
                         ("normalized", 1 - 2 * math.sqrt(d) / (d + 1))):
            gs, dec = _slice(d_ary_tree(d, w), 8)
            for rep in (lyapunov_bounded_bound(gs, dec), lyapunov_ratio_bound(gs, dec)):
                worst = max(worst, abs(rep.value - exact))
    gs, dec = _slice(d_ary_tree(2), 15)
    bound = 3 - 2 * math.sqrt(2)
    lam = np.array([dirichlet_eigs(gs, dec.ball(N)).lambda1 for N in range(4, 15)])
    dt = time.perf_counter() - t0
    ok = (worst <= 1e-12 and np.all(np.diff(lam) <= 0) and np.all(lam >= bound)
          and lam[-1] - bound <= 0.1 and dt < 30)
    verdict(1, ok, f"max constant error {worst:.1e}; lambda1(B_14) - bound = {lam[-1] - bound:.4f}; "
                   f"non-increasing {bool(np.all(np.diff(lam) <= 0))}; {dt:.1f} s")


@criterion(2)
def test_hardy_property(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    pool = [materialize(g, depth) for g, depth in [
        (d_ary_tree(2), 5), (d_ary_tree(3, "normalized"), 4), (antitree([1, 2, 3, "..."]), 5),
        (antitree([1, 3, 2], "normalized"), 5), (tree_complete_spheres(2), 5),
        (radial_tree([2, 3, 4, "..."]), 4), (line_chain([2, 3, 1], [1, 0.5]), 12),
        (factorial_tree(), 5)]]
    for w in ("combinatorial", "normalized", "explicit"):
        for _ in range(3):
            pool.append(materialize(_random_graph(rng, int(rng.integers(5, 30)), w), 40))
    worst, viol = math.inf, 0
    for k in range(1000):
        gs = pool[k % len(pool)]
        W = np.exp(rng.normal(0, rng.uniform(0.1, 3), gs.n))
        f = np.zeros(gs.n)
        f[gs.interior] = rng.standard_normal(gs.interior.size)
        V = np.nan_to_num(hardy_potential(gs, W))
        norm = inner(gs, f, f)
        gap = (quadratic_form(gs, f) - inner(gs, f, V * f)) / norm
        worst = min(worst, gap)
        viol += gap < -1e-9
    dt = time.perf_counter() - t0
    verdict(2, viol == 0 and dt < 10,
            f"1000 triples over {len(pool)} graphs; {viol} violations; worst relative gap {worst:.2e}; {dt:.1f} s")


@criterion(3)
def test_wss_reduction(verdict):
    t0 = time.perf_counter()
    vals, avg = [], []
    for gen in (tree_complete_spheres(3), d_ary_tree(3)):
        # depth 8 slice: S_8 is the boundary and B_7 the largest interior ball
        gs, dec = _slice(gen, 8)
        N = 7
        vals.append(dirichlet_eigs(gs, dec.ball(N)).lambda1)
        vals.append(float(jacobi_dirichlet_eigs(reduce_to_radial(gs, dec), N, 1)[0]))
        avg.append(averaging_check(gs, dec, n_samples=100, seed=3))
    spread = max(vals) - min(vals)
    dt = time.perf_counter() - t0
    ok = spread <= 1e-8 and all(a.passed for a in avg) and dt < 30
    verdict(3, ok, f"lambda1 spread {spread:.1e} over {len(vals)} values; averaging max error "
                   f"{max(a.max_error for a in avg):.1e}; {dt:.1f} s")


@criterion(4)
def test_probabilistic_representation(verdict):
    t0 = time.perf_counter()
    gs, dec = _slice(d_ary_tree(2), 8)
    N = 6
    lam = 0.9 * (3 - 2 * math.sqrt(2))
    W = radial_recursion(reduce_to_radial(gs, dec), lam, n_max=N).W
    est = radial_ratio_estimate(gs, dec, N, lam, 100_000, seed=4)
    z = np.abs(est.ratio[1:] - W[1:N + 1]) / est.se[1:]
    zero_mc = radial_ratio_estimate(gs, dec, N, 0.0, 2000, seed=4).ratio
    zero_rec = radial_recursion(reduce_to_radial(gs, dec), 0.0, n_max=N).W
    exact_one = bool(np.all(zero_mc == 1.0) and np.all(zero_rec == 1.0))
    dt = time.perf_counter() - t0
    ok = est.ratio[0] == 1.0 and np.all(z <= 3) and exact_one and dt < 60
    verdict(4, ok, f"max |MC - W|/SE = {z.max():.2f} over n = 1..{N}; lambda = 0 exact {exact_one}; {dt:.1f} s")


@criterion(5)
def test_coupling(verdict):
    t0 = time.perf_counter()
    N, n = 6, 10_000
    res = coupled_simulate(d_ary_tree(3), d_ary_tree(2), N, n, seed=7)
    pv = []
    for d, T in ((3, res.T_G), (2, res.T_H)):
        gs, dec = _slice(d_ary_tree(d), N + 2)
        solo = mc_continuous_functional(gs, dec, (0,), N, 0.0, n, seed=99)
        pv.append(stats.ks_2samp(T, solo.exit_times).pvalue)
    dt = time.perf_counter() - t0
    ok = res.n_violations == 0 and min(pv) > 0.01 and dt < 60
    verdict(5, ok, f"{res.n_violations} violations {dict(res.violations)}; KS p = "
                   f"{pv[0]:.3f} (G), {pv[1]:.3f} (H); {dt:.1f} s")


@criterion(6)
def test_bipartite_symmetry(verdict):
    gs, dec = _slice(d_ary_tree(2, "normalized"), 9)
    ev = dirichlet_eigs(gs, dec.ball(8), k="all").values
    err = float(np.max(np.abs(ev + ev[::-1] - 2)))
    verdict(6, err <= 1e-9, f"{ev.size} eigenvalues; max |lambda_i + lambda_(n+1-i) - 2| = {err:.1e}")


@criterion(7)
def test_fujiwara_pairs(verdict):
    rng = np.random.default_rng(7)
    graphs = [d_ary_tree(3, "normalized"), antitree([1, 2, 3, "..."], "normalized"),
              radial_tree([2, 3, "..."], "normalized"), tree_complete_spheres(2, "normalized")]
    graphs += [_random_graph(rng, 12, "normalized") for _ in range(3)]
    err, n = 0.0, 0
    for gen in graphs:
        gs = materialize(gen, 4 if gen.kind != "edge_list" else 40)
        I = gs.interior
        for _ in range(20):
            i, j = rng.choice(I, 2, replace=False)
            lo, hi = fujiwara_pair(gs, gs.vertices[i], gs.vertices[j])
            t = gs.weights[i, j] / math.sqrt(gs.eta[i] * gs.eta[j])
            err = max(err, abs(lo - (1 - t)), abs(hi - (1 + t)), abs(lo + hi - 2))
            n += 1
    verdict(7, err <= 1e-12, f"{n} pairs on {len(graphs)} graphs; max error {err:.1e}")


@criterion(8)
def test_constructive_supersolution(verdict):
    t0 = time.perf_counter()
    gs, dec = _slice(d_ary_tree(2), 15)
    res = resolvent_superharmonic(gs, dec, 2)
    glue = harmonic_glue(gs, dec, res)
    positive = bool(np.all(glue.W[gs.interior] > 0))
    dt = time.perf_counter() - t0
    ok = positive and glue.ok and dt < 30
    verdict(8, ok, f"lambda = {res.lam:.6f} = 0.9 lambda1(annulus); W > 0 {positive}; "
                   f"min relative slack {glue.slack.min():.2e}; {dt:.1f} s")


@criterion(9)
def test_exponential_clocks(verdict):
    n = 10_000
    rates = np.array([0.3, 1.0, 2.2, 4.0])
    t, k = min_of_exponentials(rates, n, seed=9)
    p_min = stats.kstest(t, "expon", args=(0, 1 / rates.sum())).pvalue
    p = rates / rates.sum()
    freq = np.bincount(k, minlength=rates.size) / n
    sel = float(np.max(np.abs(freq - p) / np.sqrt(p * (1 - p) / n)))
    gs, dec = _slice(antitree([1, 3, 2]), 4)
    x = gs.vertices[dec.spheres[1][0]]
    t0, y0 = first_jump_samples(gs, x, n, seed=1)
    t1, y1 = first_jump_samples(gs, x, n, seed=2, artificial=5.0)
    p_aug = stats.ks_2samp(t0, t1).pvalue
    aug = 0.0
    for y in np.union1d(y0, y1):
        a, b = np.mean(y0 == y), np.mean(y1 == y)
        q = 0.5 * (a + b)
        aug = max(aug, abs(a - b) / math.sqrt(2 * q * (1 - q) / n))
    ok = p_min > 0.01 and sel <= 3 and p_aug > 0.01 and aug <= 3
    verdict(9, ok, f"min-law KS p = {p_min:.3f}; selection {sel:.2f} SE; augmented clock KS p = "
                   f"{p_aug:.3f}, targets {aug:.2f} SE")


@criterion(10)
def test_explosion(verdict):
    t0 = time.perf_counter()
    fast = explosion_probe(BirthDeathRates(lambda n: (n + 1) ** 2), 0, 10.0, 10_000, 10_000, seed=10)
    slow = explosion_probe(BirthDeathRates(1.0), 0, 10.0, 10_000, 2000, seed=10)
    z = abs(fast.mean_time - math.pi ** 2 / 6) / fast.mean_time_se
    dt = time.perf_counter() - t0
    ok = fast.prob > 0.99 and z <= 3 and slow.prob < 0.01 and dt < 30
    verdict(10, ok, f"(n+1)^2 chain: P = {fast.prob:.4f}, mean {fast.mean_time:.4f} +- "
                    f"{fast.mean_time_se:.4f} ({z:.2f} SE from pi^2/6); unit rate: P = {slow.prob:.4f}; {dt:.1f} s")


@criterion(11)
def test_super_poincare(verdict):
    # depth 11 leaves B_10 as the interior
    gs, dec = _slice(d_ary_tree(2), 11)
    h = np.ones(gs.n)
    beta = lyapunov_spi_beta(gs, dec, math.sqrt(2), h)
    grid = spi_s_grid(beta, 8)
    rep = verify_spi(gs, h, beta, grid, n_samples=1000, seed=11)

    class Halved:
        s_min = beta.s_min

        def __call__(self, s):
            return 0.5 * beta(s)

    neg = verify_spi(gs, h, Halved(), grid, n_samples=1000, seed=11)
    ok = rep.n_violations == 0 and neg.n_violations > 0
    verdict(11, ok, f"beta: {rep.n_violations}/{rep.n_checks} violations (worst margin "
                    f"{rep.worst_margin:.3g}); halved beta: {neg.n_violations} violations "
                    f"(worst margin {neg.worst_margin:.3g}, negative control needs > 0)")


@criterion(12)
def test_weyl_diagnostic(verdict):
    meds, top7 = [], None
    for depth in (5, 6, 7):
        gs = materialize(factorial_tree(), depth)
        r = weyl_ratio(gs).ratio
        top = r[(3 * r.size) // 4:]
        meds.append(float(np.median(np.abs(top - 1))))
        top7 = top
    decreasing = all(b < a for a, b in zip(meds, meds[1:]))
    in_range = bool(np.all((top7 >= 0.5) & (top7 <= 1.5)))
    verdict(12, decreasing and in_range,
            f"medians {', '.join(f'{m:.5f}' for m in meds)}; depth-7 top-quartile range "
            f"[{top7.min():.3f}, {top7.max():.3f}]")

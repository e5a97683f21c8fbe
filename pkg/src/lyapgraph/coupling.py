"""Level-wise coupling of the continuous-time walks on two graphs.

At synchronisation times both walks sit on spheres of the same index.
They are given artificial self-jump clocks so that the total rates have
ratio ``alpha``, share one exponential holding time (scaled by
``alpha`` for the slower graph) and one uniform variable to choose the
next vertex.  When the second walk falls behind, the first one is frozen
until the second catches up with its level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DepthInsufficientError, PreconditionError
from .graph import (
    GraphGenerator,
    GraphSlice,
    SphereDecomposition,
    degree_table,
    materialize,
    sphere_decomposition,
    vertex_str,
)
from .rng import path_stream


def _as_slice(g, depth):
    if isinstance(g, GraphGenerator):
        gs = materialize(g, depth)
        return gs, sphere_decomposition(gs)
    if isinstance(g, tuple):
        return g
    if isinstance(g, GraphSlice):
        return g, sphere_decomposition(g)
    raise ConfigError("expected a generator, a slice or a (slice, decomposition) pair")


@dataclass(frozen=True)
class PairCheck:
    level: int
    G: tuple
    H: tuple
    alpha_low: float
    alpha_high: float

    @property
    def ok(self):
        return self.alpha_low <= self.alpha_high


@dataclass
class SWCGReport:
    """Outcome of the level-wise comparison ``G`` dominates ``H``.

    ``pairs`` lists, for each level, every combination of distinct
    ``(deg_+, deg_-)`` classes with its admissible interval for ``alpha``.
    """

    ok: bool
    horizon: int
    pairs: list = field(default_factory=list)
    witness: dict | None = None


def _classes(gs, decomp, n, ep, em):
    s = decomp.spheres[n]
    gs.require_interior(s)
    rows = np.stack([ep[s] / gs.measure[s], em[s] / gs.measure[s]], axis=1)
    uniq, first = np.unique(rows, axis=0, return_index=True)
    return [(float(u[0]), float(u[1]), gs.vertices[s[i]]) for u, i in zip(uniq, first)]


def alpha_interval(dpG, dmG, dpH, dmH):
    """``[max(deg_-^G / deg_-^H, 1), deg_+^G / deg_+^H]``."""
    if dmH == 0:
        low = 1.0 if dmG == 0 else math.inf
    else:
        low = max(dmG / dmH, 1.0)
    high = dpG / dpH if dpH > 0 else math.inf
    return low, high


def check_swcg(G, H, horizon: int) -> SWCGReport:
    """Check ``deg_+^G >= deg_+^H`` and ``deg_+^G/deg_-^G >= deg_+^H/deg_-^H`` level by level.

    ``G`` and ``H`` are generators, slices or ``(slice, decomposition)``
    pairs.  The first failing pair is returned as a witness.
    """
    horizon = int(horizon)
    gsG, dG = _as_slice(G, horizon + 1)
    gsH, dH = _as_slice(H, horizon + 1)
    tabG = degree_table(gsG, dG)
    tabH = degree_table(gsH, dH)
    report = SWCGReport(ok=True, horizon=horizon)
    for n in range(horizon + 1):
        if n >= dG.n_levels or n >= dH.n_levels:
            raise DepthInsufficientError(f"level {n} is not materialized")
        cg = _classes(gsG, dG, n, tabG[0], tabG[1])
        ch = _classes(gsH, dH, n, tabH[0], tabH[1])
        for dpG, dmG, xG in cg:
            for dpH, dmH, yH in ch:
                low, high = alpha_interval(dpG, dmG, dpH, dmH)
                report.pairs.append(PairCheck(n, (dpG, dmG), (dpH, dmH), low, high))
                if low > high and report.ok:
                    report.ok = False
                    why = ("deg_+^G < deg_+^H" if dpG < dpH
                           else "deg_+^G/deg_-^G < deg_+^H/deg_-^H")
                    report.witness = {"level": n, "x": vertex_str(xG), "y": vertex_str(yH),
                                      "deg_plus_G": dpG, "deg_minus_G": dmG,
                                      "deg_plus_H": dpH, "deg_minus_H": dmH, "reason": why}
    return report


class _Moves:
    """Per-vertex jump tables ordered by level (outward first), then vertex id."""

    def __init__(self, gs: GraphSlice, decomp: SphereDecomposition):
        self.gs, self.level = gs, decomp.level
        self.deg = gs.deg
        self._cache = {}

    def table(self, x):
        t = self._cache.get(x)
        if t is None:
            gs = self.gs
            row = gs.weights[x]
            m = gs.measure[x]
            items = [(-self.level[y], vertex_str(gs.vertices[y]), int(y), w / m)
                     for y, w in zip(row.indices, row.data)]
            items.append((-self.level[x], vertex_str(gs.vertices[x]), int(x), None))
            items.sort()
            t = [(y, r) for _, _, y, r in items]
            self._cache[x] = t
        return t

    def pick(self, x, z, u):
        """Inverse CDF over neighbours and the artificial self-jump of rate ``z - deg``."""
        acc = 0.0
        target = u * z
        last = x
        for y, r in self.table(x):
            acc += (z - self.deg[x]) if r is None else r
            last = y
            if target < acc:
                return y
        return last


@dataclass(eq=False)
class CouplingSample:
    """One coupled pair of paths with its synchronisation times."""

    sync_G: np.ndarray
    sync_H: np.ndarray
    sync_level: np.ndarray
    T_G: float
    T_H: float
    L_G: np.ndarray
    L_H: np.ndarray
    violations: dict


@dataclass(eq=False)
class CouplingResult:
    T_G: np.ndarray
    T_H: np.ndarray
    L_G: np.ndarray
    L_H: np.ndarray
    violations: dict
    samples: list

    @property
    def n_violations(self):
        return sum(self.violations.values())


CHECKS = ("sync_level", "increment", "level_order", "exit_time", "occupation")


def _couple_one(MG, MH, x, y, N, rng, rng_catch, tol=1e-12):
    lvG, lvH = MG.level, MH.level
    tG = tH = 0.0
    LG = np.zeros(N + 1)
    LH = np.zeros(N + 1)
    sG, sH, sL = [0.0], [0.0], [int(lvG[x])]
    bad = dict.fromkeys(CHECKS, 0)
    while lvG[x] <= N:
        n = int(lvG[x])
        if lvH[y] != n:
            bad["sync_level"] += 1
            break
        for gs_, v in ((MG.gs, x), (MH.gs, y)):
            if gs_.boundary[v]:
                raise DepthInsufficientError(f"coupled walk reached boundary vertex {vertex_str(gs_.vertices[v])}")
        dG, dH = MG.deg[x], MH.deg[y]
        dmG = _deg_minus(MG, x)
        dmH = _deg_minus(MH, y)
        alpha = 1.0 if dmH == 0 else max(dmG / dmH, 1.0)
        z2 = dH * max(1.0, dG / (alpha * dH))
        z1 = alpha * z2
        g = rng.exponential() / z1
        h = alpha * g
        u = rng.random()
        x = MG.pick(x, z1, u)
        y = MH.pick(y, z2, u)
        tG += g
        tH += h
        LG[n] += g
        LH[n] += h
        dh = h
        target = int(lvG[x])
        if lvH[y] > target:
            bad["level_order"] += 1
        top = n if lvH[y] >= target else max(n, int(lvH[y]))
        while lvH[y] < target:
            if MH.gs.boundary[y]:
                raise DepthInsufficientError("catch-up walk reached the slice boundary")
            hold = rng_catch.exponential() / MH.deg[y]
            LH[lvH[y]] += hold
            tH += hold
            dh += hold
            y = MH.pick(y, MH.deg[y], rng_catch.random())
            if lvH[y] < target:
                top = max(top, int(lvH[y]))
        if top > n:
            bad["level_order"] += 1
        if dh < g * (1 - tol):
            bad["increment"] += 1
        sG.append(tG)
        sH.append(tH)
        sL.append(target)
    if tG > tH * (1 + tol):
        bad["exit_time"] += 1
    bad["occupation"] += int(np.sum(LG > LH * (1 + tol) + tol))
    return CouplingSample(np.array(sG), np.array(sH), np.array(sL), tG, tH, LG, LH, bad)


def _deg_minus(M, x):
    gs = M.gs
    row = gs.weights[x]
    sel = M.level[row.indices] == M.level[x] - 1
    return float(row.data[sel].sum()) / gs.measure[x]


def coupled_simulate(G, H, N: int, n_paths: int, seed=0, x0=None, y0=None,
                     keep=0) -> CouplingResult:
    """Run ``n_paths`` coupled pairs until both walks leave ``B_N``.

    Requires the level-wise comparison of :func:`check_swcg` up to ``N``.
    Path ``i`` uses stream ``(seed, i)`` and its catch-up phases a separate
    sub-stream.  Five path-wise properties are counted in ``violations``:
    equal levels at synchronisation, ``H``-increments dominating
    ``G``-increments, ``|X| >= |Y|`` between synchronisations, ordered exit
    times and ordered sphere occupation times.
    """
    N = int(N)
    gsG, dG = _as_slice(G, N + 2)
    gsH, dH = _as_slice(H, N + 2)
    rep = check_swcg((gsG, dG), (gsH, dH), N)
    if not rep.ok:
        raise PreconditionError(f"level-wise comparison fails: {rep.witness}")
    x0 = int(dG.roots[0]) if x0 is None else gsG.idx(x0)
    y0 = int(dH.roots[0]) if y0 is None else gsH.idx(y0)
    if dG.level[x0] != dH.level[y0]:
        raise ConfigError("start vertices must be on spheres of the same index")
    MG, MH = _Moves(gsG, dG), _Moves(gsH, dH)
    TG = np.empty(n_paths)
    TH = np.empty(n_paths)
    LG = np.empty((n_paths, N + 1))
    LH = np.empty((n_paths, N + 1))
    total = dict.fromkeys(CHECKS, 0)
    kept = []
    for i in range(int(n_paths)):
        smp = _couple_one(MG, MH, x0, y0, N, path_stream(seed, i, 0), path_stream(seed, i, 1))
        TG[i], TH[i] = smp.T_G, smp.T_H
        LG[i], LH[i] = smp.L_G, smp.L_H
        for k, v in smp.violations.items():
            total[k] += v
        if i < keep:
            kept.append(smp)
    return CouplingResult(TG, TH, LG, LH, total, kept)

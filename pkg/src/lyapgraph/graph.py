"""Weighted graphs: lazy generators, finite slices and sphere structure.

A vertex is identified by a tuple of non-negative integers (its path from
the root set for trees, ``(level, j)`` for antitrees, ``(n,)`` for chains
and edge-list labels).  A :class:`GraphGenerator` answers neighbourhood
queries for a possibly infinite graph; :func:`materialize` expands it into
a finite :class:`GraphSlice` holding a sparse symmetric weight table.
"""

from __future__ import annotations

import ast
import itertools
import math
import operator
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    AsymmetricGraphError,
    BoundaryVertexError,
    CapacityError,
    ConfigError,
    DisconnectedError,
)

VertexId = tuple

WEIGHTINGS = ("combinatorial", "normalized", "explicit")
DEFAULT_MAX_VERTICES = 2_000_000


def vertex_str(v: VertexId) -> str:
    return ".".join(str(i) for i in v)


def parse_vertex(s: str) -> VertexId:
    try:
        v = tuple(int(t) for t in s.strip().split("."))
    except ValueError:
        raise ConfigError(f"bad vertex id {s!r}") from None
    if any(i < 0 for i in v):
        raise ConfigError(f"bad vertex id {s!r}")
    return v


# ---------------------------------------------------------------- sequences


def as_sequence(values) -> Callable[[int], float]:
    """Turn a parameter into a function of the level.

    Accepts a callable, a scalar, or a finite list.  A list is continued by
    repeating its last entry; if the last entry is the string ``"..."`` it
    is continued as an arithmetic progression through its last two terms.
    """
    if callable(values):
        return values
    if np.isscalar(values) and not isinstance(values, str):
        c = float(values)
        return lambda n: c
    vals = list(values)
    arithmetic = bool(vals) and vals[-1] == "..."
    if arithmetic:
        vals = vals[:-1]
        if len(vals) < 2:
            raise ConfigError("arithmetic continuation needs two terms")
    if not vals:
        raise ConfigError("empty sequence")
    vals = [float(v) for v in vals]
    step = vals[-1] - vals[-2] if arithmetic else 0.0
    last = len(vals) - 1

    def seq(n):
        if n <= last:
            return vals[n]
        return vals[last] + step * (n - last)

    return seq


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow, ast.Mod: operator.mod,
           ast.FloorDiv: operator.floordiv}
_FUNCS = {"sqrt": math.sqrt, "log": math.log, "exp": math.exp, "floor": math.floor,
          "ceil": math.ceil, "factorial": lambda x: math.factorial(int(x)),
          "min": min, "max": max, "abs": abs}


def level_expression(text: str) -> Callable[[int], float]:
    """Compile an arithmetic expression in the level ``n``, e.g. ``(n + 1)**2``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise ConfigError(f"bad expression {text!r}") from None

    def ev(node, n):
        if isinstance(node, ast.Expression):
            return ev(node.body, n)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "n":
            return n
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, n), ev(node.right, n))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand, n)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*(ev(a, n) for a in node.args))
        raise ConfigError(f"unsupported element in expression {text!r}")

    ev(tree, 0)
    return lambda n: float(ev(tree, n))


def parse_sequence(text: str):
    """Comma-separated numbers (optionally ending in ``...``) or one expression in ``n``."""
    parts = [t.strip() for t in str(text).split(",") if t.strip()]
    if len(parts) == 1 and "n" in parts[0] and parts[0] not in ("nan", "inf"):
        return [level_expression(parts[0])]
    out = []
    for t in parts:
        if t in ("...", "\u2026"):
            out.append("...")
            continue
        try:
            out.append(float(t))
        except ValueError:
            raise ConfigError(f"bad sequence entry {t!r}") from None
    return out


# ---------------------------------------------------------------- generators


@dataclass(frozen=True, eq=False)
class GraphGenerator:
    """Lazy description of a weighted graph.

    ``neighbors(x)`` returns a list of ``(y, weight)`` pairs.  The measure is
    ``1`` for combinatorial weights, the weighted degree for normalized
    weights, and ``measure(x)`` for explicit weights.  ``eta`` optionally
    gives the weighted degree in closed form.  ``outward`` declares that
    every vertex has a neighbour strictly farther from the roots, which
    lets :func:`materialize` skip expanding the outermost sphere.
    """

    kind: str
    roots: tuple
    neighbors: Callable[[VertexId], list]
    weighting: str = "combinatorial"
    measure: Callable[[VertexId], float] | None = None
    eta: Callable[[VertexId], float] | None = None
    outward: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(f"unknown weighting {self.weighting!r}")
        if self.weighting == "explicit" and self.measure is None:
            raise ConfigError("explicit weighting needs a measure")
        if not self.roots:
            raise ConfigError("empty root set")


def _check_weighting(weighting):
    if weighting not in ("combinatorial", "normalized"):
        raise ConfigError(f"weighting must be combinatorial or normalized, got {weighting!r}")


def branching_tree(sons: Callable[[VertexId], int], weighting="combinatorial",
                   kind="branching_tree", params=None) -> GraphGenerator:
    """Rooted tree in which vertex ``x`` has ``sons(x)`` children."""
    _check_weighting(weighting)
    sons = lru_cache(maxsize=None)(sons)

    def neighbors(x):
        out = [(x + (i,), 1.0) for i in range(sons(x))]
        if len(x) > 1:
            out.insert(0, (x[:-1], 1.0))
        return out

    def eta(x):
        return float(sons(x) + (len(x) > 1))

    return GraphGenerator(kind, ((0,),), neighbors, weighting, eta=eta,
                          outward=True, params=dict(params or {}))


def d_ary_tree(d: int, weighting="combinatorial") -> GraphGenerator:
    """Tree whose root has ``d`` children and every other vertex degree ``d + 1``."""
    d = int(d)
    if d < 1:
        raise ConfigError("d must be >= 1")
    return branching_tree(lambda x: d, weighting, "d_ary_tree", {"d": d})


def radial_tree(eta, weighting="combinatorial") -> GraphGenerator:
    """Spherically symmetric tree with degree ``eta(n)`` on sphere ``n``.

    The root has ``eta(0)`` children; a vertex on sphere ``n >= 1`` has
    ``eta(n) - 1`` children.
    """
    seq = as_sequence(eta)

    def sons(x):
        n = len(x) - 1
        e = seq(n)
        if e != int(e) or e < (1 if n == 0 else 2):
            raise ConfigError(f"radial tree needs integer eta(0) >= 1 and eta(n) >= 2, got eta({n}) = {e}")
        return int(e) - (n > 0)

    return branching_tree(sons, weighting, "radial_tree", {"eta": eta})


def _sphere_members(level_sizes: Callable[[int], Sequence[int]]):
    @lru_cache(maxsize=None)
    def members(n):
        return tuple((0,) + t for t in itertools.product(*(range(k) for k in level_sizes(n))))
    return members


def _tree_with_spheres(branch: Callable[[int], int], kind, params, weighting, complete_spheres):
    # branch(k) = number of children of a vertex on sphere k
    _check_weighting(weighting)
    members = _sphere_members(lambda n: [branch(k) for k in range(n)])
    size = lru_cache(maxsize=None)(lambda n: math.prod(branch(k) for k in range(n)))

    def neighbors(x):
        n = len(x) - 1
        out = []
        if n > 0:
            out.append((x[:-1], 1.0))
        out.extend((x + (i,), 1.0) for i in range(branch(n)))
        if complete_spheres and n > 0:
            out.extend((y, 1.0) for y in members(n) if y != x)
        return out

    def eta(x):
        n = len(x) - 1
        e = branch(n) + (n > 0)
        if complete_spheres:
            e += size(n) - 1
        return float(e)

    return GraphGenerator(kind, ((0,),), neighbors, weighting, eta=eta, outward=True,
                          params=params)


def tree_complete_spheres(d: int, weighting="combinatorial") -> GraphGenerator:
    """``d``-ary tree with every sphere additionally made a complete graph."""
    d = int(d)
    if d < 1:
        raise ConfigError("d must be >= 1")
    return _tree_with_spheres(lambda k: d, "tree_complete_spheres", {"d": d}, weighting, True)


def factorial_tree(weighting="combinatorial", complete_spheres=True) -> GraphGenerator:
    """Tree where a vertex on sphere ``k`` has ``k + 1`` children, so ``#S_k = k!``.

    By default every sphere is also made a complete graph.
    """
    return _tree_with_spheres(lambda k: k + 1, "factorial_tree",
                              {"complete_spheres": bool(complete_spheres)}, weighting,
                              bool(complete_spheres))


def antitree(sizes, weighting="combinatorial") -> GraphGenerator:
    """Spheres of prescribed sizes, consecutive spheres completely joined."""
    _check_weighting(weighting)
    seq = as_sequence(sizes)

    @lru_cache(maxsize=None)
    def size(n):
        s = seq(n)
        if s != int(s) or s < 1:
            raise ConfigError(f"antitree sphere sizes must be positive integers, got {s}")
        return int(s)

    def neighbors(x):
        n, _ = x
        out = []
        if n > 0:
            out.extend(((n - 1, j), 1.0) for j in range(size(n - 1)))
        out.extend(((n + 1, j), 1.0) for j in range(size(n + 1)))
        return out

    def eta(x):
        n = x[0]
        return float(size(n + 1) + (size(n - 1) if n > 0 else 0))

    roots = tuple((0, j) for j in range(size(0)))
    return GraphGenerator("antitree", roots, neighbors, weighting, eta=eta, outward=True,
                          params={"sizes": sizes})


def line_chain(plus=1.0, minus=1.0, m0=1.0) -> GraphGenerator:
    """Birth-death chain on the non-negative integers.

    ``plus(n)`` and ``minus(n)`` are the outward and inward rates
    ``deg_+(n)``, ``deg_-(n)``.  The measure follows from detailed balance,
    ``m(n + 1) = m(n) plus(n) / minus(n + 1)``, starting from ``m0``.
    """
    b, a = as_sequence(plus), as_sequence(minus)
    m0 = float(m0)
    if not m0 > 0:
        raise ConfigError("m0 must be positive")
    ms = [m0]

    def mass(n):
        while len(ms) <= n:
            k = len(ms) - 1
            bk, ak = b(k), a(k + 1)
            if not (bk > 0 and ak > 0):
                raise ConfigError(f"line chain rates must be positive (plus({k}) = {bk}, minus({k + 1}) = {ak})")
            ms.append(ms[k] * bk / ak)
        return ms[n]

    def weight(n):
        return mass(n) * b(n)

    def neighbors(x):
        n = x[0]
        out = [((n + 1,), weight(n))]
        if n > 0:
            out.insert(0, ((n - 1,), weight(n - 1)))
        return out

    return GraphGenerator("line_chain", ((0,),), neighbors, "explicit",
                          measure=lambda x: mass(x[0]),
                          eta=lambda x: weight(x[0]) + (weight(x[0] - 1) if x[0] > 0 else 0.0),
                          outward=True, params={"plus": plus, "minus": minus, "m0": m0})


def edge_list(edges: Iterable, measures: dict | None = None, roots=None,
              weighting=None) -> GraphGenerator:
    """Finite graph from ``(u, v, w)`` triples on integer labels.

    Each triple is an undirected edge; listing both directions is allowed
    only with equal weights.  ``measures`` maps labels to masses and switches
    the weighting to explicit unless another one is requested.
    """
    adj: dict[int, dict[int, float]] = {}
    for u, v, w in edges:
        u, v, w = int(u), int(v), float(w)
        if u == v:
            raise ConfigError(f"self-loop at vertex {u}")
        if not (w > 0 and math.isfinite(w)):
            raise ConfigError(f"edge ({u}, {v}) has non-positive weight {w}")
        for s, t in ((u, v), (v, u)):
            old = adj.setdefault(s, {}).get(t)
            if old is not None and old != w:
                raise AsymmetricGraphError(
                    f"asymmetric weights on pair ({u}, {v}): {old} vs {w}", pair=(u, v))
            adj[s][t] = w
    if not adj:
        raise ConfigError("edge list is empty")
    measures = {int(k): float(v) for k, v in (measures or {}).items()}
    if weighting is None:
        weighting = "explicit" if measures else "combinatorial"
    if weighting == "explicit":
        missing = sorted(set(adj) - set(measures))
        if missing:
            raise ConfigError(f"explicit weighting: no measure for vertex {missing[0]}")
    if roots is None:
        roots = [min(adj)]
    roots = tuple((int(r),) for r in roots)
    for r in roots:
        if r[0] not in adj:
            raise ConfigError(f"root {r[0]} is not a vertex")
    table = {(k,): sorted(((t,), w) for t, w in nb.items()) for k, nb in adj.items()}

    def neighbors(x):
        return list(table.get(x, ()))

    return GraphGenerator("edge_list", roots, neighbors, weighting,
                          measure=(lambda x: measures[x[0]]) if weighting == "explicit" else None,
                          params={"n_vertices": len(adj)})


_BUILDERS = {
    "d_ary_tree": d_ary_tree,
    "radial_tree": radial_tree,
    "antitree": antitree,
    "tree_complete_spheres": tree_complete_spheres,
    "factorial_tree": factorial_tree,
    "line_chain": line_chain,
    "edge_list": edge_list,
}


def build_generator(kind: str, **params) -> GraphGenerator:
    """Build one of the named graph families."""
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ConfigError(f"unknown graph kind {kind!r}; expected one of {sorted(_BUILDERS)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from None


# ---------------------------------------------------------------- slices


@dataclass(eq=False)
class GraphSlice:
    """Finite piece of a weighted graph.

    ``weights`` is symmetric and contains every edge with at least one
    non-boundary endpoint.  A vertex is *boundary* when some neighbour lies
    outside the slice; operators are only defined at non-boundary vertices.
    ``level`` is the distance to the generator's root set.
    """

    vertices: list
    index: dict
    weights: sp.csr_matrix
    measure: np.ndarray
    boundary: np.ndarray
    level: np.ndarray
    roots: np.ndarray
    weighting: str = "combinatorial"
    depth: int | None = None
    kind: str = ""

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def eta(self) -> np.ndarray:
        """Weighted degree; only meaningful at non-boundary vertices."""
        return np.asarray(self.weights.sum(axis=1)).ravel()

    @property
    def deg(self) -> np.ndarray:
        return self.eta / self.measure

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    def idx(self, x) -> int:
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < self.n:
                raise ConfigError(f"vertex index {x} out of range")
            return int(x)
        if isinstance(x, str):
            x = parse_vertex(x)
        try:
            return self.index[tuple(x)]
        except KeyError:
            raise ConfigError(f"vertex {vertex_str(tuple(x))} not in slice") from None

    def indices(self, xs) -> np.ndarray:
        if isinstance(xs, np.ndarray) and xs.dtype.kind in "iu":
            return xs.astype(np.int64)
        if isinstance(xs, np.ndarray) and xs.dtype == bool:
            return np.flatnonzero(xs)
        return np.array([self.idx(x) for x in xs], dtype=np.int64)

    def require_interior(self, idx):
        idx = np.atleast_1d(idx)
        bad = idx[self.boundary[idx]]
        if bad.size:
            raise BoundaryVertexError(
                f"vertex {vertex_str(self.vertices[bad[0]])} is on the slice boundary; "
                "materialize a deeper slice")

    def tabulate(self, fn: Callable[[VertexId], float], dtype=float) -> np.ndarray:
        return np.array([fn(v) for v in self.vertices], dtype=dtype)


def materialize(gen: GraphGenerator, depth: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> GraphSlice:
    """Breadth-first expansion of ``gen`` to distance ``depth`` from the roots.

    Raises :class:`CapacityError` when more than ``max_vertices`` vertices
    would be created and :class:`AsymmetricGraphError` when the generator's
    neighbourhoods disagree.
    """
    depth = int(depth)
    if depth < 0:
        raise ConfigError("depth must be >= 0")
    index: dict = {}
    vertices: list = []
    level: list = []
    rows: list = []
    cols: list = []
    ws: list = []

    def add(v, lev):
        index[v] = len(vertices)
        vertices.append(v)
        level.append(lev)
        if len(vertices) > max_vertices:
            raise CapacityError(f"slice exceeds {max_vertices} vertices at depth {level[-1]}")

    for r in gen.roots:
        if r not in index:
            add(tuple(r), 0)
    boundary: list = []
    expanded: list = []
    head = 0
    while head < len(vertices):
        v, lev = vertices[head], level[head]
        i = head
        head += 1
        if lev == depth and gen.outward:
            boundary.append(True)
            expanded.append(False)
            continue
        is_bd = False
        for y, w in gen.neighbors(v):
            j = index.get(y)
            if j is None:
                if lev == depth:
                    is_bd = True
                    continue
                add(y, lev + 1)
                j = len(vertices) - 1
            rows.append(i)
            cols.append(j)
            ws.append(w)
        boundary.append(is_bd)
        expanded.append(True)

    n = len(vertices)
    rows_a = np.asarray(rows, dtype=np.int64)
    cols_a = np.asarray(cols, dtype=np.int64)
    ws_a = np.asarray(ws, dtype=float)
    del rows, cols, ws
    if np.any(rows_a == cols_a):
        k = int(np.flatnonzero(rows_a == cols_a)[0])
        raise ConfigError(f"self-loop at vertex {vertex_str(vertices[rows_a[k]])}")
    if not np.all(ws_a > 0) or not np.all(np.isfinite(ws_a)):
        k = int(np.flatnonzero(~(ws_a > 0) | ~np.isfinite(ws_a))[0])
        raise ConfigError(f"non-positive or non-finite edge weight {ws_a[k]} between {vertex_str(vertices[rows_a[k]])} "
                          f"and {vertex_str(vertices[cols_a[k]])}")
    M = sp.csr_matrix((ws_a, (rows_a, cols_a)), shape=(n, n))
    if M.nnz != len(ws_a):
        raise ConfigError("generator returned a repeated neighbour")
    expanded_a = np.asarray(expanded, dtype=bool)

    # symmetry among expanded vertices; edges to unexpanded ones are mirrored
    exp_idx = np.flatnonzero(expanded_a)
    Mqq = M[exp_idx][:, exp_idx]
    diff = (Mqq != Mqq.T)
    if diff.nnz:
        r, c = diff.nonzero()
        a, b = vertices[exp_idx[r[0]]], vertices[exp_idx[c[0]]]
        raise AsymmetricGraphError(
            f"asymmetric weights on pair ({vertex_str(a)}, {vertex_str(b)})", pair=(a, b))
    if exp_idx.size < n:
        mask = sp.diags((~expanded_a).astype(float))
        W = (M + (M @ mask).T).tocsr()
    else:
        W = M
    W.sort_indices()

    if gen.weighting == "combinatorial":
        measure = np.ones(n)
    elif gen.weighting == "normalized":
        measure = np.asarray(W.sum(axis=1)).ravel()
        for i in np.flatnonzero(~expanded_a):
            measure[i] = gen.eta(vertices[i]) if gen.eta is not None else np.nan
    else:
        measure = np.array([gen.measure(v) for v in vertices], dtype=float)
        if not np.all(measure > 0):
            k = int(np.flatnonzero(~(measure > 0))[0])
            raise ConfigError(f"non-positive measure at {vertex_str(vertices[k])}")

    return GraphSlice(vertices=vertices, index=index, weights=W, measure=measure,
                      boundary=np.asarray(boundary, dtype=bool),
                      level=np.asarray(level, dtype=np.int64),
                      roots=np.arange(len(set(map(tuple, gen.roots))), dtype=np.int64),
                      weighting=gen.weighting, depth=depth, kind=gen.kind)


def induced_subgraph(gs: GraphSlice, U) -> GraphSlice:
    """Restriction of a slice to the vertex set ``U``.

    Vertices that lose a neighbour become boundary vertices.
    """
    idx = np.unique(gs.indices(U))
    keep = np.zeros(gs.n, dtype=bool)
    keep[idx] = True
    W = gs.weights[idx][:, idx].tocsr()
    lost = np.asarray(gs.weights[idx][:, ~keep].sum(axis=1)).ravel() > 0
    pos = -np.ones(gs.n, dtype=np.int64)
    pos[idx] = np.arange(idx.size)
    roots = pos[gs.roots]
    roots = roots[roots >= 0]
    vertices = [gs.vertices[i] for i in idx]
    return GraphSlice(vertices=vertices, index={v: k for k, v in enumerate(vertices)},
                      weights=W, measure=gs.measure[idx].copy(),
                      boundary=gs.boundary[idx] | lost, level=gs.level[idx].copy(),
                      roots=roots, weighting=gs.weighting, depth=gs.depth, kind=gs.kind)


# ---------------------------------------------------------------- spheres


@dataclass(eq=False)
class SphereDecomposition:
    level: np.ndarray
    spheres: list
    roots: np.ndarray

    @property
    def n_levels(self) -> int:
        return len(self.spheres)

    def ball(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.level <= n)


def sphere_decomposition(gs: GraphSlice, roots=None) -> SphereDecomposition:
    """Distance levels from a root set, computed inside the slice."""
    roots = gs.roots if roots is None else gs.indices(roots)
    if len(roots) == 0:
        raise ConfigError("no root vertex inside the slice")
    W = gs.weights
    dist = -np.ones(gs.n, dtype=np.int64)
    dist[roots] = 0
    frontier = np.unique(roots)
    lev = 0
    while frontier.size:
        nb = np.unique(W[frontier].indices)
        nb = nb[dist[nb] < 0]
        lev += 1
        dist[nb] = lev
        frontier = nb
    if np.any(dist < 0):
        missing = np.flatnonzero(dist < 0)
        raise DisconnectedError(
            f"{missing.size} vertices (e.g. {vertex_str(gs.vertices[missing[0]])}) "
            "are not connected to the root set")
    order = np.argsort(dist, kind="stable")
    counts = np.bincount(dist)
    spheres = np.split(order, np.cumsum(counts)[:-1])
    return SphereDecomposition(level=dist, spheres=spheres, roots=np.asarray(roots))


@dataclass(frozen=True)
class DegreeProfile:
    eta_plus: float
    eta_minus: float
    eta_zero: float
    m: float

    @property
    def eta(self):
        return self.eta_plus + self.eta_minus + self.eta_zero

    @property
    def deg_plus(self):
        return self.eta_plus / self.m

    @property
    def deg_minus(self):
        return self.eta_minus / self.m

    @property
    def deg_zero(self):
        return self.eta_zero / self.m

    @property
    def deg(self):
        return self.eta / self.m


def degree_table(gs: GraphSlice, decomp: SphereDecomposition):
    """``(eta_plus, eta_minus, eta_zero)`` arrays over all slice vertices.

    Entries at boundary vertices are incomplete and set to NaN.
    """
    W = gs.weights.tocoo()
    d = decomp.level[W.col] - decomp.level[W.row]
    out = []
    for s in (1, -1, 0):
        sel = d == s
        out.append(np.bincount(W.row[sel], weights=W.data[sel], minlength=gs.n).astype(float))
    for a in out:
        a[gs.boundary] = np.nan
    return tuple(out)


def degree_profile(gs: GraphSlice, decomp: SphereDecomposition, x) -> DegreeProfile:
    i = gs.idx(x)
    gs.require_interior(i)
    row = gs.weights[i]
    d = decomp.level[row.indices] - decomp.level[i]
    return DegreeProfile(eta_plus=float(row.data[d == 1].sum()),
                         eta_minus=float(row.data[d == -1].sum()),
                         eta_zero=float(row.data[d == 0].sum()),
                         m=float(gs.measure[i]))


@dataclass(frozen=True)
class RadialProfile:
    """Per-sphere data of a weakly spherically symmetric slice.

    Arrays are indexed by level ``0..L`` where ``S_0..S_L`` are the fully
    materialized spheres.
    """

    deg_plus: np.ndarray
    deg_minus: np.ndarray
    sphere_mass: np.ndarray
    sphere_size: np.ndarray
    deg_zero: np.ndarray | None = None

    @property
    def n_levels(self):
        return len(self.deg_plus)


def full_levels(gs: GraphSlice, decomp: SphereDecomposition) -> int:
    """Number of leading spheres with no boundary vertex."""
    for n, s in enumerate(decomp.spheres):
        if gs.boundary[s].any():
            return n
    return decomp.n_levels


def _constant(vals, nums, dens, exact):
    if exact:
        # deg = num/den is constant iff all cross products agree
        return bool(np.all(nums * dens[0] == nums[0] * dens))
    ref = vals[0]
    return bool(np.all(np.abs(vals - ref) <= 1e-12 * np.maximum(np.abs(vals), abs(ref))))


def detect_wss(gs: GraphSlice, decomp: SphereDecomposition) -> RadialProfile | None:
    """Radial degree profile if ``deg_+`` and ``deg_-`` are constant on spheres.

    Only fully materialized spheres are inspected.  Integer weights and
    measures are compared exactly, anything else to relative 1e-12.
    """
    L = full_levels(gs, decomp)
    if L == 0:
        return None
    ep, em, e0 = degree_table(gs, decomp)
    m = gs.measure
    data = np.concatenate([gs.weights.data, m])
    exact = bool(np.all(data == np.round(data)) and np.all(np.abs(data) < 2 ** 40))
    dp, dm, d0 = np.empty(L), np.empty(L), np.empty(L)
    zero_radial = True
    for n in range(L):
        s = decomp.spheres[n]
        for arr, out in ((ep, dp), (em, dm)):
            if not _constant(arr[s] / m[s], arr[s], m[s], exact):
                return None
            out[n] = arr[s[0]] / m[s[0]]
        zero_radial &= _constant(e0[s] / m[s], e0[s], m[s], exact)
        d0[n] = e0[s[0]] / m[s[0]]
    mass = np.array([m[s].sum() for s in decomp.spheres[:L]])
    size = np.array([len(s) for s in decomp.spheres[:L]])
    return RadialProfile(deg_plus=dp, deg_minus=dm, sphere_mass=mass, sphere_size=size,
                         deg_zero=d0 if zero_radial else None)

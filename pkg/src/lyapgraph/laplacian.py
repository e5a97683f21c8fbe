"""Laplacian, energy form and Dirichlet restrictions on a graph slice.

Functions on a slice are numpy arrays indexed like ``slice.vertices``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, InvariantViolation
from .graph import GraphSlice, SphereDecomposition, vertex_str


def _check_function(gs: GraphSlice, f):
    f = np.asarray(f)
    if f.shape != (gs.n,):
        raise ConfigError(f"function has shape {f.shape}, slice has {gs.n} vertices")
    return f


def _check_support(gs: GraphSlice, f):
    bad = np.flatnonzero((f != 0) & gs.boundary)
    if bad.size:
        gs.require_interior(bad[:1])


def laplacian_rows(gs: GraphSlice, rows=None) -> sp.csr_matrix:
    """Sparse matrix of ``f -> (Delta f)(x)`` for ``x`` in ``rows`` (default: interior)."""
    rows = gs.interior if rows is None else gs.indices(rows)
    gs.require_interior(rows)
    W = gs.weights[rows]
    eta = np.asarray(W.sum(axis=1)).ravel()
    D = sp.csr_matrix((eta, (np.arange(rows.size), rows)), shape=(rows.size, gs.n))
    return (sp.diags(1.0 / gs.measure[rows]) @ (D - W)).tocsr()


def apply_laplacian(gs: GraphSlice, f, x=None):
    """``(Delta f)(x) = m(x)^-1 sum_y E(x, y) (f(x) - f(y))``.

    With ``x=None`` the values at every interior vertex are returned as a
    full-length array, NaN on the boundary.
    """
    f = _check_function(gs, f)
    if x is None:
        out = np.full(gs.n, np.nan, dtype=np.result_type(f, float))
        out[gs.interior] = laplacian_rows(gs) @ f
        return out
    i = gs.idx(x)
    gs.require_interior(i)
    row = gs.weights[i]
    return (row.data @ (f[i] - f[row.indices])) / gs.measure[i]


def inner(gs: GraphSlice, f, g) -> complex | float:
    """``<f, g>_m = sum f conj(g) m``."""
    return np.sum(np.asarray(f) * np.conj(np.asarray(g)) * gs.measure)


def quadratic_form(gs: GraphSlice, f, g=None):
    """``Q(f, g) = 1/2 sum_{x,y} E(x, y) (f(x) - f(y)) conj(g(x) - g(y))``.

    Both functions must vanish on the slice boundary.
    """
    f = _check_function(gs, f)
    g = f if g is None else _check_function(gs, g)
    _check_support(gs, f)
    _check_support(gs, g)
    W = gs.weights.tocoo()
    df = f[W.row] - f[W.col]
    dg = g[W.row] - g[W.col]
    val = 0.5 * np.sum(W.data * df * np.conj(dg))
    return val.real if np.isrealobj(f) and np.isrealobj(g) else val


@dataclass(eq=False)
class DirichletMatrix:
    """Dirichlet restriction of the Laplacian to a finite region ``U``.

    ``stiffness`` is ``diag(eta) - E_UU``; the operator itself is
    ``diag(1/m) @ stiffness`` and ``symmetric`` is the unitarily equivalent
    ``m^-1/2 stiffness m^-1/2``.
    """

    region: np.ndarray
    stiffness: sp.csr_matrix
    measure: np.ndarray

    @property
    def size(self):
        return self.region.size

    @property
    def operator(self) -> sp.csr_matrix:
        return (sp.diags(1.0 / self.measure) @ self.stiffness).tocsr()

    @property
    def symmetric(self) -> sp.csr_matrix:
        # m_i m_j is commutative, so the result is exactly symmetric
        C = self.stiffness.tocoo()
        m = self.measure
        data = C.data / np.sqrt(m[C.row] * m[C.col])
        return sp.csr_matrix((data, (C.row, C.col)), shape=C.shape)


def dirichlet_matrix(gs: GraphSlice, U=None) -> DirichletMatrix:
    """Dirichlet Laplacian on ``U`` (default: all interior vertices).

    Functions are extended by zero outside ``U``; the diagonal keeps the
    full ambient degree.
    """
    U = gs.interior if U is None else np.unique(gs.indices(U))
    if U.size == 0:
        raise ConfigError("empty Dirichlet region")
    gs.require_interior(U)
    eta = gs.eta[U]
    K = (sp.diags(eta) - gs.weights[U][:, U]).tocsr()
    if (K != K.T).nnz:
        raise InvariantViolation("Dirichlet stiffness matrix is not symmetric")
    return DirichletMatrix(region=U, stiffness=K, measure=gs.measure[U].copy())


def dirichlet_apply(dm: DirichletMatrix, gs: GraphSlice, f) -> np.ndarray:
    """``Delta^U f`` as a full-length array (zero outside ``U``)."""
    f = _check_function(gs, f)
    out = np.zeros(gs.n, dtype=np.result_type(f, float))
    out[dm.region] = dm.operator @ f[dm.region]
    return out


@dataclass(eq=False)
class LaplacianParts:
    """``Delta = deg - A_bp - A_sp`` on interior rows.

    ``A_bp`` gathers edges between consecutive spheres and ``A_sp`` edges
    inside a sphere, both scaled by ``1/m``.
    """

    deg: np.ndarray
    A_bp: sp.csr_matrix
    A_sp: sp.csr_matrix
    rows: np.ndarray

    def apply(self, f):
        return self.deg[self.rows] * f[self.rows] - self.A_bp @ f - self.A_sp @ f


def decompose_parts(gs: GraphSlice, decomp: SphereDecomposition) -> LaplacianParts:
    rows = gs.interior
    W = gs.weights[rows].tocoo()
    same = decomp.level[rows[W.row]] == decomp.level[W.col]
    scale = 1.0 / gs.measure[rows[W.row]]

    def part(sel):
        return sp.csr_matrix((W.data[sel] * scale[sel], (W.row[sel], W.col[sel])),
                             shape=(rows.size, gs.n))

    deg = np.full(gs.n, np.nan)
    deg[rows] = gs.deg[rows]
    return LaplacianParts(deg=deg, A_bp=part(~same), A_sp=part(same), rows=rows)


def parity_flip(decomp: SphereDecomposition, f):
    """``(U f)(x) = (-1)^|x| f(x)``."""
    return np.where(decomp.level % 2 == 0, 1.0, -1.0) * np.asarray(f)


def hardy_potential(gs: GraphSlice, W) -> np.ndarray:
    """``Delta W / W`` at interior vertices (NaN on the boundary).

    ``W`` must be strictly positive on the whole slice.
    """
    W = _check_function(gs, W)
    if not np.all(W > 0):
        k = int(np.flatnonzero(~(W > 0))[0])
        raise ConfigError(f"hardy_potential needs W > 0; W({vertex_str(gs.vertices[k])}) = {W[k]}")
    return apply_laplacian(gs, W) / W


def export_coo(gs: GraphSlice, M: sp.spmatrix, region=None, stream=None) -> str:
    """Write a sparse matrix as ``row,col,value`` lines with 17 significant digits.

    Rows and columns are labelled by vertex ids of ``region`` (default: the
    whole slice).
    """
    labels = [vertex_str(v) for v in gs.vertices]
    if region is not None:
        labels = [labels[i] for i in gs.indices(region)]
    C = sp.coo_matrix(M)
    order = np.lexsort((C.col, C.row))
    lines = ["row,col,value"]
    lines += [f"{labels[C.row[k]]},{labels[C.col[k]]},{C.data[k]:.17g}" for k in order]
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text

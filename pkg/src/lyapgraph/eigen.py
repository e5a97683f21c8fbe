"""Dirichlet spectra and the positive-supersolution construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    CapacityError,
    ConfigError,
    ConvergenceError,
    DepthInsufficientError,
    InvariantViolation,
    PreconditionError,
)
from .graph import GraphSlice, SphereDecomposition
from .laplacian import apply_laplacian, dirichlet_matrix

DENSE_LIMIT = 2000
WEYL_LIMIT = 4000
RESIDUAL_TOL = 1e-8


@dataclass(eq=False)
class SpectrumResult:
    """Ascending Dirichlet eigenvalues on ``region``.

    ``vectors[:, j]`` is the eigenfunction on ``region``, normalised in
    the ``m``-weighted inner product.  ``residuals`` are relative to the
    largest diagonal entry of the operator.
    """

    values: np.ndarray
    vectors: np.ndarray | None
    residuals: np.ndarray
    region: np.ndarray
    method: str

    @property
    def lambda1(self) -> float:
        return float(self.values[0])


def _residuals(S, vals, U):
    R = S @ U - U * vals
    scale = max(1.0, float(np.abs(S.diagonal()).max()))
    return np.linalg.norm(R, axis=0) / scale


def dirichlet_eigs(gs: GraphSlice, U=None, k=1, method="auto", seed=0,
                   vectors=False, maxiter=None) -> SpectrumResult:
    """Smallest ``k`` eigenvalues of the Dirichlet Laplacian on ``U``.

    ``k="all"`` returns the whole spectrum (dense only).  Regions with at
    most 2000 vertices use a dense symmetric solver, larger ones
    shift-invert Lanczos started from a seeded vector.
    """
    dm = dirichlet_matrix(gs, U)
    S = dm.symmetric
    n = dm.size
    full = isinstance(k, str)
    if full and k != "all":
        raise ConfigError(f"k must be an integer or 'all', got {k!r}")
    k = n if full else int(k)
    if not 1 <= k <= n:
        raise ConfigError(f"k = {k} outside 1..{n}")
    if method == "auto":
        method = "dense" if (n <= DENSE_LIMIT or full or k >= n - 1) else "iterative"
    if method == "dense":
        A = S.toarray()
        if full:
            vals, U_ = sla.eigh(A)
        else:
            vals, U_ = sla.eigh(A, subset_by_index=[0, k - 1])
    elif method == "iterative":
        if k >= n - 1:
            raise ConfigError("iterative solver needs k < n - 1")
        rng = np.random.default_rng(seed)
        v0 = rng.random(n) + 0.5
        shift = -1e-6 * max(1.0, float(S.diagonal().max()))
        try:
            vals, U_ = spla.eigsh(S.tocsc(), k=k, sigma=shift, which="LM", v0=v0,
                                  tol=0, maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            res = _residuals(S, exc.eigenvalues, exc.eigenvectors) if len(exc.eigenvalues) else None
            raise ConvergenceError(f"Lanczos did not converge for k = {k}", residuals=res) from None
        order = np.argsort(vals)
        vals, U_ = vals[order], U_[:, order]
    else:
        raise ConfigError(f"unknown eigensolver method {method!r}")
    res = _residuals(S, vals, U_)
    if np.any(res > RESIDUAL_TOL):
        raise ConvergenceError(f"eigen residual {res.max():.3g} exceeds {RESIDUAL_TOL}", residuals=res)
    vecs = None
    if vectors:
        vecs = U_ / np.sqrt(dm.measure)[:, None]
    return SpectrumResult(values=np.asarray(vals), vectors=vecs, residuals=res,
                          region=dm.region, method=method)


def annulus(gs: GraphSlice, decomp: SphereDecomposition, K: int) -> np.ndarray:
    """Interior vertices outside the ball ``B_K``."""
    return np.flatnonzero(~gs.boundary & (decomp.level > K))


def persson_scan(gs: GraphSlice, decomp: SphereDecomposition, Ks, k=1, seed=0):
    """``(K, lambda_1..lambda_k)`` of the Dirichlet Laplacian outside ``B_K``.

    The first eigenvalue is non-decreasing in ``K`` and increases towards
    the bottom of the essential spectrum.
    """
    rows = []
    for K in Ks:
        A = annulus(gs, decomp, K)
        if A.size == 0:
            raise DepthInsufficientError(f"no interior vertex beyond B_{K}")
        res = dirichlet_eigs(gs, A, k=min(k, A.size), seed=seed)
        rows.append((int(K), res.values))
    return rows


@dataclass(eq=False)
class WeylTable:
    index: np.ndarray
    eigenvalues: np.ndarray
    degrees: np.ndarray

    @property
    def ratio(self):
        return self.eigenvalues / self.degrees


def weyl_ratio(gs: GraphSlice, U=None, limit=WEYL_LIMIT) -> WeylTable:
    """Compare the Dirichlet spectrum with the sorted degrees on ``U``."""
    U = gs.interior if U is None else np.unique(gs.indices(U))
    if U.size > limit:
        raise CapacityError(f"dense spectrum of {U.size} vertices exceeds the limit {limit}")
    res = dirichlet_eigs(gs, U, k="all")
    degs = np.sort(gs.deg[U])
    return WeylTable(index=np.arange(1, U.size + 1), eigenvalues=res.values, degrees=degs)


# ------------------------------------------------------ positive supersolutions


@dataclass(eq=False)
class ResolventResult:
    phi: np.ndarray
    lam: float
    lambda1: float
    region: np.ndarray
    K: int


def resolvent_superharmonic(gs: GraphSlice, decomp: SphereDecomposition, K: int,
                            lam=None, psi=None, seed=0) -> ResolventResult:
    """Solve ``(Delta^A - lam) phi = psi`` on the annulus ``A`` outside ``B_K``.

    ``lam`` defaults to ``0.9 lambda_1(A)`` and ``psi`` to the indicator of
    ``A``.  The solution is positive on ``A`` and zero elsewhere.
    """
    A = annulus(gs, decomp, K)
    if A.size == 0:
        raise DepthInsufficientError(f"no interior vertex beyond B_{K}")
    lam1 = dirichlet_eigs(gs, A, k=1, seed=seed).lambda1
    lam = 0.9 * lam1 if lam is None else float(lam)
    if lam >= lam1:
        raise PreconditionError(f"lambda = {lam} is not below lambda_1 = {lam1} of the annulus")
    psi = np.ones(gs.n) if psi is None else np.asarray(psi, dtype=float)
    if psi.shape != (gs.n,) or np.any(psi[A] < 0) or not np.any(psi[A] > 0):
        raise ConfigError("psi must be non-negative and not identically zero on the annulus")
    dm = dirichlet_matrix(gs, A)
    lhs = (dm.stiffness - lam * sp.diags(dm.measure)).tocsc()
    sol = spla.spsolve(lhs, dm.measure * psi[A])
    phi = np.zeros(gs.n)
    phi[A] = sol
    if not np.all(sol > 0):
        raise InvariantViolation("resolvent solution is not positive on the annulus")
    Lphi = apply_laplacian(gs, phi)[A]
    slack = Lphi - lam * sol
    if np.any(slack < -1e-9 * gs.deg[A] * sol):
        raise InvariantViolation("resolvent solution is not a supersolution")
    return ResolventResult(phi=phi, lam=lam, lambda1=lam1, region=A, K=int(K))


@dataclass(eq=False)
class GlueResult:
    """Positive ``W`` with ``Delta W >= lam 1_{A^c} W`` on the interior."""

    W: np.ndarray
    inner_set: np.ndarray
    eps: float
    slack: np.ndarray
    lam: float

    @property
    def ok(self) -> bool:
        return bool(np.all(self.slack >= -1e-9))


def _glue_slack(gs, W, lam, in_A):
    I = gs.interior
    LW = apply_laplacian(gs, W)[I]
    target = lam * np.where(in_A[I], 0.0, 1.0) * W[I]
    scale = gs.deg[I] * W[I]
    return (LW - target) / scale


def harmonic_glue(gs: GraphSlice, decomp: SphereDecomposition, res: ResolventResult,
                  eps=None, method="harmonic") -> GlueResult:
    """Glue a harmonic cap onto the resolvent solution.

    With ``A = B_K`` plus ``{phi > eps}``, ``W`` is the harmonic extension
    of ``phi`` into ``A`` and ``phi`` outside.  ``eps`` defaults to half the
    minimum of ``phi`` on ``S_{K+1}``.  ``method="flatten"`` is the variant
    for chains: ``W`` is held constant at ``phi(n0)`` below the first level
    ``n0 > K`` where ``phi`` stops increasing.
    """
    phi, K, lam = res.phi, res.K, res.lam
    if method == "flatten":
        return _flatten_glue(gs, decomp, res)
    if method != "harmonic":
        raise ConfigError(f"unknown glue method {method!r}")
    first = np.flatnonzero((decomp.level == K + 1) & ~gs.boundary)
    if first.size == 0:
        raise DepthInsufficientError(f"sphere S_{K + 1} is not interior")
    eps = 0.5 * float(phi[first].min()) if eps is None else float(eps)
    in_A = (decomp.level <= K) | (phi > eps)
    A = np.flatnonzero(in_A)
    W_ = gs.weights
    touch = np.unique(W_[A].indices)
    if gs.boundary[A].any() or gs.boundary[touch].any():
        raise DepthInsufficientError("the glued region reaches the slice boundary; use a deeper slice")
    dm = dirichlet_matrix(gs, A)
    rhs = W_[A][:, ~in_A] @ phi[~in_A]
    u = spla.spsolve(dm.stiffness.tocsc(), rhs)
    W = phi.copy()
    W[A] = u
    return GlueResult(W=W, inner_set=A, eps=eps, slack=_glue_slack(gs, W, lam, in_A), lam=lam)


def _flatten_glue(gs, decomp, res):
    if any(len(s) != 1 for s in decomp.spheres):
        raise PreconditionError("flattening needs a chain (one vertex per sphere)")
    order = np.array([s[0] for s in decomp.spheres])
    vals = res.phi[order]
    n0 = None
    for n in range(res.K + 1, len(order) - 1):
        if gs.boundary[order[n + 1]]:
            break
        if vals[n + 1] <= vals[n]:
            n0 = n
            break
    if n0 is None:
        raise DepthInsufficientError("phi keeps increasing up to the slice boundary")
    W = res.phi.copy()
    W[order[: n0 + 1]] = vals[n0]
    in_A = decomp.level <= n0
    return GlueResult(W=W, inner_set=np.flatnonzero(in_A), eps=float(vals[n0]),
                      slack=_glue_slack(gs, W, res.lam, in_A), lam=res.lam)

"""Radial reduction of weakly spherically symmetric graphs to birth-death chains."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg as sla

from .eigen import dirichlet_eigs
from .errors import ConfigError, DepthInsufficientError, InvariantViolation, NotWSSError, PreconditionError
from .graph import GraphSlice, RadialProfile, SphereDecomposition, detect_wss, full_levels
from .laplacian import laplacian_rows


@dataclass(eq=False)
class JacobiChain:
    """Birth-death chain on ``0..L-1`` with outward rates ``b``, inward ``a``.

    ``m`` is the reversible measure (``m[n] b[n] = m[n+1] a[n+1]``).  For a
    normalized graph ``b`` and ``a`` are transition probabilities and
    ``hold`` the probability of staying on the sphere.
    """

    m: np.ndarray
    b: np.ndarray
    a: np.ndarray
    hold: np.ndarray | None = None

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        if not (self.m.shape == self.b.shape == self.a.shape):
            raise ConfigError("chain arrays must have equal length")
        if np.any(self.m <= 0) or np.any(self.b <= 0) or np.any(self.a[1:] <= 0) or self.a[0] != 0:
            raise ConfigError("chain needs m > 0, b > 0, a[0] = 0 and a[n] > 0 for n >= 1")

    def __len__(self):
        return len(self.m)

    @classmethod
    def from_rates(cls, b, a, m0=1.0):
        b = np.asarray(b, dtype=float)
        a = np.asarray(a, dtype=float).copy()
        a[0] = 0.0
        m = np.empty_like(b)
        m[0] = m0
        for n in range(len(b) - 1):
            m[n + 1] = m[n] * b[n] / a[n + 1]
        return cls(m=m, b=b, a=a)

    def balance_defect(self) -> float:
        lhs = self.m[:-1] * self.b[:-1]
        rhs = self.m[1:] * self.a[1:]
        return float(np.max(np.abs(lhs - rhs) / np.maximum(lhs, rhs))) if len(lhs) else 0.0


def chain_from_profile(p: RadialProfile) -> JacobiChain:
    return JacobiChain(m=p.sphere_mass, b=p.deg_plus, a=p.deg_minus)


def reduce_to_radial(gs: GraphSlice, decomp: SphereDecomposition, discrete=False) -> JacobiChain:
    """Birth-death chain carrying the radial part of the Laplacian.

    Rates are ``deg_+`` and ``deg_-`` of the fully materialized spheres, the
    measure is the sphere mass.  ``discrete=True`` requires normalized
    weights and fills in the holding probabilities.
    """
    p = detect_wss(gs, decomp)
    if p is None:
        raise NotWSSError("slice is not weakly spherically symmetric")
    chain = chain_from_profile(p)
    if chain.balance_defect() > 1e-12:
        raise InvariantViolation(f"detailed balance fails (defect {chain.balance_defect():.3g})")
    if discrete:
        I = gs.interior
        if not np.allclose(gs.deg[I], 1.0, rtol=1e-12, atol=0):
            raise PreconditionError("discrete reduction needs normalized weights (deg = 1)")
        chain.hold = 1.0 - chain.b - chain.a
    return chain


@dataclass(eq=False)
class RecursionResult:
    W: np.ndarray
    first_nonpositive: int | None


def radial_recursion(chain: JacobiChain, lam, W0=1.0, n_max=None, dps=40) -> RecursionResult:
    """Radial solutions of ``(Delta - lam) W = 0``.

    Iterates ``b(n) W(n+1) = (b(n) + a(n) - lam(n)) W(n) - a(n) W(n-1)``
    from ``W(0) = W0`` in ``dps``-digit arithmetic.  ``lam`` is a scalar or
    a per-level sequence.  When ``lam >= 0`` and ``W`` stays positive the
    sequence is non-increasing; a violation raises.
    """
    L = len(chain)
    n_max = L if n_max is None else int(n_max)
    if not 0 <= n_max <= L:
        raise DepthInsufficientError(f"recursion up to {n_max} needs a chain of length {n_max}")
    lam_arr = np.broadcast_to(np.asarray(lam, dtype=float), (L,)) if np.ndim(lam) == 0 else np.asarray(lam, float)
    if len(lam_arr) < n_max:
        raise ConfigError("lambda sequence shorter than the recursion")
    with mpmath.workdps(dps):
        b = [mpmath.mpf(x) for x in chain.b]
        a = [mpmath.mpf(x) for x in chain.a]
        lm = [mpmath.mpf(x) for x in lam_arr[:max(n_max, 1)]]
        W = [mpmath.mpf(W0)]
        prev = mpmath.mpf(0)
        for n in range(n_max):
            nxt = ((b[n] + a[n] - lm[n]) * W[n] - a[n] * prev) / b[n]
            prev = W[n]
            W.append(nxt)
        out = np.array([float(w) for w in W])
    bad = np.flatnonzero(out <= 0)
    first = int(bad[0]) if bad.size else None
    if first is None and np.all(lam_arr[:n_max] >= 0) and W0 > 0:
        if np.any(np.diff(out) > 1e-12 * out[:-1]):
            raise InvariantViolation("positive radial solution is not non-increasing")
    return RecursionResult(W=out, first_nonpositive=first)


def jacobi_dirichlet_eigs(chain: JacobiChain, N: int, k=1) -> np.ndarray:
    """Smallest eigenvalues of the chain restricted to ``0..N`` (zero at ``N+1``)."""
    N = int(N)
    if not 0 <= N < len(chain):
        raise DepthInsufficientError(f"chain of length {len(chain)} does not cover level {N}")
    diag = chain.b[: N + 1] + chain.a[: N + 1]
    off = -np.sqrt(chain.b[:N] * chain.a[1: N + 1])
    k = N + 1 if k == "all" else min(int(k), N + 1)
    return sla.eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, k - 1))


def sphere_average(gs: GraphSlice, decomp: SphereDecomposition, f) -> np.ndarray:
    """``(M f)(x)``: the ``m``-weighted mean of ``f`` over the sphere of ``x``."""
    lev = decomp.level
    num = np.bincount(lev, weights=np.asarray(f) * gs.measure)
    den = np.bincount(lev, weights=gs.measure)
    return (num / den)[lev]


@dataclass(frozen=True)
class AveragingReport:
    max_error: float
    n_samples: int
    passed: bool


def averaging_check(gs: GraphSlice, decomp: SphereDecomposition, n_samples=100, seed=0,
                    tol=1e-10) -> AveragingReport:
    """Test that sphere averaging commutes with the Laplacian on random functions.

    Compared at every vertex of the fully interior spheres; the error is
    relative to the largest degree times the sup norm of the sample.
    """
    F = full_levels(gs, decomp)
    if F == 0 or F >= decomp.n_levels:
        raise DepthInsufficientError("need at least one interior sphere and one sphere beyond")
    rows = np.concatenate(decomp.spheres[:F])
    L = laplacian_rows(gs, rows)
    rng = np.random.default_rng(seed)
    scale = float(gs.deg[rows].max())
    err = 0.0
    for _ in range(n_samples):
        f = rng.standard_normal(gs.n)
        lhs = L @ sphere_average(gs, decomp, f)
        Lf = np.zeros(gs.n)
        Lf[rows] = L @ f
        rhs = sphere_average(gs, decomp, Lf)[rows]
        err = max(err, float(np.abs(lhs - rhs).max()) / (scale * np.abs(f).max()))
    return AveragingReport(max_error=err, n_samples=n_samples, passed=err <= tol)


@dataclass(frozen=True)
class RadialComparison:
    N: int
    lambda1_full: float
    lambda1_jacobi: float

    @property
    def gap(self):
        return abs(self.lambda1_full - self.lambda1_jacobi)


def compare_full_vs_radial(gs: GraphSlice, decomp: SphereDecomposition, N: int, seed=0,
                           tol=1e-8) -> RadialComparison:
    """First Dirichlet eigenvalue of the ball ``B_N`` against its radial chain."""
    chain = reduce_to_radial(gs, decomp)
    if N >= len(chain):
        raise DepthInsufficientError(f"B_{N} is not fully interior (only {len(chain)} full spheres)")
    full = dirichlet_eigs(gs, decomp.ball(N), k=1, seed=seed).lambda1
    jac = float(jacobi_dirichlet_eigs(chain, N, 1)[0])
    rec = RadialComparison(N=int(N), lambda1_full=full, lambda1_jacobi=jac)
    if rec.gap > tol:
        raise InvariantViolation(f"full and radial lambda_1 differ by {rec.gap:.3g}")
    return rec

"""Spectral bounds from Lyapunov functions, isoperimetry and test functions.

Every bound is returned as a :class:`BoundReport`.  A bound whose
hypotheses fail on the inspected range comes back with
``applicable=False`` and a reason, never as a numeric zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, DepthInsufficientError, InvariantViolation, PreconditionError
from .graph import GraphSlice, RadialProfile, SphereDecomposition, degree_table
from .laplacian import apply_laplacian, dirichlet_matrix, inner, quadratic_form

N_SWEEP = 64


@dataclass
class BoundReport:
    value: float | None
    kind: str
    source: str
    params: dict = field(default_factory=dict)
    applicable: bool = True
    horizon: int | None = None
    reason: str = ""

    @classmethod
    def not_applicable(cls, kind, source, reason, horizon=None, **params):
        return cls(value=None, kind=kind, source=source, params=params, applicable=False,
                   horizon=horizon, reason=reason)


def _sqrt_gap(D, a):
    """``D - sqrt(D^2 - a^2)`` without cancellation."""
    return a * a / (D + math.sqrt(max(D * D - a * a, 0.0)))


class _Levels:
    """Per-vertex ``deg_+``, ``deg_-`` restricted to interior vertices up to a horizon."""

    def __init__(self, gs: GraphSlice, decomp: SphereDecomposition, horizon=None):
        I = gs.interior
        if I.size == 0:
            raise DepthInsufficientError("slice has no interior vertex")
        top = int(decomp.level[I].max())
        self.horizon = top if horizon is None else int(horizon)
        if self.horizon > top:
            raise DepthInsufficientError(f"horizon {self.horizon} exceeds the last interior level {top}")
        sel = I[decomp.level[I] <= self.horizon]
        ep, em, _ = degree_table(gs, decomp)
        self.idx = sel
        self.level = decomp.level[sel]
        self.dp = ep[sel] / gs.measure[sel]
        self.dm = em[sel] / gs.measure[sel]

    def per_level_min(self, values):
        out = np.full(self.horizon + 1, np.inf)
        np.minimum.at(out, self.level, values)
        return out

    def per_level_max(self, values):
        out = np.full(self.horizon + 1, -np.inf)
        np.maximum.at(out, self.level, values)
        return out


# ------------------------------------------------------------ Lyapunov bounds


@dataclass(eq=False)
class LyapunovFunction:
    """``W = c^-max(|x|, n0)`` and its potential ``phi_c`` on the slice."""

    c: float
    n0: int
    W: np.ndarray
    phi: np.ndarray
    phi_levels: np.ndarray


def _n0(gmin):
    ok = gmin >= 0
    if not ok[-1]:
        return None
    n0 = len(ok) - 1
    while n0 > 0 and ok[n0 - 1]:
        n0 -= 1
    return n0


def lyapunov_function(gs: GraphSlice, decomp: SphereDecomposition, c: float,
                      horizon=None) -> LyapunovFunction:
    """Glued exponential Lyapunov function for the ratio ``c > 1``.

    ``n0`` is the first level from which ``deg_+ - c deg_-`` stays
    non-negative up to the horizon.  ``phi`` is
    ``(c-1)/c (deg_+ - c deg_-)`` beyond ``B_n0`` and zero inside.
    """
    c = float(c)
    if not c > 1:
        raise ConfigError("c must exceed 1")
    lv = _Levels(gs, decomp, horizon)
    g = lv.dp - c * lv.dm
    n0 = _n0(lv.per_level_min(g))
    if n0 is None:
        raise PreconditionError(f"deg_+ - c deg_- < 0 on the last inspected level (c = {c})")
    W = c ** -np.maximum(decomp.level, n0).astype(float)
    phi = np.full(gs.n, np.nan)
    phi[lv.idx] = np.where(lv.level > n0, (c - 1) / c * g, 0.0)
    return LyapunovFunction(c=c, n0=n0, W=W, phi=phi,
                            phi_levels=lv.per_level_min(np.where(lv.level > n0, (c - 1) / c * g, 0.0)))


def _ratio_at(lv, c):
    g = lv.dp - c * lv.dm
    gmin = lv.per_level_min(g)
    n0 = _n0(gmin)
    if n0 is None:
        return None, None, None
    ell = float(gmin[n0:].min())
    return ell * (c - 1) / c, n0, ell


def _sweep_grid(lv):
    pos = lv.dm[lv.dm > 0]
    cmax = 10.0
    if pos.size:
        cmax = max(10.0, 2 * float(lv.dp.max()) / float(pos.min()))
    return np.geomspace(1.0, cmax, N_SWEEP + 1)[1:]


def lyapunov_ratio_bound(gs: GraphSlice, decomp: SphereDecomposition, c=None,
                         horizon=None) -> BoundReport:
    """Lower bound ``l (c-1)/c`` on the bottom of the essential spectrum.

    ``l`` is the minimum of ``deg_+ - c deg_-`` beyond ``B_n0``.  Without
    ``c`` a geometric sweep of 64 ratios (plus the optimal ratio of the
    bounded-degree bound, when defined) is searched for the best value.
    """
    lv = _Levels(gs, decomp, horizon)
    src = "lyapunov-ratio"
    if c is not None:
        c = float(c)
        if not c > 1:
            raise ConfigError("c must exceed 1")
        grid = np.array([c])
    else:
        grid = list(_sweep_grid(lv))
        bd = _best_bounded(lv)
        if bd is not None and math.isfinite(bd.params["c_star"]):
            grid.append(bd.params["c_star"])
        grid = np.array(grid)
    best = None
    for cc in grid:
        val, n0, ell = _ratio_at(lv, cc)
        if val is None or not ell > 0:
            continue
        if best is None or val > best[0]:
            best = (val, cc, n0, ell)
    if best is None:
        return BoundReport.not_applicable("ess-lower", src, "no ratio c with deg_+ - c deg_- > 0 on a tail",
                                          horizon=lv.horizon)
    val, cc, n0, ell = best
    return BoundReport(value=float(val), kind="ess-lower", source=src,
                       params={"c": float(cc), "n0": int(n0), "l": ell, "n_grid": int(len(grid))},
                       horizon=lv.horizon)


def _bounded_at(lv, n0):
    sel = lv.level > n0
    if not sel.any():
        return None
    a = float(np.min(lv.dp[sel] - lv.dm[sel]))
    D = float(np.max(lv.dp[sel] + lv.dm[sel]))
    return a, D


def _best_bounded(lv):
    for n0 in range(lv.horizon):
        aD = _bounded_at(lv, n0)
        if aD and aD[0] > 0:
            return _bounded_report(lv, n0, *aD)
    return None


def _bounded_report(lv, n0, a, D):
    c_star = math.sqrt((D + a) / (D - a)) if D > a else math.inf
    return BoundReport(value=_sqrt_gap(D, a), kind="ess-lower", source="lyapunov-bounded",
                       params={"n0": int(n0), "a": a, "D": D, "c_star": c_star},
                       horizon=lv.horizon)


def lyapunov_bounded_bound(gs: GraphSlice, decomp: SphereDecomposition, n0=0,
                           horizon=None) -> BoundReport:
    """``D - sqrt(D^2 - a^2)`` with ``a = min(deg_+ - deg_-)`` and ``D = max(deg_+ + deg_-)`` beyond ``B_n0``.

    The bound holds for the Dirichlet Laplacian outside ``B_n0`` and for
    the bottom of the essential spectrum.
    """
    lv = _Levels(gs, decomp, horizon)
    src = "lyapunov-bounded"
    aD = _bounded_at(lv, int(n0))
    if aD is None:
        return BoundReport.not_applicable("ess-lower", src, f"no inspected vertex beyond B_{n0}",
                                          horizon=lv.horizon, n0=int(n0))
    a, D = aD
    if not a > 0:
        return BoundReport.not_applicable("ess-lower", src, f"deg_+ - deg_- has minimum {a} <= 0",
                                          horizon=lv.horizon, n0=int(n0), a=a, D=D)
    return _bounded_report(lv, int(n0), a, D)


# ------------------------------------------------------------ isoperimetry


def isoperimetric_bound(gs: GraphSlice, decomp: SphereDecomposition, U=None,
                        weight="eta") -> BoundReport:
    """Cheeger-type lower bound on ``inf sigma(Delta^U)``.

    The isoperimetric constant is estimated by ``a = min_U (eta_+ - eta_-) / w``.
    With ``weight="eta"`` (``w = eta``) the bound is ``d_U (1 - sqrt(1 - a^2))``;
    with ``weight="m"`` (``w = m``) it is ``D_U - sqrt(D_U^2 - a^2)``.
    """
    U = gs.interior if U is None else np.unique(gs.indices(U))
    gs.require_interior(U)
    ep, em, _ = degree_table(gs, decomp)
    if weight == "eta":
        w = gs.eta[U]
    elif weight == "m":
        w = gs.measure[U]
    else:
        raise ConfigError(f"weight must be 'eta' or 'm', got {weight!r}")
    src = f"isoperimetric-{weight}"
    a = float(np.min((ep[U] - em[U]) / w))
    deg = gs.deg[U]
    if not a > 0:
        return BoundReport.not_applicable("lower", src, f"isoperimetric estimate {a} <= 0", alpha=a)
    if weight == "eta":
        a = min(a, 1.0)
        d = float(deg.min())
        val = d * _sqrt_gap(1.0, a)
        params = {"alpha": a, "d_U": d}
    else:
        D = float(deg.max())
        val = _sqrt_gap(D, a)
        params = {"alpha": a, "D_U": D}
    return BoundReport(value=val, kind="lower", source=src, params=params)


# ------------------------------------------------------------ eigenvalue counts


@dataclass(eq=False)
class EigenLowerTable:
    """``bounds[j-1]`` is a lower bound on ``lambda_j``."""

    bounds: np.ndarray
    ess_lower: float


def eigen_lower_from_potential(psi_levels, sphere_sizes) -> EigenLowerTable:
    """Eigenvalue lower bounds from a radial Hardy potential.

    If ``Q(f) >= <f, psi f>`` with ``psi`` non-decreasing in the level, then
    ``lambda_{#B_{n-1}+k} >= psi(n)`` for ``k = 1..#S_n``.
    """
    psi = np.asarray(psi_levels, dtype=float)
    sizes = np.asarray(sphere_sizes, dtype=np.int64)
    if psi.shape != sizes.shape:
        raise ConfigError("one potential value per sphere is required")
    drops = np.flatnonzero(np.diff(psi) < 0)
    if drops.size:
        raise PreconditionError(f"potential decreases between levels {drops[0]} and {drops[0] + 1}")
    return EigenLowerTable(bounds=np.repeat(psi, sizes), ess_lower=float(psi[-1]))


# ------------------------------------------------------------ radial trees


def radial_tree_upper(eta, n: int, weighting="normalized") -> BoundReport:
    """Upper bound on ``lambda_{#S_n}`` for a radial tree with degrees ``eta``.

    Normalized: ``1 - sqrt((1 - 1/eta(n)) / eta(n+1))``; the combinatorial
    value multiplies this by ``max(eta(n), eta(n+1))``.
    """
    e0, e1 = float(eta[n]), float(eta[n + 1])
    if e0 < 2 or e1 < 2:
        raise PreconditionError(f"radial tree bound needs eta >= 2 at levels {n}, {n + 1}")
    val = 1.0 - math.sqrt((1.0 - 1.0 / e0) / e1)
    if weighting == "combinatorial":
        val *= max(e0, e1)
    elif weighting != "normalized":
        raise ConfigError(f"unknown weighting {weighting!r}")
    return BoundReport(value=val, kind="upper", source=f"radial-tree-{weighting}",
                       params={"n": int(n), "eta_n": e0, "eta_n1": e1})


def radial_tree_test_function(gs: GraphSlice, decomp: SphereDecomposition, x) -> np.ndarray:
    """``g = 1`` at ``x``, ``alpha`` on its children, zero elsewhere."""
    i = gs.idx(x)
    gs.require_interior(i)
    row = gs.weights[i]
    kids = row.indices[decomp.level[row.indices] == decomp.level[i] + 1]
    gs.require_interior(kids)
    e0 = gs.eta[i]
    e1 = gs.eta[kids[0]]
    alpha = math.sqrt(e0) / math.sqrt((e0 - 1) * e1)
    g = np.zeros(gs.n)
    g[i] = 1.0
    g[kids] = alpha
    return g


def rayleigh(gs: GraphSlice, f) -> float:
    return float(quadratic_form(gs, f) / inner(gs, f, f).real)


# ------------------------------------------------------------ sandwich


@dataclass
class SandwichReport:
    n: int
    normalized_lower: BoundReport
    normalized_upper: BoundReport
    combinatorial_lower: BoundReport
    combinatorial_upper: BoundReport

    def reports(self):
        return [self.normalized_lower, self.normalized_upper,
                self.combinatorial_lower, self.combinatorial_upper]


def _first_increase(v, tol=1e-12):
    bad = np.flatnonzero(np.diff(v) > tol * np.maximum(np.abs(v[:-1]), 1.0))
    return int(bad[0]) if bad.size else None


def wss_sandwich(profile: RadialProfile, n: int) -> SandwichReport:
    """Eigenvalue sandwich for a weakly spherically symmetric graph.

    ``profile`` is the radial profile under combinatorial weights, so that
    ``deg_+ = eta_+``.  Lower bounds index ``lambda_{#B_{n-1}+1}``, upper
    bounds ``lambda_n``.  Hypotheses are checked on levels ``n..L-1``.
    """
    n = int(n)
    L = profile.n_levels
    if not 1 <= n < L:
        raise DepthInsufficientError(f"level {n} outside 1..{L - 1}")
    if profile.deg_zero is None:
        raise PreconditionError("eta_0 is not radial")
    ep, em, e0 = profile.deg_plus, profile.deg_minus, profile.deg_zero
    eta = ep + em + e0
    pp, pm = ep / eta, em / eta
    sizes = profile.sphere_size
    lo_idx = int(sizes[:n].sum()) + 1
    rng = slice(n, L)
    flat = not np.any(e0[rng] > 0)

    src = "wss-normalized"
    if not flat:
        nl = BoundReport.not_applicable("lower", src, "edges inside spheres", n=n, index=lo_idx)
    else:
        bad = _first_increase(pp[rng] * (1 - pp[rng]))
        if bad is not None:
            nl = BoundReport.not_applicable("lower", src, f"p_+(1-p_+) increases at level {n + bad + 1}",
                                            n=n, index=lo_idx)
        else:
            nl = BoundReport(1 - 2 * math.sqrt(pp[n] * (1 - pp[n])), "lower", src,
                             {"n": n, "index": lo_idx})
    k = 3 * n - 2
    if k + 1 >= L:
        nu = BoundReport.not_applicable("upper", src, f"level {k + 1} not materialized", n=n, index=n)
    else:
        rig = max(1 - math.sqrt(pp[i] * pm[i + 1]) for i in range(1, k + 1, 3))
        nu = BoundReport(1 - math.sqrt(pp[k] * pm[k]), "upper", src,
                         {"n": n, "index": n, "test_function_max": rig})

    src = "wss-combinatorial"
    low = eta - 2 * np.sqrt(ep * em)
    if not flat:
        cl = BoundReport.not_applicable("lower", src, "edges inside spheres", n=n, index=lo_idx)
    else:
        bad = _first_increase(-eta[rng])
        bad2 = _first_increase(-low[rng])
        if bad is not None or bad2 is not None:
            which = "eta" if bad is not None else "eta - 2 sqrt(eta_+ eta_-)"
            cl = BoundReport.not_applicable("lower", src, f"{which} is not non-decreasing",
                                            n=n, index=lo_idx)
        else:
            cl = BoundReport(float(low[n]), "lower", src, {"n": n, "index": lo_idx})
    k = 2 * n - 1
    if k >= L:
        cu = BoundReport.not_applicable("upper", src, f"level {k} not materialized", n=n, index=n)
    else:
        cu = BoundReport(float(eta[k]), "upper", src, {"n": n, "index": n})
    return SandwichReport(n, nl, nu, cl, cu)


# ------------------------------------------------------------ Fujiwara pair


def fujiwara_pair(gs: GraphSlice, x0, y0):
    """Rayleigh quotients of ``delta_x0 +- sqrt(eta(x0)/eta(y0)) delta_y0``.

    Normalized weights only.  Returns ``(1 - t, 1 + t)`` with
    ``t = E(x0, y0) / sqrt(eta(x0) eta(y0))``.
    """
    if gs.weighting != "normalized":
        raise PreconditionError("the Fujiwara pair needs normalized weights")
    i, j = gs.idx(x0), gs.idx(y0)
    if i == j:
        raise ConfigError("x0 and y0 must differ")
    gs.require_interior([i, j])
    eta = gs.eta
    out = []
    for sign in (1.0, -1.0):
        g = np.zeros(gs.n)
        g[i] = 1.0
        g[j] = sign * math.sqrt(eta[i] / eta[j])
        out.append(rayleigh(gs, g))
    return tuple(out)


# ------------------------------------------------------------ upside-down


@dataclass(frozen=True)
class UpsideDownReport:
    n_samples: int
    n_tested: int
    n_violations: int
    worst_margin: float


def upside_down_check(gs: GraphSlice, U, q, a: float, k: float, n_samples=1000, seed=0,
                      tol=1e-9) -> UpsideDownReport:
    """Sample the reflection of a lower form bound into an upper one.

    For each random ``f`` on ``U``: when
    ``(1-a) <|f|, (deg+q)|f|> - k ||f||^2 <= <|f|, (Delta^U + q)|f|>``
    holds, check ``<f, (Delta^U + q) f> <= (1+a) <f, (deg+q) f> + k ||f||^2``.
    Samples failing the hypothesis are skipped.
    """
    U = np.unique(gs.indices(U))
    dm = dirichlet_matrix(gs, U)
    K = dm.stiffness
    m = dm.measure
    q = np.zeros(U.size) if q is None else np.broadcast_to(np.asarray(q, dtype=float), (U.size,))
    dq = gs.eta[U] + q * m

    def forms(f):
        e = float(f @ (K @ f) + np.sum(q * m * f * f))
        d = float(np.sum(dq * f * f))
        n2 = float(np.sum(m * f * f))
        return e, d, n2

    rng = np.random.default_rng(seed)
    tested = viol = 0
    worst = math.inf
    for s in range(n_samples):
        f = rng.standard_normal(U.size)
        if s % 3 == 1:
            f *= rng.random(U.size) < 0.3
        elif s % 3 == 2:
            f = np.abs(f) * np.where(gs.level[U] % 2 == 0, 1.0, -1.0)
        if not np.any(f):
            continue
        e, d, n2 = forms(np.abs(f))
        if (1 - a) * d - k * n2 > e + tol * max(d, 1e-300):
            continue
        tested += 1
        e, d, n2 = forms(f)
        margin = ((1 + a) * d + k * n2 - e) / max(d, 1e-300)
        worst = min(worst, margin)
        if margin < -tol:
            viol += 1
    return UpsideDownReport(n_samples, tested, viol, worst)


def relative_form_bounds(gs: GraphSlice, U, q=None):
    """Extreme values of ``<f, (Delta^U + q) f> / <f, (deg + q) f>`` on ``U``."""
    U = np.unique(gs.indices(U))
    dm = dirichlet_matrix(gs, U)
    m = dm.measure
    q = np.zeros(U.size) if q is None else np.broadcast_to(np.asarray(q, dtype=float), (U.size,))
    A = dm.stiffness.toarray() + np.diag(q * m)
    B = gs.eta[U] + q * m
    s = 1 / np.sqrt(B)
    vals = sla.eigvalsh(A * np.outer(s, s))
    return float(vals[0]), float(vals[-1])


# ------------------------------------------------------------ super-Poincare


@dataclass(eq=False)
class SPIBeta:
    """``beta(s) = inf_{s0 <= t <= s} (1 + b t / alpha) / a_h(r(t))``.

    ``r(t)`` is the least ``r >= r0`` with ``Psi(r) >= 1/t``, where
    ``Psi(r)`` is the infimum of the potential beyond ``B_r`` and
    ``a_h(r)`` the minimum of ``h^2 m`` on ``B_r``.
    """

    Psi: np.ndarray
    a_h: np.ndarray
    b: float
    alpha: float
    r0: int

    @property
    def s_min(self) -> float:
        top = float(self.Psi[self.r0:].max())
        return math.inf if top <= 0 else 1.0 / top

    def raw(self, s: float) -> float:
        s = float(s)
        if not s >= self.s_min:
            raise PreconditionError(f"s = {s} is below the smallest admissible value {self.s_min}")
        r = self.r0 + int(np.flatnonzero(self.Psi[self.r0:] * s >= 1.0)[0])
        return (1.0 + self.b * s / self.alpha) / self.a_h[r]

    def __call__(self, s: float) -> float:
        s = float(s)
        best = self.raw(s)
        for P in self.Psi[self.r0:]:
            if P > 0 and 1.0 / P <= s:
                t = max(1.0 / P, self.s_min)
                best = min(best, self.raw(t))
        return best


def spi_beta(gs: GraphSlice, decomp: SphereDecomposition, psi, h, b=0.0, r0=0,
             alpha=None, W=None) -> SPIBeta:
    """Super-Poincare profile from a Lyapunov potential.

    ``psi`` is the potential (per vertex) with ``Delta W >= psi W - b 1_{B_r0}``.
    ``alpha`` is ``inf_{B_r0} W`` (computed from ``W`` if given).
    """
    I = gs.interior
    H = int(decomp.level[I].max())
    psi = np.asarray(psi, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(h[I] <= 0):
        raise ConfigError("h must be positive")
    if b < 0:
        raise ConfigError("b must be non-negative")
    lev = decomp.level[I]
    Psi = np.empty(H)
    for r in range(H):
        Psi[r] = psi[I][lev > r].min()
    a_h = np.empty(H)
    hm = h[I] ** 2 * gs.measure[I]
    for r in range(H):
        a_h[r] = hm[lev <= r].min()
    if alpha is None:
        if W is None:
            if b > 0:
                raise ConfigError("alpha or W is required when b > 0")
            alpha = 1.0
        else:
            alpha = float(np.min(np.asarray(W)[decomp.level <= r0]))
    if not 0 <= r0 < H:
        raise DepthInsufficientError(f"r0 = {r0} outside 0..{H - 1}")
    return SPIBeta(Psi=Psi, a_h=a_h, b=float(b), alpha=float(alpha), r0=int(r0))


def lyapunov_spi_beta(gs: GraphSlice, decomp: SphereDecomposition, c: float, h) -> SPIBeta:
    """Super-Poincare profile with ``psi = phi_c`` from :func:`lyapunov_function`.

    ``r0`` is the glue level ``n0`` and ``b`` the largest defect
    ``(psi W - Delta W)^+`` on the interior, which vanishes outside ``B_n0``.
    """
    lf = lyapunov_function(gs, decomp, c)
    I = gs.interior
    psi = np.nan_to_num(lf.phi, nan=0.0)
    LW = apply_laplacian(gs, lf.W)
    defect = psi[I] * lf.W[I] - LW[I]
    # rounding noise is not a defect
    defect[defect <= 1e-12 * lf.W[I] * gs.deg[I]] = 0.0
    b = float(defect.max())
    outside = decomp.level[I] > lf.n0
    if np.any(defect[outside] > 0):
        raise InvariantViolation("Lyapunov inequality fails outside the glue ball")
    return spi_beta(gs, decomp, psi, h, b=b, r0=lf.n0, W=lf.W)


def spi_s_grid(beta: SPIBeta, n=8, span=100.0) -> np.ndarray:
    """``n`` geometric points from the smallest admissible ``s`` to ``span`` times it."""
    s0 = beta.s_min
    if not math.isfinite(s0):
        raise PreconditionError("potential is not positive on any tail")
    return np.geomspace(s0, span * s0, int(n))


@dataclass(frozen=True)
class SPIReport:
    n_checks: int
    n_violations: int
    worst_margin: float


def _spi_terms(gs, f, h):
    """``m(f^2)``, ``Q(f)`` and ``m(|f| h)^2``."""
    return (float(np.sum(gs.measure * f * f)), float(quadratic_form(gs, f)),
            float(np.sum(np.abs(f) * h * gs.measure)) ** 2)


def spi_candidates(gs: GraphSlice, h, beta, s_grid, n_samples=1000, seed=0):
    """Random functions on the interior, plus minimisers of the quadratic relaxation."""
    I = gs.interior
    rng = np.random.default_rng(seed)
    for k in range(n_samples):
        f = np.zeros(gs.n)
        kind = k % 4
        if kind == 0:
            f[I] = rng.standard_normal(I.size)
        elif kind == 1:
            f[I] = rng.standard_normal(I.size) * (rng.random(I.size) < 0.05)
        elif kind == 2:
            f[I] = rng.exponential(size=I.size)
        else:
            f[I[rng.integers(I.size)]] = 1.0
            f[I] += 0.1 * rng.standard_normal(I.size) * (rng.random(I.size) < 0.1)
        if np.any(f):
            yield None, f
    # minimise s Q(f) + beta (<f, h m>)^2 - m(f^2); the absolute value of the
    # minimiser only lowers the energy term
    dm = dirichlet_matrix(gs, I)
    K = dm.stiffness.toarray()
    m = dm.measure
    v = h[I] * m
    s_m = 1 / np.sqrt(m)
    for s in s_grid:
        A = (s * K + beta(s) * np.outer(v, v)) * np.outer(s_m, s_m)
        _, vecs = sla.eigh(A, subset_by_index=[0, min(4, I.size - 1)])
        for u in vecs.T:
            g = np.zeros(gs.n)
            g[I] = np.abs(u * s_m)
            yield s, g


def verify_spi(gs: GraphSlice, h, beta, s_grid, n_samples=1000, seed=0, tol=1e-9) -> SPIReport:
    """Check ``m(f^2) <= s Q(f) + beta(s) m(|f| h)^2`` on sampled ``f``.

    Every candidate from :func:`spi_candidates` is tested at every ``s``
    in the grid.
    """
    h = np.asarray(h, dtype=float)
    betas = {float(s): beta(s) for s in s_grid}
    checks = viol = 0
    worst = math.inf
    for _, f in spi_candidates(gs, h, beta, s_grid, n_samples, seed):
        lhs, q, l1 = _spi_terms(gs, f, h)
        for s, bs in betas.items():
            mg = (s * q + bs * l1 - lhs) / lhs
            checks += 1
            worst = min(worst, mg)
            viol += mg < -tol
    return SPIReport(checks, int(viol), worst)

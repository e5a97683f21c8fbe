"""Random walks on graph slices and Monte Carlo estimates of hitting functionals.

The discrete-time walk jumps from ``x`` to ``y`` with probability
``E(x, y) / eta(x)``.  The continuous-time walk holds an ``Exp(deg(x))``
time at ``x`` and then jumps the same way, so its generator is ``-Delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    ConvergenceError,
    DepthInsufficientError,
    FunctionalOverflowError,
)
from .graph import (
    GraphGenerator,
    GraphSlice,
    SphereDecomposition,
    as_sequence,
    vertex_str,
)
from .rng import BLOCK, block_streams, path_stream

LOG_CAP = 700.0
MAX_STEPS = 1_000_000


class Walker:
    """Vectorised inverse-CDF jumps on a slice.

    Row ``x`` of the jump matrix is stored as cumulative probabilities
    shifted by ``x``, so one ``searchsorted`` serves many paths at once.
    """

    def __init__(self, gs: GraphSlice):
        W = gs.weights.tocsr()
        W.sort_indices()
        self.gs = gs
        self.indices = W.indices
        counts = np.diff(W.indptr)
        row = np.repeat(np.arange(gs.n), counts)
        eta = np.asarray(W.sum(axis=1)).ravel()
        p = W.data / eta[row]
        cs = np.cumsum(p)
        start = np.concatenate([[0.0], cs])[W.indptr[:-1]]
        cum = row + (cs - start[row])
        ends = W.indptr[1:][counts > 0] - 1
        cum[ends] = row[ends] + 1.0
        self.cum = cum
        self.rate = eta / gs.measure
        self.boundary = gs.boundary

    def jump(self, states, u):
        pos = np.searchsorted(self.cum, states + u, side="right")
        return self.indices[pos]

    def check(self, states):
        bad = self.boundary[states]
        if bad.any():
            v = self.gs.vertices[states[np.flatnonzero(bad)[0]]]
            raise DepthInsufficientError(
                f"walk reached boundary vertex {vertex_str(v)}; materialize a deeper slice")


@dataclass(eq=False)
class PathSample:
    """One trajectory: visited vertices and the times at which they were entered."""

    states: np.ndarray
    times: np.ndarray | None
    vertices: list

    @property
    def n_jumps(self):
        return len(self.states) - 1


def _start(gs, x0):
    i = gs.idx(x0)
    gs.require_interior(i)
    return i


def simulate_dtmc(gs: GraphSlice, x0, n_steps: int, seed=0, stop_level=None,
                  decomp: SphereDecomposition | None = None) -> PathSample:
    """Discrete-time walk for ``n_steps`` steps (or until the level exceeds ``stop_level``)."""
    walker = Walker(gs)
    rng = path_stream(seed, 0)
    s = _start(gs, x0)
    lev = gs.level if decomp is None else decomp.level
    out = [s]
    for _ in range(int(n_steps)):
        if stop_level is not None and lev[s] > stop_level:
            break
        walker.check(np.array([s]))
        s = int(walker.jump(np.array([s]), rng.random(1))[0])
        out.append(s)
    states = np.array(out)
    return PathSample(states=states, times=None, vertices=[gs.vertices[i] for i in states])


def simulate_ctmc(gs: GraphSlice, x0, T=None, n_jumps=None, seed=0, stop_level=None,
                  decomp: SphereDecomposition | None = None, artificial=None) -> PathSample:
    """Continuous-time walk up to time ``T``, ``n_jumps`` jumps or exit beyond ``stop_level``.

    ``artificial`` adds a self-jump clock of the given rate at every vertex
    (scalar or per-vertex array).  Self-jumps are not recorded, so the
    returned path is a sample of the ordinary walk.
    """
    if T is None and n_jumps is None and stop_level is None:
        raise ConfigError("give a time cap, a jump cap or a stop level")
    walker = Walker(gs)
    rng = path_stream(seed, 0)
    s = _start(gs, x0)
    lev = gs.level if decomp is None else decomp.level
    extra = np.zeros(gs.n) if artificial is None else np.broadcast_to(np.asarray(artificial, float), (gs.n,))
    t = 0.0
    states, times = [s], [0.0]
    steps = 0
    while True:
        if stop_level is not None and lev[s] > stop_level:
            break
        if n_jumps is not None and len(states) - 1 >= n_jumps:
            break
        walker.check(np.array([s]))
        total = walker.rate[s] + extra[s]
        t += rng.exponential() / total
        if T is not None and t > T:
            break
        steps += 1
        if steps > MAX_STEPS:
            raise ConvergenceError("walk did not stop within the step cap")
        if rng.random() * total >= walker.rate[s]:
            continue
        s = int(walker.jump(np.array([s]), rng.random(1))[0])
        states.append(s)
        times.append(t)
    states = np.array(states)
    return PathSample(states=states, times=np.array(times), vertices=[gs.vertices[i] for i in states])


# ----------------------------------------------------------- exponential clocks


def min_of_exponentials(rates, n: int, seed=0):
    """Race ``n`` rounds of independent ``Exp(rates[r])`` clocks.

    Returns the winning times and the index of the winner.
    """
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 1 or not np.all(rates > 0):
        raise ConfigError("rates must be a positive vector")
    rng = path_stream(seed, 0)
    clocks = rng.exponential(size=(int(n), rates.size)) / rates
    return clocks.min(axis=1), clocks.argmin(axis=1)


def first_jump_samples(gs: GraphSlice, x0, n: int, seed=0, artificial=0.0):
    """Time and target of the first real jump from ``x0``, ``n`` independent draws.

    With ``artificial > 0`` every vertex also carries a self-jump clock of
    that rate; self-jumps are discarded.
    """
    walker = Walker(gs)
    s = _start(gs, x0)
    walker.check(np.array([s]))
    rate = walker.rate[s]
    total = rate + float(artificial)
    times = np.empty(n)
    targets = np.empty(n, dtype=np.int64)
    for start, stop, rng in block_streams(seed, n):
        k = stop - start
        t = np.zeros(k)
        pending = np.arange(k)
        while pending.size:
            t[pending] += rng.exponential(size=pending.size) / total
            real = rng.random(pending.size) * total < rate
            pending = pending[~real]
        times[start:stop] = t
        targets[start:stop] = walker.jump(np.full(k, s), rng.random(k))
    return times, targets


# ----------------------------------------------------------- hitting functionals


@dataclass(eq=False)
class MCEstimate:
    mean: float
    se: float
    samples: np.ndarray
    exit_times: np.ndarray
    occupation: np.ndarray | None = None

    @property
    def n_paths(self):
        return len(self.samples)


def _potential(lam, gs, decomp, N):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        return np.full(gs.n, float(lam))
    if lam.shape == (gs.n,):
        return lam
    if lam.shape[0] >= N + 1:
        return np.where(decomp.level <= N, lam[np.minimum(decomp.level, N)], 0.0)
    raise ConfigError("potential must be a scalar, a per-level array or a per-vertex array")


def _run_exits(gs, decomp, x0, N, n_paths, seed, weight, continuous, block):
    """Shared loop: accumulate ``weight`` along paths until the level exceeds ``N``."""
    walker = Walker(gs)
    s0 = _start(gs, x0)
    lev = decomp.level
    if lev[s0] > N:
        raise ConfigError(f"start vertex already outside B_{N}")
    logs = np.empty(n_paths)
    exits = np.empty(n_paths)
    occ = np.zeros(N + 1) if continuous else None
    for start, stop, rng in block_streams(seed, n_paths, block):
        k = stop - start
        s = np.full(k, s0)
        logv = np.zeros(k)
        t = np.zeros(k)
        alive = np.arange(k)
        steps = 0
        while alive.size:
            cur = s[alive]
            walker.check(cur)
            if continuous:
                hold = rng.exponential(size=alive.size) / walker.rate[cur]
                logv[alive] += weight[cur] * hold
                t[alive] += hold
                np.add.at(occ, lev[cur], hold)
            else:
                logv[alive] += weight[cur]
                t[alive] += 1
            nxt = walker.jump(cur, rng.random(alive.size))
            s[alive] = nxt
            alive = alive[lev[nxt] <= N]
            steps += 1
            if steps > MAX_STEPS:
                raise ConvergenceError(f"paths did not leave B_{N} within {MAX_STEPS} steps")
        if np.any(logv > LOG_CAP):
            raise FunctionalOverflowError(
                f"{int(np.sum(logv > LOG_CAP))} paths overflow the functional (log > {LOG_CAP})",
                n_overflow=int(np.sum(logv > LOG_CAP)))
        logs[start:stop] = logv
        exits[start:stop] = t
    vals = np.exp(logs)
    se = float(vals.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.nan
    if occ is not None:
        occ /= n_paths
    return MCEstimate(mean=float(vals.mean()), se=se, samples=vals, exit_times=exits, occupation=occ)


def mc_continuous_functional(gs: GraphSlice, decomp: SphereDecomposition, x0, N: int, lam,
                             n_paths: int, seed=0, block=None) -> MCEstimate:
    """Estimate ``E_x0 exp(int_0^{T_N} lam(X_t) dt)``, ``T_N`` the exit time of ``B_N``.

    ``lam`` is a scalar, a per-level array or a per-vertex array.  The
    integral is accumulated as ``sum lam(n) L(n)`` over the occupation
    times of the spheres; their means are returned in ``occupation``.
    """
    w = _potential(lam, gs, decomp, N)
    return _run_exits(gs, decomp, x0, N, int(n_paths), seed, w, True, block or BLOCK)


def mc_discrete_functional(gs: GraphSlice, decomp: SphereDecomposition, x0, N: int, Lam,
                           n_paths: int, seed=0, block=None) -> MCEstimate:
    """Estimate ``E_x0 prod_{k < T_N} Lam(X_k)`` for the discrete-time walk."""
    Lam = _potential(Lam, gs, decomp, N)
    if np.any(Lam[decomp.level <= N] <= 0):
        raise ConfigError("Lam must be positive")
    with np.errstate(divide="ignore"):
        w = np.log(Lam)
    return _run_exits(gs, decomp, x0, N, int(n_paths), seed, w, False, block or BLOCK)


@dataclass(eq=False)
class RatioEstimate:
    levels: np.ndarray
    ratio: np.ndarray
    se: np.ndarray
    estimates: list


def radial_ratio_estimate(gs: GraphSlice, decomp: SphereDecomposition, N: int, lam,
                          n_paths: int, seed=0, discrete=False) -> RatioEstimate:
    """``U_N(x_n) / U_N(x_0)`` for one start ``x_n`` on each sphere ``n <= N``.

    Each start level has its own stream.  The standard error of the ratio
    comes from the delta method for independent numerator and denominator.
    """
    fn = mc_discrete_functional if discrete else mc_continuous_functional
    ests = [fn(gs, decomp, int(decomp.spheres[n][0]), N, lam, n_paths, seed=(int(seed), n))
            for n in range(N + 1)]
    base = ests[0]
    ratio = np.array([e.mean / base.mean for e in ests])
    rel = np.array([math.hypot(e.se / e.mean, base.se / base.mean) for e in ests])
    se = np.abs(ratio) * rel
    se[0] = 0.0
    return RatioEstimate(levels=np.arange(N + 1), ratio=ratio, se=se, estimates=ests)


# ----------------------------------------------------------- explosion


@dataclass(eq=False)
class BirthDeathRates:
    """Rates of a continuous-time chain on the non-negative integers.

    Unlike a graph, inward rates may vanish (pure birth).
    """

    plus: object
    minus: object = 0.0

    def arrays(self, n):
        b, a = as_sequence(self.plus), as_sequence(self.minus)
        bp = np.array([b(k) for k in range(n)], dtype=float)
        am = np.array([a(k) if k > 0 else 0.0 for k in range(n)], dtype=float)
        if np.any(bp < 0) or np.any(am < 0) or np.any(bp + am <= 0):
            raise ConfigError("rates must be non-negative with positive total")
        return bp, am


@dataclass(frozen=True)
class ExplosionReport:
    prob: float
    prob_se: float
    mean_time: float
    mean_time_se: float
    n_paths: int
    T: float
    J: int


def _chain_rates(chain, x0, J):
    if isinstance(chain, BirthDeathRates):
        return chain.arrays(x0 + J + 2)
    if isinstance(chain, GraphGenerator):
        if chain.kind != "line_chain":
            raise ConfigError("explosion probe needs a line chain or explicit birth-death rates")
        # read the rates directly; the measure of a fast chain overflows long before J jumps
        return BirthDeathRates(chain.params["plus"], chain.params["minus"]).arrays(x0 + J + 2)
    raise ConfigError("unsupported chain type")


def explosion_probe(chain, x0: int, T: float, J: int, n_paths: int, seed=0) -> ExplosionReport:
    """Probability of at least ``J`` jumps before time ``T``, and the mean time of ``J`` jumps.

    A probability close to one signals explosion (infinitely many jumps in
    finite time); a probability near zero signals a non-explosive chain.
    """
    x0, J, n_paths = int(x0), int(J), int(n_paths)
    b, a = _chain_rates(chain, x0, J)
    rate = b + a
    up = np.divide(b, rate)
    times = np.empty(n_paths)
    for start, stop, rng in block_streams(seed, n_paths):
        k = stop - start
        s = np.full(k, x0)
        t = np.zeros(k)
        for _ in range(J):
            t += rng.exponential(size=k) / rate[s]
            s = s + np.where(rng.random(k) < up[s], 1, -1)
        times[start:stop] = t
    hit = times <= T
    p = float(hit.mean())
    return ExplosionReport(prob=p, prob_se=math.sqrt(max(p * (1 - p), 0.0) / n_paths),
                           mean_time=float(times.mean()),
                           mean_time_se=float(times.std(ddof=1) / math.sqrt(n_paths)),
                           n_paths=n_paths, T=float(T), J=J)

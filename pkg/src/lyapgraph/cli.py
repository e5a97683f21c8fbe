"""Command-line front end.

Every subcommand writes a CSV whose ``#`` header echoes the full
configuration, so identical invocations give identical bytes.  Exit codes:
0 success, 2 configuration error, 3 unmet precondition, 4 numerical
failure, 5 violated invariant.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import (
    isoperimetric_bound,
    lyapunov_bounded_bound,
    lyapunov_ratio_bound,
    lyapunov_spi_beta,
    spi_s_grid,
    verify_spi,
    wss_sandwich,
)
from .coupling import CHECKS, coupled_simulate
from .eigen import annulus, dirichlet_eigs, harmonic_glue, persson_scan, resolvent_superharmonic, weyl_ratio
from .errors import ConfigError, InvariantViolation, LyapgraphError, NotWSSError
from .graph import (
    degree_table,
    detect_wss,
    materialize,
    parse_sequence,
    sphere_decomposition,
    vertex_str,
)
from .laplacian import dirichlet_matrix, export_coo
from .radial import compare_full_vs_radial, radial_recursion, reduce_to_radial
from .report import BOUND_HEADER, EigenRef, ReportResults, bound_rows, emit_report, write_csv
from .specfile import parse_graph_spec
from .stochastic import BirthDeathRates, explosion_probe, mc_continuous_functional, radial_ratio_estimate


@dataclass
class ExperimentConfig:
    """Everything a run depends on; echoed into the output header."""

    command: str
    options: dict = field(default_factory=dict)
    output: str | None = None
    text: str | None = None
    failure: LyapgraphError | None = None

    def meta(self):
        meta = {"command": self.command}
        for k, v in self.options.items():
            if v is not None and k not in ("out",):
                meta[k] = v
        return meta


# ---------------------------------------------------------------- helpers


def _load(path, depth):
    spec = parse_graph_spec(path)
    d = depth if depth is not None else spec.depth
    if d is None:
        raise ConfigError(f"{path}: no depth given (use --depth or 'depth = ...')")
    gs = materialize(spec.generator(), int(d))
    return spec, gs, sphere_decomposition(gs)


def _spec_meta(prefix, spec):
    return {f"{prefix}.{k}": v for k, v in spec.header.items()} | (
        {f"{prefix}.edges": len(spec.edges)} if spec.edges else {})


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None


def _k_arg(text):
    if text == "all":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'all', got {text!r}") from None


def _ball_region(gs, decomp, N):
    if N is None:
        return gs.interior
    U = np.flatnonzero(decomp.level <= int(N))
    gs.require_interior(U)
    return U


# ---------------------------------------------------------------- commands


def cmd_graph(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    meta = cfg.meta() | _spec_meta("graph", spec)
    meta["n_vertices"] = gs.n
    meta["wss"] = detect_wss(gs, decomp) is not None
    if a.matrix:
        dm = dirichlet_matrix(gs)
        return meta, ("row", "col", "value"), _coo_rows(gs, dm)
    ep, em, e0 = degree_table(gs, decomp)
    rows = []
    for i, v in enumerate(gs.vertices):
        m = gs.measure[i]
        rows.append((vertex_str(v), int(decomp.level[i]), bool(gs.boundary[i]), m, gs.eta[i],
                     _nan_none(ep[i] / m), _nan_none(em[i] / m), _nan_none(e0[i] / m)))
    return meta, ("vertex", "level", "boundary", "measure", "eta", "deg_plus", "deg_minus", "deg_zero"), rows


def _coo_rows(gs, dm):
    text = export_coo(gs, dm.operator, dm.region)
    for line in text.splitlines():
        r, c, v = line.split(",")
        if r == "row":
            continue
        yield r, c, float(v)


def _nan_none(x):
    return None if not math.isfinite(x) else float(x)


def _bounds(gs, decomp, horizon, c=None, n0=None, sandwich=True):
    reps = [lyapunov_ratio_bound(gs, decomp, c=c, horizon=horizon)]
    if n0 is None:
        n0 = reps[0].params.get("n0", 0) if reps[0].applicable else 0
    reps.append(lyapunov_bounded_bound(gs, decomp, n0=n0, horizon=horizon))
    reps.append(isoperimetric_bound(gs, decomp, weight="eta"))
    reps.append(isoperimetric_bound(gs, decomp, weight="m"))
    prof = detect_wss(gs, decomp)
    if sandwich and prof is not None and prof.deg_zero is not None and gs.weighting == "combinatorial":
        for n in range(1, prof.n_levels):
            reps.extend(wss_sandwich(prof, n).reports())
    return reps


def cmd_bounds(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    reps = _bounds(gs, decomp, a.horizon, a.c, a.n0)
    return cfg.meta() | _spec_meta("graph", spec), BOUND_HEADER, bound_rows(reps)


def cmd_eigs(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    U = _ball_region(gs, decomp, a.N)
    res = dirichlet_eigs(gs, U, k=a.k, method=a.method, seed=a.seed)
    meta = cfg.meta() | _spec_meta("graph", spec) | {"region_size": U.size, "solver": res.method}
    rows = [(i + 1, v, r) for i, (v, r) in enumerate(zip(res.values, res.residuals))]
    return meta, ("index", "eigenvalue", "residual"), rows


def cmd_persson(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    if a.K is None:
        top = int(decomp.level[gs.interior].max())
        Ks = list(range(0, top))
    else:
        Ks = _int_list(a.K)
    rows = [(K, vals[0]) for K, vals in persson_scan(gs, decomp, Ks, seed=a.seed)]
    return cfg.meta() | _spec_meta("graph", spec), ("K", "lambda1"), rows


def cmd_weyl(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    t = weyl_ratio(gs)
    rows = zip(t.index, t.eigenvalues, t.degrees, t.ratio)
    return cfg.meta() | _spec_meta("graph", spec), ("n", "lambda_n", "deg_n", "ratio"), rows


def cmd_radial(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    chain = reduce_to_radial(gs, decomp)
    meta = cfg.meta() | _spec_meta("graph", spec) | {"levels": len(chain)}
    if a.compare is not None:
        cmp_ = compare_full_vs_radial(gs, decomp, a.compare, seed=a.seed)
        meta |= {"lambda1_full": cmp_.lambda1_full, "lambda1_jacobi": cmp_.lambda1_jacobi, "gap": cmp_.gap}
    if a.lam is None:
        rows = [(n, chain.m[n], chain.a[n], chain.b[n]) for n in range(len(chain))]
        return meta, ("n", "m", "a", "b"), rows
    rec = radial_recursion(chain, a.lam)
    meta["first_nonpositive"] = rec.first_nonpositive
    return meta, ("n", "W"), list(enumerate(rec.W))


def cmd_ap(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    lam = a.lam
    if lam is None:
        lam1 = dirichlet_eigs(gs, annulus(gs, decomp, a.K), seed=a.seed).lambda1
        lam = a.lam_frac * lam1
    res = resolvent_superharmonic(gs, decomp, a.K, lam=lam, seed=a.seed)
    glue = harmonic_glue(gs, decomp, res, method=a.glue)
    meta = cfg.meta() | _spec_meta("graph", spec) | {
        "lambda1_annulus": res.lambda1, "lam": res.lam, "eps": glue.eps, "ok": glue.ok,
        "min_slack": float(glue.slack.min())}
    I = gs.interior
    slack = np.full(gs.n, np.nan)
    slack[I] = glue.slack
    in_A = np.zeros(gs.n, bool)
    in_A[glue.inner_set] = True
    rows = [(vertex_str(gs.vertices[i]), int(decomp.level[i]), glue.W[i], res.phi[i], bool(in_A[i]),
             _nan_none(slack[i])) for i in range(gs.n)]
    if not glue.ok:
        cfg.failure = InvariantViolation(f"glued function has slack {glue.slack.min():.3g}")
    return meta, ("vertex", "level", "W", "phi", "in_A", "slack"), rows


SIM_HEADER = ("record", "index", "value", "se", "exit_time", "reference")


def cmd_simulate(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    meta = cfg.meta() | _spec_meta("graph", spec)
    N = a.target
    if a.x0 is not None:
        est = mc_continuous_functional(gs, decomp, a.x0, N, a.lam, a.paths, seed=a.seed)
        rows = []
        if a.per_path:
            rows = [("path", i, v, None, t, None) for i, (v, t) in enumerate(zip(est.samples, est.exit_times))]
        rows.append(("aggregate", est.n_paths, est.mean, est.se, float(est.exit_times.mean()), None))
        return meta, SIM_HEADER, rows
    est = radial_ratio_estimate(gs, decomp, N, a.lam, a.paths, seed=a.seed, discrete=a.discrete)
    ref = [None] * (N + 1)
    try:
        chain = reduce_to_radial(gs, decomp, discrete=a.discrete)
        if not a.discrete:
            ref = list(radial_recursion(chain, a.lam, n_max=N).W)
    except NotWSSError:
        pass
    rows = []
    worst = 0.0
    for n in est.levels:
        e = est.estimates[n]
        rows.append(("level", int(n), est.ratio[n], est.se[n], float(e.exit_times.mean()), ref[n]))
        if ref[n] is not None and est.se[n] > 0:
            worst = max(worst, abs(est.ratio[n] - ref[n]) / est.se[n])
    meta["max_z"] = worst
    return meta, SIM_HEADER, rows


COUPLE_HEADER = ("record", "index", "T_G", "T_H", "se_T_G", "se_T_H") + CHECKS


def cmd_couple(cfg, a):
    N = a.target
    depth = a.depth if a.depth is not None else N + 2
    cfg.options["depth"] = depth
    specG, gsG, dG = _load(a.g, depth)
    specH, gsH, dH = _load(a.h, depth)
    res = coupled_simulate((gsG, dG), (gsH, dH), N, a.paths, seed=a.seed,
                           keep=a.paths if a.per_path else 0)
    meta = cfg.meta() | _spec_meta("G", specG) | _spec_meta("H", specH)
    rows = []
    for i, smp in enumerate(res.samples):
        rows.append(("path", i, smp.T_G, smp.T_H, None, None) + tuple(smp.violations[c] for c in CHECKS))
    n = len(res.T_G)
    se = lambda x: float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else None  # noqa: E731
    rows.append(("aggregate", n, float(res.T_G.mean()), float(res.T_H.mean()), se(res.T_G), se(res.T_H))
                + tuple(res.violations[c] for c in CHECKS))
    if res.n_violations:
        cfg.failure = InvariantViolation(f"{res.n_violations} coupling violations")
    return meta, COUPLE_HEADER, rows


def cmd_explode(cfg, a):
    meta = cfg.meta()
    if a.graph is not None:
        spec = parse_graph_spec(a.graph)
        chain = spec.generator()
        meta |= _spec_meta("graph", spec)
    elif a.plus is not None:
        chain = BirthDeathRates(plus=_seq(a.plus), minus=_seq(a.minus) if a.minus else 0.0)
    else:
        raise ConfigError("explode needs --graph or --plus")
    rep = explosion_probe(chain, a.x0, a.time_cap, a.jump_cap, a.paths, seed=a.seed)
    rows = [(rep.n_paths, rep.prob, rep.prob_se, rep.mean_time, rep.mean_time_se)]
    return meta, ("n_paths", "prob", "prob_se", "mean_time", "mean_time_se"), rows


def _seq(text):
    seq = parse_sequence(text)
    return seq[0] if len(seq) == 1 else seq


def cmd_spi(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    h = np.ones(gs.n)
    beta = lyapunov_spi_beta(gs, decomp, a.c, h)
    grid = spi_s_grid(beta, a.s_points, a.s_span)
    scale = a.beta_scale

    class _Scaled:
        s_min = beta.s_min

        def __call__(self, s):
            return scale * beta(s)

    rep = verify_spi(gs, h, _Scaled(), grid, n_samples=a.samples, seed=a.seed)
    meta = cfg.meta() | _spec_meta("graph", spec) | {
        "b": beta.b, "r0": beta.r0, "s_min": beta.s_min, "n_checks": rep.n_checks,
        "n_violations": rep.n_violations, "worst_margin": rep.worst_margin}
    rows = [(s, scale * beta(s)) for s in grid]
    return meta, ("s", "beta"), rows


def cmd_report(cfg, a):
    spec, gs, decomp = _load(a.graph, a.depth)
    reps = _bounds(gs, decomp, a.horizon, sandwich=False)
    refs = [EigenRef("lambda1(interior)", dirichlet_eigs(gs, seed=a.seed).lambda1, -1)]
    Ks = range(0, max(0, int(decomp.level[gs.interior].max())))
    for K, vals in persson_scan(gs, decomp, Ks, seed=a.seed):
        refs.append(EigenRef(f"lambda1(outside B_{K})", float(vals[0]), K))
    text, flagged = emit_report(ReportResults(reps, refs))
    cfg.text = text
    if flagged:
        cfg.failure = InvariantViolation(f"{flagged} bound(s) exceed a computed eigenvalue")
    return None


COMMANDS = {
    "graph": cmd_graph, "bounds": cmd_bounds, "eigs": cmd_eigs, "persson": cmd_persson,
    "weyl": cmd_weyl, "radial": cmd_radial, "ap-construct": cmd_ap, "simulate": cmd_simulate,
    "couple": cmd_couple, "explode": cmd_explode, "spi": cmd_spi, "report": cmd_report,
}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lyapgraph", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"lyapgraph {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, help, graph=True):
        s = sub.add_parser(name, help=help)
        if graph:
            s.add_argument("--graph", required=True, help="graph description file")
        s.add_argument("--depth", type=int, help="materialization depth (overrides the file)")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--out", "-o", help="output path (default: stdout)")
        return s

    s = cmd("graph", "vertex table or Dirichlet matrix of a slice")
    s.add_argument("--matrix", action="store_true", help="emit the Dirichlet operator as row,col,value")

    s = cmd("bounds", "spectral lower bounds")
    s.add_argument("--horizon", type=int, help="last level inspected (default: last interior level)")
    s.add_argument("--c", type=float, help="fixed ratio instead of the sweep")
    s.add_argument("--n0", type=int, help="inner radius for the bounded-degree bound")

    s = cmd("eigs", "smallest Dirichlet eigenvalues")
    s.add_argument("--k", type=_k_arg, default=1, help="number of eigenvalues or 'all'")
    s.add_argument("--N", type=int, help="ball radius (default: all interior vertices)")
    s.add_argument("--method", default="auto", choices=("auto", "dense", "iterative"))

    s = cmd("persson", "first eigenvalue outside growing balls")
    s.add_argument("--K", help="comma-separated radii (default: 0 up to the last interior level)")

    cmd("weyl", "eigenvalues against sorted degrees")

    s = cmd("radial", "radial birth-death chain and recursion traces")
    s.add_argument("--lam", type=float, help="emit the radial solution W for this lambda")
    s.add_argument("--compare", type=int, metavar="N", help="also compare lambda_1 on B_N with the chain")

    s = cmd("ap-construct", "positive supersolution by resolvent and glue")
    s.add_argument("--K", type=int, default=2)
    s.add_argument("--lam", type=float)
    s.add_argument("--lam-frac", type=float, default=0.9, help="lambda as a fraction of lambda_1 of the annulus")
    s.add_argument("--glue", default="harmonic", choices=("harmonic", "flatten"))

    s = cmd("simulate", "Monte Carlo exit functionals")
    s.add_argument("--target", type=int, required=True, metavar="N")
    s.add_argument("--paths", type=int, default=10_000)
    s.add_argument("--lam", type=float, default=0.0)
    s.add_argument("--x0", help="start vertex; without it the per-level ratio is estimated")
    s.add_argument("--discrete", action="store_true")
    s.add_argument("--per-path", action="store_true")

    s = cmd("couple", "coupled walks on two graphs", graph=False)
    s.add_argument("--g", required=True, help="dominating graph file")
    s.add_argument("--h", required=True, help="dominated graph file")
    s.add_argument("--target", type=int, required=True, metavar="N")
    s.add_argument("--paths", type=int, default=10_000)
    s.add_argument("--per-path", action="store_true")

    s = cmd("explode", "explosion probe for birth-death chains", graph=False)
    s.add_argument("--graph", help="line_chain description file")
    s.add_argument("--plus", help="outward rates, e.g. '(n + 1)**2' or '1, 2, 3, ...'")
    s.add_argument("--minus", help="inward rates (default: 0)")
    s.add_argument("--x0", type=int, default=0)
    s.add_argument("--time-cap", type=float, default=10.0)
    s.add_argument("--jump-cap", type=int, default=10_000)
    s.add_argument("--paths", type=int, default=10_000)

    s = cmd("spi", "super-Poincare profile and its sampled check")
    s.add_argument("--c", type=float, default=math.sqrt(2))
    s.add_argument("--s-points", type=int, default=8)
    s.add_argument("--s-span", type=float, default=100.0)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--beta-scale", type=float, default=1.0)

    s = cmd("report", "text table of all bounds against computed eigenvalues")
    s.add_argument("--horizon", type=int)
    return p


def run_command(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, run the subcommand and write its output.  Returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    opts = {k: v for k, v in vars(a).items() if k != "command"}
    cfg = ExperimentConfig(a.command, opts, a.out)
    try:
        out = COMMANDS[a.command](cfg, a)
    except LyapgraphError as exc:
        stderr.write(f"lyapgraph {a.command}: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    stream = open(a.out, "w", newline="") if a.out else stdout
    try:
        if out is None:
            stream.write(cfg.text)
        else:
            write_csv(stream, *out)
    finally:
        if a.out:
            stream.close()
    if cfg.failure is not None:
        stderr.write(f"lyapgraph {a.command}: {type(cfg.failure).__name__}: {cfg.failure}\n")
        return cfg.failure.exit_code
    return 0


def main(argv=None):
    try:
        code = run_command(argv)
        sys.stdout.flush()
    except BrokenPipeError:
        # output piped into a closed reader such as head
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()

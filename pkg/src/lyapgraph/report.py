"""CSV output and the text summary comparing bounds with eigenvalues."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import BoundReport


def fmt(v) -> str:
    """Lossless text form: 17 significant digits for floats, empty for ``None``."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if isinstance(v, dict):
        return ";".join(f"{k}={fmt(v[k])}" for k in sorted(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(fmt(x) for x in v)
    return str(v)


def write_csv(stream, meta: dict, header, rows) -> None:
    """``#``-prefixed metadata (sorted keys), then a header row and data rows."""
    stream.write(f"# tool: lyapgraph {__version__}\n")
    for k in sorted(meta):
        stream.write(f"# {k}: {fmt(meta[k])}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])


def read_csv(text: str):
    """Inverse of :func:`write_csv`: ``(meta, header, rows)`` with string cells."""
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition(": ")
            meta[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, (rows[0] if rows else []), rows[1:]


def bound_rows(reports):
    for r in reports:
        yield (r.source, r.kind, r.value, r.applicable, r.horizon, r.params, r.reason)


BOUND_HEADER = ("tag", "kind", "bound", "applicable", "horizon", "params", "reason")


@dataclass(frozen=True)
class EigenRef:
    """Computed ``lambda_1`` of the Dirichlet Laplacian outside ``B_K`` (``K = -1``: whole interior)."""

    label: str
    value: float
    K: int = -1


@dataclass
class ReportResults:
    bounds: list = field(default_factory=list)
    eigen: list = field(default_factory=list)


def _applies(b: BoundReport, ref: EigenRef) -> bool:
    """Whether ``b`` bounds ``ref`` from below.

    Lower bounds on a higher-index eigenvalue are not compared.  Bounds
    proved beyond ``B_n0`` are compared with regions outside ``B_K``,
    ``K >= n0``.
    """
    if not b.applicable or b.kind not in ("lower", "ess-lower"):
        return False
    if b.params.get("index", 1) != 1:
        return False
    if b.kind == "ess-lower":
        return ref.K >= int(b.params.get("n0", 0))
    return True


def emit_report(results: ReportResults, tol=1e-9):
    """Text table of every bound against the computed eigenvalues.

    Returns ``(text, n_flagged)``.  A lower bound exceeding an eigenvalue it
    applies to (beyond relative tolerance ``tol``) is flagged.
    """
    out = io.StringIO()
    refs = list(results.eigen)
    if refs:
        out.write("computed eigenvalues\n")
        for e in refs:
            out.write(f"  {e.label:<24} {e.value:.12g}\n")
    lines = []
    flagged = 0
    best = None
    for b in results.bounds:
        if not b.applicable:
            lines.append((b.source, b.kind, "n/a", "", b.reason))
            continue
        worst = None
        for e in refs:
            if _applies(b, e):
                gap = e.value - b.value
                if worst is None or gap < worst[0]:
                    worst = (gap, e)
        status = ""
        if worst is not None:
            gap, e = worst
            if gap < -tol * max(1.0, abs(e.value)):
                status = f"VIOLATED by {-gap:.3g} ({e.label})"
                flagged += 1
            else:
                status = f"ok (<= {e.label})"
        if b.kind in ("lower", "ess-lower") and b.params.get("index", 1) == 1:
            if best is None or b.value > best.value:
                best = b
        lines.append((b.source, b.kind, f"{b.value:.12g}", status, b.reason))
    if lines:
        w = [max(len(r[i]) for r in lines + [("tag", "kind", "bound", "check", "")]) for i in range(4)]
        out.write("bounds\n")
        out.write(f"  {'tag':<{w[0]}}  {'kind':<{w[1]}}  {'bound':<{w[2]}}  check\n")
        for r in lines:
            tail = r[3] if r[3] else r[4]
            out.write(f"  {r[0]:<{w[0]}}  {r[1]:<{w[1]}}  {r[2]:<{w[2]}}  {tail}\n".rstrip() + "\n")
    if best is not None:
        out.write(f"best lower bound: {best.value:.12g} ({best.source})\n")
    if flagged:
        out.write(f"FLAGGED: {flagged} bound(s) exceed a computed eigenvalue\n")
    return out.getvalue(), flagged

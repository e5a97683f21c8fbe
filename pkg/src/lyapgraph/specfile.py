"""Graph description files.

A file holds ``key = value`` header lines (``generator`` and ``weight`` are
accepted for ``kind`` and ``weighting``), then optional ``EDGE u v w`` and
``MEASURE u m`` lines.  ``#`` starts a comment.  Example::

    kind = d_ary_tree
    d = 2
    weighting = normalized
    depth = 10
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import AsymmetricGraphError, ConfigError, SpecParseError
from .graph import GraphGenerator, build_generator, parse_sequence

_INT = {"d", "depth"}
_FLOAT = {"m0"}
_SEQ = {"eta", "sizes", "plus", "minus"}
_BOOL = {"complete_spheres"}
_STR = {"kind", "weighting"}
_INTLIST = {"roots"}
KEYS = _INT | _FLOAT | _SEQ | _BOOL | _STR | _INTLIST
ALIASES = {"generator": "kind", "weight": "weighting"}


@dataclass
class GraphSpec:
    kind: str
    params: dict
    depth: int | None = None
    edges: list = field(default_factory=list)
    measures: dict = field(default_factory=dict)
    header: dict = field(default_factory=dict)  # raw values, echoed into outputs

    def generator(self) -> GraphGenerator:
        params = dict(self.params)
        if self.kind == "edge_list":
            params["edges"] = self.edges
            params["measures"] = self.measures or None
        elif self.edges or self.measures:
            raise ConfigError(f"EDGE/MEASURE lines are only allowed for edge_list, not {self.kind}")
        return build_generator(self.kind, **params)


def _value(key, raw, line):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key in _SEQ:
            seq = parse_sequence(raw)
            return seq[0] if len(seq) == 1 else seq
        if key in _BOOL:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if key in _INTLIST:
            return [int(t) for t in raw.split(",") if t.strip()]
        return raw
    except (ValueError, ConfigError):
        raise SpecParseError(f"bad value {raw!r} for {key}", line) from None


def parse_graph_spec(source) -> GraphSpec:
    """Parse a graph file (path or text).  Errors carry the line number."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = str(source)
    header: dict = {}
    parsed: dict = {}
    edges: list = []
    measures: dict = {}
    seen_pairs: dict = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0]
        if head in ("EDGE", "MEASURE"):
            parts = line.split()
            try:
                if head == "EDGE":
                    if len(parts) != 4:
                        raise ValueError
                    u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
                    if u < 0 or v < 0:
                        raise ValueError
                else:
                    if len(parts) != 3:
                        raise ValueError
                    u, mval = int(parts[1]), float(parts[2])
                    if u < 0:
                        raise ValueError
            except ValueError:
                raise SpecParseError(f"malformed {head} line: {raw.strip()!r}", no) from None
            if head == "EDGE":
                if u == v:
                    raise SpecParseError(f"self-loop at vertex {u}", no)
                if not w > 0:
                    raise SpecParseError(f"non-positive weight {w}", no)
                for key in ((u, v), (v, u)):
                    old = seen_pairs.get(key)
                    if old is not None and old[0] != w:
                        raise AsymmetricGraphError(
                            f"line {no}: asymmetric weights on pair ({u}, {v}): "
                            f"{old[0]} (line {old[1]}) vs {w}", pair=(u, v))
                seen_pairs[(u, v)] = (w, no)
                edges.append((u, v, w))
            else:
                if not mval > 0:
                    raise SpecParseError(f"non-positive measure {mval}", no)
                if u in measures:
                    raise SpecParseError(f"duplicate MEASURE for vertex {u}", no)
                measures[u] = mval
            continue
        if "=" not in line:
            raise SpecParseError(f"expected 'key = value', EDGE or MEASURE, got {raw.strip()!r}", no)
        key, val = (t.strip() for t in line.split("=", 1))
        key = ALIASES.get(key, key)
        if key not in KEYS:
            raise SpecParseError(f"unknown key {key!r}", no)
        if key in header:
            raise SpecParseError(f"duplicate key {key!r}", no)
        header[key] = val
        parsed[key] = _value(key, val, no)
    kind = parsed.get("kind", "edge_list" if edges else None)
    if kind is None:
        raise SpecParseError("missing 'kind'")
    params = {k: v for k, v in parsed.items() if k not in ("kind", "depth")}
    if kind == "edge_list" and not edges:
        raise SpecParseError("edge_list needs at least one EDGE line")
    return GraphSpec(kind=kind, params=params, depth=parsed.get("depth"), edges=edges,
                     measures=measures, header=header)

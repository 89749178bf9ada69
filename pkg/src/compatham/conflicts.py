"""Edge-pair conflict systems.

A :class:`ConflictSystem` is either LOCAL, holding for every vertex ``v`` a
set ``F_v`` of forbidden pairs of edges meeting at ``v``, or GLOBAL, holding
an edge colouring in which two edges conflict iff they share a colour (the
rainbow setting). Both answer the same pair query, which is all the solvers
need.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .graph import Graph


class Mode(str, enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"


class SystemFormatError(ValueError):
    pass


@dataclass(frozen=True)
class BoundReport:
    max_bound: int
    # (vertex, edge id) for LOCAL, (colour,) for GLOBAL; None when the bound is 0
    witness: tuple | None


class ConflictSystem:
    """Conflict oracle over the edges of a fixed graph."""

    __slots__ = ("graph", "mode", "_local", "_colors")

    def __init__(self, graph: Graph, mode: Mode, local=None, colors=None):
        self.graph = graph
        self.mode = Mode(mode)
        # _local[v][e] = set of edge ids f with {e, f} in F_v
        self._local: dict[int, dict[int, frozenset[int]]] = local or {}
        self._colors: tuple[int, ...] | None = tuple(colors) if colors is not None else None
        if self.mode is Mode.GLOBAL and (self._colors is None or len(self._colors) != graph.m):
            raise ValueError("a GLOBAL system needs exactly one colour per edge")

    # -- constructors -----------------------------------------------------

    @classmethod
    def empty(cls, graph: Graph) -> "ConflictSystem":
        return cls(graph, Mode.LOCAL)

    @classmethod
    def from_pairs(cls, graph: Graph, pairs: Iterable[tuple[int, int, int]]) -> "ConflictSystem":
        """Build a LOCAL system from ``(v, e, f)`` triples: ``{e, f}`` is in ``F_v``."""
        table: dict[int, dict[int, set[int]]] = {}
        for v, e, f in pairs:
            _check_local_pair(graph, v, e, f)
            at_v = table.setdefault(v, {})
            at_v.setdefault(e, set()).add(f)
            at_v.setdefault(f, set()).add(e)
        return cls(graph, Mode.LOCAL, _freeze(table))

    @classmethod
    def from_colors(cls, graph: Graph, colors: Sequence[int] | Mapping[int, int]) -> "ConflictSystem":
        """GLOBAL (rainbow) system from an edge colouring indexed by edge id."""
        return cls(graph, Mode.GLOBAL, colors=_color_list(graph, colors))

    # -- queries ------------------------------------------------------------

    def is_compatible_pair(self, e: int, f: int) -> bool:
        m = self.graph.m
        if not (0 <= e < m and 0 <= f < m):
            raise KeyError(f"unknown edge id in pair ({e}, {f})")
        if e == f:
            raise ValueError("compatibility is defined for distinct edges")
        if self.mode is Mode.GLOBAL:
            return self._colors[e] != self._colors[f]
        v = shared_vertex(self.graph, e, f)
        if v is None:
            return True
        return f not in self._local.get(v, {}).get(e, ())

    def conflicts_at(self, v: int, e: int) -> frozenset[int]:
        """Edges forbidden together with ``e`` at its endpoint ``v`` (LOCAL)."""
        return self._local.get(v, {}).get(e, frozenset())

    def color(self, e: int) -> int:
        if self._colors is None:
            raise ValueError("LOCAL systems carry no colours")
        return self._colors[e]

    @property
    def colors(self) -> tuple[int, ...] | None:
        return self._colors

    def pairs(self) -> list[tuple[int, int, int]]:
        """All LOCAL conflicts as sorted ``(v, e, f)`` with ``e < f``."""
        out = []
        for v in sorted(self._local):
            for e, fs in self._local[v].items():
                out.extend((v, e, f) for f in fs if e < f)
        return sorted(out)

    def __len__(self) -> int:
        if self.mode is Mode.GLOBAL:
            return 0
        return len(self.pairs())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConflictSystem) or other.mode is not self.mode:
            return False
        if self.graph != other.graph:
            return False
        if self.mode is Mode.GLOBAL:
            return self._colors == other._colors
        return self.pairs() == other.pairs()

    def __repr__(self) -> str:
        if self.mode is Mode.GLOBAL:
            return f"ConflictSystem(GLOBAL, colours={len(set(self._colors))})"
        return f"ConflictSystem(LOCAL, pairs={len(self)})"

    # -- serialisation ------------------------------------------------------------

    def to_dict(self) -> dict:
        if self.mode is Mode.GLOBAL:
            return {
                "mode": "global",
                "colors": [[u, v, c] for (u, v), c in zip(self.graph.edges, self._colors)],
            }
        recs = []
        for v, e, f in self.pairs():
            recs.append({"vertex": v, "edge_a": list(self.graph.edge(e)), "edge_b": list(self.graph.edge(f))})
        return {"mode": "local", "conflicts": recs}

    @classmethod
    def from_dict(cls, graph: Graph, d: dict) -> "ConflictSystem":
        mode = d.get("mode")
        if mode == "global":
            return cls.from_colors(graph, _colors_from_rows(graph, d["colors"]))
        if mode != "local":
            raise SystemFormatError(f"unknown system mode {mode!r}")
        triples = []
        for k, rec in enumerate(d.get("conflicts", [])):
            try:
                v = int(rec["vertex"])
                e = graph.edge_id(*map(int, rec["edge_a"]))
                f = graph.edge_id(*map(int, rec["edge_b"]))
                _check_local_pair(graph, v, e, f)
            except (KeyError, ValueError, TypeError) as exc:
                raise SystemFormatError(f"conflict record {k} {rec!r}: {exc}") from None
            triples.append((v, e, f))
        return cls.from_pairs(graph, triples)

    def save(self, path) -> None:
        """JSON for either mode; ``.txt``/``.col`` writes GLOBAL colourings as ``u v colour`` lines."""
        path = str(path)
        with open(path, "w") as fh:
            if self.mode is Mode.GLOBAL and not path.endswith(".json"):
                for (u, v), c in zip(self.graph.edges, self._colors):
                    fh.write(f"{u} {v} {c}\n")
            else:
                json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, graph: Graph, path) -> "ConflictSystem":
        path = str(path)
        with open(path) as fh:
            text = fh.read()
        if path.endswith(".json"):
            return cls.from_dict(graph, json.loads(text))
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise SystemFormatError(f"line {lineno}: expected 'u v colour', got {line!r}")
            rows.append((lineno, *map(int, parts)))
        return cls.from_colors(graph, _colors_from_rows(graph, rows, numbered=True))


def _freeze(table: dict[int, dict[int, set[int]]]) -> dict[int, dict[int, frozenset[int]]]:
    return {v: {e: frozenset(fs) for e, fs in at_v.items()} for v, at_v in table.items()}


def _check_local_pair(graph: Graph, v: int, e: int, f: int) -> None:
    if e == f:
        raise ValueError(f"pair at vertex {v} repeats edge {e}")
    ue, ve = graph.edge(e)
    uf, vf = graph.edge(f)
    if v not in (ue, ve) or v not in (uf, vf):
        raise ValueError(f"edges {graph.edge(e)} and {graph.edge(f)} do not both contain vertex {v}")


def _color_list(graph: Graph, colors) -> list[int]:
    if isinstance(colors, Mapping):
        missing = [e for e in range(graph.m) if e not in colors]
        if missing:
            raise ValueError(f"edge {graph.edge(missing[0])} (id {missing[0]}) has no colour")
        return [int(colors[e]) for e in range(graph.m)]
    colors = [int(c) for c in colors]
    if len(colors) != graph.m:
        raise ValueError(f"expected {graph.m} colours, got {len(colors)}")
    return colors


def _colors_from_rows(graph: Graph, rows, numbered: bool = False) -> list[int]:
    out: dict[int, int] = {}
    for k, row in enumerate(rows):
        tag, (u, v, c) = (row[0], row[1:]) if numbered else (k, row)
        where = f"line {tag}" if numbered else f"colour record {tag}"
        eid = graph.get_edge_id(int(u), int(v)) if u != v and 0 <= min(u, v) and max(u, v) < graph.n else None
        if eid is None:
            raise SystemFormatError(f"{where}: ({u}, {v}) is not an edge of the graph")
        if eid in out:
            raise SystemFormatError(f"{where}: edge ({u}, {v}) coloured twice")
        out[eid] = int(c)
    if len(out) != graph.m:
        missing = next(e for e in range(graph.m) if e not in out)
        raise SystemFormatError(f"edge {graph.edge(missing)} has no colour")
    return [out[e] for e in range(graph.m)]


def shared_vertex(graph: Graph, e: int, f: int) -> int | None:
    a, b = graph.edges[e]
    c, d = graph.edges[f]
    if a == c or a == d:
        return a
    if b == c or b == d:
        return b
    return None


def is_compatible_pair(S: ConflictSystem, e: int, f: int) -> bool:
    return S.is_compatible_pair(e, f)


def from_local_coloring(G: Graph, colors) -> ConflictSystem:
    """LOCAL system forbidding equal colours at a common vertex (proper colouring)."""
    col = _color_list(G, colors)
    table: dict[int, dict[int, set[int]]] = {}
    for v in range(G.n):
        by_color: dict[int, list[int]] = {}
        for e in G.incident_edges(v):
            by_color.setdefault(col[e], []).append(e)
        for group in by_color.values():
            if len(group) < 2:
                continue
            at_v = table.setdefault(v, {})
            for e in group:
                at_v[e] = set(group) - {e}
    return ConflictSystem(G, Mode.LOCAL, _freeze(table))


def max_bound(S: ConflictSystem) -> BoundReport:
    if S.mode is Mode.GLOBAL:
        counts = Counter(S.colors)
        if not counts:
            return BoundReport(0, None)
        color, mult = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return BoundReport(mult, (color,))
    best, witness = 0, None
    for v in sorted(S._local):
        for e in sorted(S._local[v]):
            k = len(S._local[v][e])
            if k > best:
                best, witness = k, (v, e)
    return BoundReport(best, witness)


def gen_adversarial(G: Graph, kind: str, seed: int = 0, *, delta: int = 0,
                    vertex: int | None = None, bound: int = 1) -> ConflictSystem:
    """Test-instance generators.

    ``random_bounded``: at every vertex, ``delta`` rounds of random pairing of
    the incident edges; each round gives an edge at most one new partner, so
    the system is ``delta``-bounded by construction and close to saturated.
    ``star_killer``: every pair of edges at ``vertex`` conflicts.
    ``global_random``: random colouring using each colour at most ``bound`` times.
    """
    rng = np.random.default_rng(seed)
    if kind == "random_bounded":
        if delta < 0:
            raise ValueError("delta must be non-negative")
        table: dict[int, dict[int, set[int]]] = {}
        for v in range(G.n):
            inc = np.array(G.incident_edges(v), dtype=np.int64)
            d = len(inc)
            rounds = min(delta, d - 1)
            if rounds <= 0:
                continue
            at_v: dict[int, set[int]] = {}
            for _ in range(rounds):
                perm = inc[rng.permutation(d)]
                for e, f in zip(perm[0:d - 1:2].tolist(), perm[1:d:2].tolist()):
                    at_v.setdefault(e, set()).add(f)
                    at_v.setdefault(f, set()).add(e)
            table[v] = at_v
        return ConflictSystem(G, Mode.LOCAL, _freeze(table))
    if kind == "star_killer":
        if vertex is None or not 0 <= vertex < G.n:
            raise ValueError("star_killer needs a vertex of G")
        inc = G.incident_edges(vertex)
        at_v = {e: frozenset(set(inc) - {e}) for e in inc} if len(inc) > 1 else {}
        return ConflictSystem(G, Mode.LOCAL, {vertex: at_v} if at_v else {})
    if kind == "global_random":
        if bound < 1:
            raise ValueError("global_random needs bound >= 1")
        order = rng.permutation(G.m)
        colors = [0] * G.m
        for pos, e in enumerate(order.tolist()):
            colors[e] = pos // bound
        return ConflictSystem.from_colors(G, colors)
    if kind == "empty":
        return ConflictSystem.empty(G)
    raise ValueError(f"unknown system kind {kind!r}")

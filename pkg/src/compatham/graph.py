"""Simple undirected graphs, digraphs and seeded G(n, p) sampling.

Edge ids are dense, 0..m-1, assigned in lexicographic order of
``(min endpoint, max endpoint)`` so that conflict-system files written
against one run resolve to the same ids in another.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence

import numpy as np


class Graph:
    """Immutable simple graph on vertices ``0..n-1``."""

    __slots__ = ("n", "edges", "_index", "_adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            canon.add((u, v) if u < v else (v, u))
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(canon))
        self._index = {e: i for i, e in enumerate(self.edges)}
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        self._adj = tuple(frozenset(a) for a in adj)

    # -- basic queries -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self._adj]

    def min_degree(self) -> int:
        return min((len(a) for a in self._adj), default=0)

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edge_id(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"({u}, {v}) is not an edge") from None

    def get_edge_id(self, u: int, v: int) -> int | None:
        return self._index.get((u, v) if u < v else (v, u))

    def edge(self, eid: int) -> tuple[int, int]:
        if not 0 <= eid < len(self.edges):
            raise KeyError(f"unknown edge id {eid}")
        return self.edges[eid]

    def incident_edges(self, v: int) -> list[int]:
        """Edge ids at ``v``, in increasing neighbour order."""
        return [self.edge_id(v, w) for w in sorted(self._adj[v])]

    # -- set statistics used by the property battery ----------------------

    def neighborhood(self, X: Iterable[int]) -> set[int]:
        out: set[int] = set()
        for x in X:
            out |= self._adj[x]
        return out

    def e_inside(self, X: Iterable[int]) -> int:
        Xs = set(X)
        return sum(len(self._adj[x] & Xs) for x in Xs) // 2

    def e_between(self, X: Iterable[int], Y: Iterable[int]) -> int:
        Ys = set(Y)
        return sum(len(self._adj[x] & Ys) for x in X)

    # -- conversions ----------------------------------------------------

    def adjacency_bitsets(self) -> list[int]:
        rows = []
        for a in self._adj:
            bits = 0
            for w in a:
                bits |= 1 << w
            rows.append(bits)
        return rows

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 2:
            raise ValueError("graph header must be 'n m'")
        n, m = int(rows[0][0]), int(rows[0][1])
        body = rows[1:]
        if len(body) != m:
            raise ValueError(f"header announces {m} edges, found {len(body)}")
        edges = []
        for lineno, row in enumerate(body, start=2):
            if len(row) != 2:
                raise ValueError(f"line {lineno}: expected 'u v'")
            u, v = int(row[0]), int(row[1])
            if u >= v:
                raise ValueError(f"line {lineno}: edges must be written with u < v")
            edges.append((u, v))
        if edges != sorted(edges) or len(set(edges)) != len(edges):
            raise ValueError("edges must be unique and listed in edge-id order")
        return cls(n, edges)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        g = cls(int(d["n"]), (tuple(e) for e in d["edges"]))
        if "m" in d and int(d["m"]) != g.m:
            raise ValueError(f"declared m={d['m']} but {g.m} distinct edges given")
        return g

    def save(self, path) -> None:
        path = str(path)
        with open(path, "w") as fh:
            if path.endswith(".json"):
                json.dump(self.to_dict(), fh)
            else:
                fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "Graph":
        path = str(path)
        with open(path) as fh:
            if path.endswith(".json"):
                return cls.from_dict(json.load(fh))
            return cls.from_text(fh.read())

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class Digraph:
    """Simple digraph on ``0..m-1``; arcs are ordered pairs without self-arcs."""

    __slots__ = ("m", "arcs", "_out", "_in")

    def __init__(self, m: int, arcs: Iterable[tuple[int, int]] = ()):
        out: list[set[int]] = [set() for _ in range(m)]
        inn: list[set[int]] = [set() for _ in range(m)]
        for i, j in arcs:
            if i == j:
                raise ValueError(f"self-arc at {i}")
            if not (0 <= i < m and 0 <= j < m):
                raise ValueError(f"arc ({i}, {j}) outside 0..{m - 1}")
            out[i].add(j)
            inn[j].add(i)
        self.m = m
        self.arcs = frozenset((i, j) for i in range(m) for j in out[i])
        self._out = tuple(frozenset(s) for s in out)
        self._in = tuple(frozenset(s) for s in inn)

    def out_neighbors(self, i: int) -> frozenset[int]:
        return self._out[i]

    def in_neighbors(self, i: int) -> frozenset[int]:
        return self._in[i]

    def out_degree(self, i: int) -> int:
        return len(self._out[i])

    def in_degree(self, i: int) -> int:
        return len(self._in[i])

    def has_arc(self, i: int, j: int) -> bool:
        return j in self._out[i]

    def __len__(self) -> int:
        return len(self.arcs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Digraph) and self.m == other.m and self.arcs == other.arcs

    def __hash__(self) -> int:
        return hash((self.m, self.arcs))

    def __repr__(self) -> str:
        return f"Digraph(m={self.m}, arcs={len(self.arcs)})"


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """Sample G(n, p): every pair independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if n < 2:
        return Graph(max(n, 0))
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < p
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def complete_graph(n: int) -> Graph:
    return Graph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def path_edges(vertices: Sequence[int], closed: bool = False) -> list[tuple[int, int]]:
    """Consecutive vertex pairs of a path (or of a cycle when ``closed``)."""
    pairs = list(zip(vertices, vertices[1:]))
    if closed and len(vertices) > 2:
        pairs.append((vertices[-1], vertices[0]))
    return pairs


def is_path(G: Graph, vertices: Sequence[int]) -> bool:
    return len(set(vertices)) == len(vertices) and all(
        G.has_edge(u, v) for u, v in path_edges(vertices)
    )

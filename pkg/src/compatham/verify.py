"""Brute-force-leaning oracles.

Nothing here shares code with the solvers beyond the graph and conflict
containers, so a solver bug cannot hide behind its own checker.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from itertools import permutations

from .conflicts import ConflictSystem, Mode
from .graph import Graph

MODES = ("hamiltonian_only", "compatible", "rainbow")


@dataclass
class Verdict:
    passed: bool
    violations: list[tuple[str, object]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def verify_cycle(G: Graph, S: ConflictSystem | None, C: Sequence[int], mode: str = "compatible") -> Verdict:
    """Check that ``C`` (vertex order, first vertex not repeated) is a
    Hamilton cycle of ``G`` and, depending on ``mode``, compatible with ``S``
    at every vertex or rainbow under ``S``'s colouring."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode != "hamiltonian_only" and S is None:
        raise ValueError(f"mode {mode!r} needs a conflict system")
    if mode == "rainbow" and S.mode is not Mode.GLOBAL:
        raise ValueError("rainbow verification needs a GLOBAL colouring")

    bad: list[tuple[str, object]] = []
    cyc = list(C)
    if G.n < 3:
        bad.append(("too_small", G.n))
    seen = set()
    for v in cyc:
        if not (isinstance(v, int) and 0 <= v < G.n):
            bad.append(("bad_vertex", v))
        elif v in seen:
            bad.append(("repeated_vertex", v))
        seen.add(v)
    for v in range(G.n):
        if v not in seen:
            bad.append(("missing_vertex", v))
    if len(cyc) < 3:
        bad.append(("length", len(cyc)))
        return Verdict(False, bad)

    k = len(cyc)
    eids: list[int | None] = []
    for i in range(k):
        u, v = cyc[i], cyc[(i + 1) % k]
        eid = G.get_edge_id(u, v) if u != v and 0 <= u < G.n and 0 <= v < G.n else None
        if eid is None:
            bad.append(("non_edge", (u, v)))
        eids.append(eid)

    if mode == "compatible":
        # edge i runs cyc[i] -> cyc[i+1]; edges i-1 and i meet at cyc[i]
        for i in range(k):
            e, f = eids[i - 1], eids[i]
            if e is None or f is None or e == f:
                continue
            if not S.is_compatible_pair(e, f):
                bad.append(("conflict", (cyc[i], e, f)))
    elif mode == "rainbow":
        first_use: dict[int, int] = {}
        for e in eids:
            if e is None:
                continue
            c = S.color(e)
            if c in first_use:
                bad.append(("repeated_color", c))
            else:
                first_use[c] = e
    return Verdict(not bad, bad)


def _spanning_path_endpoints(V: Sequence[int], adj: dict[int, set[int]]) -> set[frozenset[int]]:
    # plain DFS over every simple path; exponential by design
    Vs = set(V)
    n = len(Vs)
    found: set[frozenset[int]] = set()

    def extend(path: list[int], used: set[int]) -> None:
        if len(path) == n:
            found.add(frozenset((path[0], path[-1])))
            return
        for w in adj.get(path[-1], ()):
            if w in Vs and w not in used:
                used.add(w)
                path.append(w)
                extend(path, used)
                path.pop()
                used.discard(w)

    for s in Vs:
        extend([s], {s})
    return found


BOOSTER_ORACLE_CAP = 10


def brute_force_boosters(P: Sequence[int], R: Graph, host: Graph) -> set[frozenset[int]]:
    """Host edges {v, w} such that P u R has a path on exactly V(P) from v to w."""
    if len(P) > BOOSTER_ORACLE_CAP:
        raise ValueError(f"brute-force booster search is capped at {BOOSTER_ORACLE_CAP} path vertices")
    if len(P) < 2:
        return set()
    adj: dict[int, set[int]] = {v: set() for v in P}
    for u, v in zip(P, P[1:]):
        adj[u].add(v)
        adj[v].add(u)
    for u, v in R.edges:
        if u in adj and v in adj:
            adj[u].add(v)
            adj[v].add(u)
    ends = _spanning_path_endpoints(P, adj)
    return {pair for pair in ends if host.has_edge(*tuple(pair))}


BRUTE_HAMILTON_CAP = 12


def brute_force_hamilton(G: Graph, S: ConflictSystem | None = None, mode: str = "compatible") -> list[int] | None:
    """Exhaustive Hamilton-cycle search; ``None`` certifies that none exists."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if G.n > BRUTE_HAMILTON_CAP:
        raise ValueError(f"brute-force Hamilton search is capped at n={BRUTE_HAMILTON_CAP}")
    n = G.n
    if n < 3:
        return None
    use_s = mode != "hamiltonian_only"
    if use_s and S is None:
        raise ValueError(f"mode {mode!r} needs a conflict system")
    rainbow = mode == "rainbow"
    if rainbow and S.mode is not Mode.GLOBAL:
        raise ValueError("rainbow search needs a GLOBAL colouring")

    def ok_pair(e: int, f: int) -> bool:
        return not use_s or rainbow or S.is_compatible_pair(e, f)

    path = [0]
    eids: list[int] = []
    used = [False] * n
    used[0] = True
    colors: set[int] = set()

    def close() -> bool:
        last = G.get_edge_id(path[-1], path[0])
        if last is None:
            return False
        if rainbow and S.color(last) in colors:
            return False
        return ok_pair(eids[-1], last) and ok_pair(last, eids[0])

    def extend() -> bool:
        if len(path) == n:
            return close()
        u = path[-1]
        for w in sorted(G.neighbors(u)):
            if used[w]:
                continue
            # fix orientation: the second vertex is smaller than the last one
            if len(path) == n - 1 and n > 2 and path[1] > w:
                continue
            e = G.edge_id(u, w)
            if eids and not ok_pair(eids[-1], e):
                continue
            if rainbow:
                c = S.color(e)
                if c in colors:
                    continue
                colors.add(c)
            used[w] = True
            path.append(w)
            eids.append(e)
            if extend():
                return True
            eids.pop()
            path.pop()
            used[w] = False
            if rainbow:
                colors.discard(S.color(e))
        return False

    return list(path) if extend() else None


def all_simple_cycles_through_all(G: Graph) -> list[tuple[int, ...]]:
    """Every Hamilton cycle of a tiny graph, one rotation/orientation each."""
    n = G.n
    out = []
    if n < 3:
        return out
    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        cyc = (0, *perm)
        if all(G.has_edge(cyc[i], cyc[(i + 1) % n]) for i in range(n)):
            out.append(cyc)
    return out


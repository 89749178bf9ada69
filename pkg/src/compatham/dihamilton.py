"""Directed Hamilton cycles: exact search for small digraphs, cycle-cover
patching for large ones."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .graph import Digraph
from .matching import max_bipartite_matching


@dataclass(frozen=True)
class DirectedLimits:
    exact_cap: int = 25
    time_limit: float = 30.0
    restarts: int = 50
    seed: int = 0


@dataclass
class DirectedResult:
    cycle: list[int] | None
    certified: bool  # a None cycle is a proof of non-existence
    method: str
    nodes: int = 0
    restarts: int = 0

    @property
    def found(self) -> bool:
        return self.cycle is not None


def is_directed_hamilton_cycle(D: Digraph, cycle) -> bool:
    c = list(cycle)
    if sorted(c) != list(range(D.m)) or D.m < 2:
        return False
    return all(D.has_arc(c[i], c[(i + 1) % len(c)]) for i in range(len(c)))


def _strongly_connected(D: Digraph) -> bool:
    def reach(nbrs) -> int:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in nbrs(u):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen)

    return reach(D.out_neighbors) == D.m and reach(D.in_neighbors) == D.m


class _Timeout(Exception):
    pass


def _exact(D: Digraph, deadline: float) -> tuple[list[int] | None, int]:
    m = D.m
    out_bits = [0] * m
    in_bits = [0] * m
    for i, j in D.arcs:
        out_bits[i] |= 1 << j
        in_bits[j] |= 1 << i
    full = (1 << m) - 1
    failed: set[tuple[int, int]] = set()
    path = [0]
    nodes = 0

    def ok(mask: int, end: int) -> bool:
        # every unvisited vertex still needs a way in and a way out
        free = full & ~mask
        sources = free | (1 << end)
        sinks = free | 1
        f = free
        while f:
            low = f & -f
            v = low.bit_length() - 1
            if not in_bits[v] & sources & ~low or not out_bits[v] & sinks & ~low:
                return False
            f ^= low
        return True

    def dfs(mask: int, end: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes & 1023 == 0 and time.perf_counter() > deadline:
            raise _Timeout
        if mask == full:
            return bool(out_bits[end] & 1)
        if (mask, end) in failed or not ok(mask, end):
            return False
        cand = out_bits[end] & ~mask
        while cand:
            low = cand & -cand
            w = low.bit_length() - 1
            path.append(w)
            if dfs(mask | low, w):
                return True
            path.pop()
            cand ^= low
        failed.add((mask, end))
        return False

    found = dfs(1, 0)
    return (list(path) if found else None), nodes


def _cycle_cover(D: Digraph, rng) -> list[int] | None:
    # successor map from a perfect matching out-copy -> in-copy, random order
    order = rng.permutation(D.m).tolist()
    rank = {v: r for r, v in enumerate(order)}
    adj = {}
    for i in range(D.m):
        nb = sorted(D.out_neighbors(i), key=lambda j: (rank[j], j))
        adj[rank[i]] = [rank[j] for j in nb]
    mr = max_bipartite_matching(range(D.m), adj)
    if len(mr) < D.m:
        return None
    succ = [0] * D.m
    for right, left in mr.items():
        succ[order[left]] = order[right]
    return succ


def _patch(D: Digraph, succ: list[int]) -> bool:
    """Merge cycles through arc exchanges u->v, x->y  =>  u->y, x->v."""
    m = D.m
    while True:
        cyc_of = [-1] * m
        cycles = 0
        for s in range(m):
            if cyc_of[s] < 0:
                v = s
                while cyc_of[v] < 0:
                    cyc_of[v] = cycles
                    v = succ[v]
                cycles += 1
        if cycles == 1:
            return True
        pred = [0] * m
        for u in range(m):
            pred[succ[u]] = u
        merged = False
        for u in range(m):
            v = succ[u]
            for y in D.out_neighbors(u):
                if cyc_of[y] == cyc_of[u]:
                    continue
                x = pred[y]
                if D.has_arc(x, v):
                    succ[u], succ[x] = y, v
                    merged = True
                    break
            if merged:
                break
        if not merged:
            return False


def directed_hamilton(D: Digraph, limits: DirectedLimits = DirectedLimits()) -> DirectedResult:
    """Directed Hamilton cycle of D, starting at element 0.

    Exact search (memoised DFS with in/out feasibility pruning) when
    D.m <= exact_cap; its negative answer is a certificate. Otherwise seeded
    random cycle covers are patched into one cycle.
    """
    m = D.m
    if m < 2:
        raise ValueError("directed_hamilton needs at least 2 vertices")
    deadline = time.perf_counter() + limits.time_limit
    if any(D.out_degree(i) == 0 or D.in_degree(i) == 0 for i in range(m)) or not _strongly_connected(D):
        return DirectedResult(None, True, "precheck")
    if m <= limits.exact_cap:
        try:
            cyc, nodes = _exact(D, deadline)
        except _Timeout:
            return DirectedResult(None, False, "exact-timeout")
        return DirectedResult(cyc, True, "exact", nodes)
    ss = np.random.SeedSequence(limits.seed).spawn(limits.restarts)
    for r, s in enumerate(ss):
        if time.perf_counter() > deadline:
            return DirectedResult(None, False, "patching-timeout", restarts=r)
        succ = _cycle_cover(D, np.random.default_rng(s))
        if succ is None:
            # no cycle cover at all: certainly no Hamilton cycle
            return DirectedResult(None, True, "no-cycle-cover", restarts=r)
        if _patch(D, succ):
            cyc = [0]
            while succ[cyc[-1]] != 0:
                cyc.append(succ[cyc[-1]])
            return DirectedResult(cyc, False, "patching", restarts=r)
    return DirectedResult(None, False, "patching", restarts=limits.restarts)

"""Rotation-extension: boosters, rotation closures and the booster-filtering
Hamilton-cycle loop for conflict systems.

Paths are vertex lists. Rotations run inside the graph P u R: with the
start fixed and end x adjacent to P[i], the path
P[0..i] + reversed(P[i+1..]) ends at P[i+1].
"""

from __future__ import annotations

import time
from collections import deque
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from .conflicts import ConflictSystem, Mode
from .expander import (
    BUDGET_EXCEEDED,
    DOutParams,
    ExpanderParams,
    build_compatible_expander,
)
from .graph import Graph
from .verify import verify_cycle


def _union_adj(P: Sequence[int], R: Graph) -> dict[int, set[int]]:
    # edges of P u R with both ends on V(P)
    adj: dict[int, set[int]] = {v: set() for v in P}
    for u, v in zip(P, P[1:]):
        adj[u].add(v)
        adj[v].add(u)
    for v in P:
        if v < R.n:
            adj[v].update(w for w in R.neighbors(v) if w in adj)
    return adj


def _rotate(path: list[int], i: int) -> list[int]:
    return path[: i + 1] + path[:i:-1]


def _posa_closure(path: list[int], adj, *, counter: list[int] | None = None) -> dict[int, list[int]]:
    """One path per reachable end, start ``path[0]`` fixed; BFS, lowest id first."""
    found = {path[-1]: path}
    queue = deque([path])
    while queue:
        Q = queue.popleft()
        pos = {v: i for i, v in enumerate(Q)}
        x = Q[-1]
        for y in sorted(adj[x]):
            i = pos[y]
            if i >= len(Q) - 2:
                continue
            z = Q[i + 1]
            if z in found:
                continue
            if counter is not None:
                counter[0] += 1
            new = _rotate(Q, i)
            found[z] = new
            queue.append(new)
    return found


def _exhaustive_closure(path: list[int], adj, max_states: int) -> dict[int, list[int]]:
    # BFS over distinct path states; the first path found per end is kept
    found = {path[-1]: path}
    seen = {tuple(path)}
    queue = deque([path])
    while queue:
        Q = queue.popleft()
        pos = {v: i for i, v in enumerate(Q)}
        for y in sorted(adj[Q[-1]]):
            i = pos[y]
            if i >= len(Q) - 2:
                continue
            new = _rotate(Q, i)
            t = tuple(new)
            if t in seen:
                continue
            if len(seen) >= max_states:
                raise RuntimeError(f"rotation closure exceeded {max_states} path states")
            seen.add(t)
            found.setdefault(new[-1], new)
            queue.append(new)
    return found


def _oriented(P: Sequence[int], fixed: int) -> list[int]:
    P = list(P)
    if P and P[0] == fixed:
        return P
    if P and P[-1] == fixed:
        return P[::-1]
    raise ValueError(f"{fixed} is not an endpoint of the path")


def rotate_reachable_ends(
    P: Sequence[int],
    R: Graph,
    fixed: int,
    *,
    exhaustive: bool = True,
    max_states: int = 1_000_000,
) -> set[int]:
    """Ends reachable from P by elementary rotations keeping ``fixed``.

    ``exhaustive`` walks every distinct path state, which is the true
    fixpoint; otherwise each end is expanded once (the classical closure,
    a subset of the former and much cheaper).
    """
    path = _oriented(P, fixed)
    if len(path) == 1:
        return {path[0]}
    adj = _union_adj(path, R)
    if exhaustive:
        return set(_exhaustive_closure(path, adj, max_states))
    return set(_posa_closure(path, adj))


def _dp_spanning_paths(V: list[int], adj) -> tuple[list[list[int]], int]:
    # dp[mask][j] = bitset of starts s with a path s..V[j] on exactly mask
    k = len(V)
    idx = {v: j for j, v in enumerate(V)}
    nb = [0] * k
    for j, v in enumerate(V):
        for w in adj[v]:
            nb[j] |= 1 << idx[w]
    full = (1 << k) - 1
    dp = [[0] * k for _ in range(1 << k)]
    for j in range(k):
        dp[1 << j][j] = 1 << j
    for mask in range(1, full + 1):
        row = dp[mask]
        for j in range(k):
            starts = row[j]
            if not starts:
                continue
            free = nb[j] & ~mask
            while free:
                low = free & -free
                w = low.bit_length() - 1
                dp[mask | low][w] |= starts
                free ^= low
    return dp, nb


def _dp_witness(V: list[int], dp, nb, s: int, t: int) -> list[int]:
    k = len(V)
    mask = (1 << k) - 1
    out = [t]
    cur = t
    while mask != 1 << s:
        prev_mask = mask & ~(1 << cur)
        cand = nb[cur] & prev_mask
        while cand:
            low = cand & -cand
            u = low.bit_length() - 1
            if dp[prev_mask][u] >> s & 1:
                break
            cand ^= low
        else:
            raise AssertionError("broken DP table")
        out.append(u)
        mask, cur = prev_mask, u
    return [V[j] for j in reversed(out)]


def find_boosters_with_witnesses(
    P: Sequence[int], R: Graph, host: Graph, *, exact_limit: int = 12
) -> dict[frozenset[int], list[int]]:
    """Boosters of P mapped to a spanning path of V(P) in P u R between them.

    Exact (subset DP) when |V(P)| <= ``exact_limit``. Larger paths use the
    two-level rotation closure, which returns a subset of the boosters.
    """
    P = list(P)
    if len(P) < 3:
        raise ValueError("booster search needs a path on at least 3 vertices")
    if len(set(P)) != len(P):
        raise ValueError("path repeats a vertex")
    adj = _union_adj(P, R)
    out: dict[frozenset[int], list[int]] = {}
    if len(P) <= exact_limit:
        V = sorted(P)
        dp, nb = _dp_spanning_paths(V, adj)
        last = dp[(1 << len(V)) - 1]
        for t in range(len(V)):
            for s in range(t):
                if last[t] >> s & 1 and host.has_edge(V[s], V[t]):
                    out[frozenset((V[s], V[t]))] = _dp_witness(V, dp, nb, s, t)
        return out
    for pair, path in _closure_pairs(P, adj):
        if pair not in out and host.has_edge(*pair):
            out[pair] = path
    return out


def find_boosters(P: Sequence[int], R: Graph, host: Graph, *, exact_limit: int = 12) -> set[frozenset[int]]:
    return set(find_boosters_with_witnesses(P, R, host, exact_limit=exact_limit))


def _closure_pairs(P: list[int], adj, counter: list[int] | None = None) -> Iterator[tuple[frozenset[int], list[int]]]:
    # level 1 fixes P[0]; level 2 fixes each level-1 end in turn
    first = _posa_closure(P, adj, counter=counter)
    for x in first:
        back = first[x][::-1]
        for y, path in _posa_closure(back, adj, counter=counter).items():
            if y != x:
                yield frozenset((x, y)), path


# -- solver -------------------------------------------------------------------


@dataclass(frozen=True)
class SolveLimits:
    time_limit: float = 60.0
    max_restarts: int = 5
    # node budget for certifying each R; certification is diagnostic here
    cert_budget: int = 20_000
    max_iterations: int | None = None
    # on a stall, add host edges compatible with P u R at the rotation ends
    augment: bool = True


@dataclass
class SolveReport:
    cycle: list[int] | None
    reason: str = ""
    stage: str = ""
    rotations: int = 0
    boosters_enumerated: int = 0
    boosters_rejected: int = 0
    restarts: int = 0
    augmented: int = 0
    elapsed: float = 0.0
    # one list of |V(P)| values per R attempt
    path_lengths: list[list[int]] = field(default_factory=list)
    certificates: list[str] = field(default_factory=list)
    verdict: object = None
    # pipeline-specific diagnostics (matching, trace, typicality, ...)
    extra: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.cycle is not None


class _Stall(Exception):
    pass


class _Timeout(Exception):
    pass


class _Compat:
    """Incremental 'compatible with every edge of W' test."""

    def __init__(self, S: ConflictSystem, G: Graph, ids: set[int]):
        self.S, self.G, self.ids = S, G, set(ids)
        self.used = {S.color(f) for f in ids} if S.mode is Mode.GLOBAL else None

    def __call__(self, e: int) -> bool:
        if e in self.ids:
            return True
        if self.used is not None:
            return self.S.color(e) not in self.used
        for v in self.G.edges[e]:
            bad = self.S.conflicts_at(v, e)
            if bad and not bad.isdisjoint(self.ids):
                return False
        return True

    def add(self, e: int) -> None:
        self.ids.add(e)
        if self.used is not None:
            self.used.add(self.S.color(e))


class _GrowingGraph:
    def __init__(self, R: Graph):
        self.n = R.n
        self.adj = [set(R.neighbors(v)) for v in range(R.n)]

    def neighbors(self, v: int) -> set[int]:
        return self.adj[v]

    def add(self, u: int, v: int) -> None:
        self.adj[u].add(v)
        self.adj[v].add(u)


class _State:
    """P together with the edge set W = E(P) u E(R), kept compatible."""

    def __init__(self, G: Graph, S: ConflictSystem, R: Graph):
        self.G, self.S = G, S
        self.R = _GrowingGraph(R)
        self.r_ids = {G.edge_id(u, v) for u, v in R.edges}
        self.path: list[int] = []
        self.on_path = [False] * G.n

    def w_ids(self) -> set[int]:
        G, P = self.G, self.path
        ids = set(self.r_ids)
        ids.update(G.edge_id(u, v) for u, v in zip(P, P[1:]))
        return ids

    def checker(self, ids: set[int]) -> _Compat:
        return _Compat(self.S, self.G, ids)

    def set_path(self, path: list[int]) -> None:
        for v in self.path:
            self.on_path[v] = False
        self.path = list(path)
        for v in self.path:
            self.on_path[v] = True


def _augment(st: _State, counter: list[int]) -> int:
    """Add to R every host edge at a rotation end that is compatible with
    all of W; returns how many were added."""
    P, G = st.path, st.G
    adj = _union_adj(P, st.R)
    ends: set[int] = set()
    for Q in (P, P[::-1]):
        ends.update(_posa_closure(Q, adj, counter=counter))
    ok = st.checker(st.w_ids())
    added = 0
    for x in sorted(ends):
        for w in sorted(G.neighbors(x)):
            if w in st.R.adj[x]:
                continue
            f = G.edge_id(x, w)
            if ok(f):
                ok.add(f)
                st.r_ids.add(f)
                st.R.add(x, w)
                added += 1
    return added


def _extend_by_r(st: _State, counter: list[int], deadline: float) -> bool:
    """Grow P along R-edges, rotating when both ends are stuck; True if grown."""
    R = st.R
    grown = False
    while True:
        if time.perf_counter() > deadline:
            raise _Timeout
        P = st.path
        step = None
        for end_first in (False, True):
            Q = P[::-1] if end_first else P
            x = Q[-1]
            out = sorted(w for w in R.neighbors(x) if not st.on_path[w])
            if out:
                step = Q + [out[0]]
                break
        if step is None and len(P) >= 3:
            adj = _union_adj(P, R)
            for Q0 in (P, P[::-1]):
                for x, Q in sorted(_posa_closure(Q0, adj, counter=counter).items()):
                    out = sorted(w for w in R.neighbors(x) if not st.on_path[w])
                    if out:
                        step = Q + [out[0]]
                        break
                if step is not None:
                    break
        if step is None:
            return grown
        st.set_path(step)
        grown = True


def _close_cycle(st: _State, counter: list[int], deadline: float, report: SolveReport) -> list[int]:
    """A cycle on V(P) through a booster compatible with W."""
    P, G = st.path, st.G
    ok = st.checker(st.w_ids())
    adj = _union_adj(P, st.R)
    first = _posa_closure(P, adj, counter=counter)
    for x in first:
        back = first[x][::-1]
        for y, path in _posa_closure(back, adj, counter=counter).items():
            if time.perf_counter() > deadline:
                raise _Timeout
            if y == x:
                continue
            e = G.get_edge_id(x, y)
            if e is None:
                continue
            report.boosters_enumerated += 1
            if not ok(e):
                report.boosters_rejected += 1
                continue
            return path
    raise _Stall


def _open_cycle(st: _State, cycle: list[int]) -> list[int] | None:
    """Open the cycle at a vertex with an R-edge (else a compatible G-edge) leaving it."""
    G, R = st.G, st.R
    for i, u in enumerate(cycle):
        out = sorted(w for w in R.neighbors(u) if not st.on_path[w])
        if out:
            return [out[0]] + cycle[i:] + cycle[:i]
    # fallback: a host edge compatible with everything kept so far
    ids = st.w_ids()
    ids.add(G.edge_id(cycle[0], cycle[-1]))
    ok = st.checker(ids)
    for i, u in enumerate(cycle):
        for w in sorted(G.neighbors(u)):
            if not st.on_path[w] and ok(G.edge_id(u, w)):
                return [w] + cycle[i:] + cycle[:i]
    return None


def solve_constrained(
    G: Graph,
    S: ConflictSystem,
    dp: DOutParams = DOutParams(),
    limits: SolveLimits = SolveLimits(),
) -> SolveReport:
    """Hamilton cycle of G compatible with S (rainbow when S is GLOBAL).

    Keeps a path P with P u R compatible, grows it with R-edges and
    rotations, closes it with a booster that is compatible with every edge
    of P u R and reopens the cycle towards an uncovered vertex. A stall
    rebuilds R from a fresh sub-seed. Failure proves nothing.
    """
    if G.n < 3:
        raise ValueError("solve_constrained needs n >= 3")
    t0 = time.perf_counter()
    deadline = t0 + limits.time_limit
    report = SolveReport(None)
    counter = [0]
    mode = "rainbow" if S.mode is Mode.GLOBAL else "compatible"

    def finish(reason: str, stage: str) -> SolveReport:
        report.reason, report.stage = reason, stage
        report.rotations = counter[0]
        report.elapsed = time.perf_counter() - t0
        return report

    if G.min_degree() < 2:
        return finish("vertex of degree < 2", "input")
    seeds = np.random.SeedSequence(dp.seed).generate_state(limits.max_restarts + 1)
    ep = ExpanderParams(enumeration_budget=limits.cert_budget)
    last = ("no attempt", "expander")
    for attempt in range(limits.max_restarts + 1):
        report.restarts = attempt
        if time.perf_counter() > deadline:
            return finish("time limit", "time")
        sub = DOutParams(d=dp.d, max_retries=dp.max_retries, seed=int(seeds[attempt]),
                         resample_factor=dp.resample_factor)
        build = build_compatible_expander(G, S, sub, ep, strict=False, deadline=deadline, drop_on_stall=True)
        if not build.ok:
            report.certificates.append("no compatible R")
            last = ("no compatible R: " + build.reason, "expander")
            continue
        report.certificates.append(build.certificate.status if build.certificate else BUDGET_EXCEEDED)
        st = _State(G, S, build.graph)
        st.set_path([0])
        lengths: list[int] = []
        report.path_lengths.append(lengths)
        iterations = 0
        try:
            while True:
                iterations += 1
                if limits.max_iterations is not None and iterations > limits.max_iterations:
                    raise _Stall
                _extend_by_r(st, counter, deadline)
                lengths.append(len(st.path))
                if len(st.path) < 3:
                    raise _Stall
                try:
                    cycle = _close_cycle(st, counter, deadline, report)
                except _Stall:
                    if not limits.augment:
                        raise
                    added = _augment(st, counter)
                    report.augmented += added
                    if not added:
                        raise
                    continue
                if len(cycle) == G.n:
                    verdict = verify_cycle(G, S, cycle, mode)
                    report.verdict = verdict
                    if not verdict.passed:
                        # never report an unverified cycle
                        raise _Stall
                    report.cycle = cycle
                    return finish("", "done")
                nxt = _open_cycle(st, cycle)
                if nxt is None:
                    raise _Stall
                st.set_path(nxt)
        except _Timeout:
            return finish("time limit", "time")
        except _Stall:
            last = (f"stalled at |P|={len(st.path)}", "boosters")
    return finish("restarts exhausted; " + last[0], last[1])

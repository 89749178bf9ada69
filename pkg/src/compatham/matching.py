"""Nibble perfect matching and the matching-to-digraph reduction.

A perfect matching M = {(a_i, b_i)} of G gives a digraph on the matching
elements with an arc i -> j iff {b_i, a_j} is an edge. A directed Hamilton
cycle (i_1, ..., i_m) lifts to the cycle a_{i_1} b_{i_1} a_{i_2} ... of G.
Pruning arcs whose linking edge conflicts with the matching edges it meets
makes the lifted cycle compatible. For odd n one element is the path
(a_k, v*, b_k).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .conflicts import ConflictSystem, Mode
from .graph import Digraph, Graph

PAPER = "paper"
DESK = "desk"
# above this many rounds PAPER-mode parameters are refused
MAX_ROUNDS = 1_000_000


class InfeasibleParams(ValueError):
    pass


class NibbleFailure(RuntimeError):
    def __init__(self, message: str, trace: "NibbleTrace | None" = None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class PerfectMatching:
    """``pairs`` are (a, b) with a in A, b in B; the odd triple (a_k, v*, b_k)
    is stored apart and counts as the last matching element."""

    A: tuple[int, ...]
    B: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    odd_triple: tuple[int, int, int] | None = None

    @property
    def v_star(self) -> int | None:
        return None if self.odd_triple is None else self.odd_triple[1]

    def elements(self) -> list[tuple[int, int]]:
        out = list(self.pairs)
        if self.odd_triple is not None:
            out.append((self.odd_triple[0], self.odd_triple[2]))
        return out

    def __len__(self) -> int:
        return len(self.pairs) + (self.odd_triple is not None)

    def edge_at_a(self, i: int) -> tuple[int, int]:
        """Matching edge meeting a_i (for the triple element: {a_k, v*})."""
        if self.odd_triple is not None and i == len(self.pairs):
            return self.odd_triple[0], self.odd_triple[1]
        return self.pairs[i]

    def edge_at_b(self, i: int) -> tuple[int, int]:
        if self.odd_triple is not None and i == len(self.pairs):
            return self.odd_triple[1], self.odd_triple[2]
        return self.pairs[i]

    def problems(self, G: Graph) -> list[str]:
        bad = []
        seen: list[int] = []
        for a, b in self.pairs:
            seen += [a, b]
            if not G.has_edge(a, b):
                bad.append(f"pair ({a}, {b}) is not an edge")
        if self.odd_triple is not None:
            a, v, b = self.odd_triple
            seen += [a, v, b]
            if not G.has_edge(a, v) or not G.has_edge(v, b):
                bad.append(f"triple {self.odd_triple} is not a path")
        if (G.n % 2 == 1) != (self.odd_triple is not None):
            bad.append("odd triple present iff n is odd")
        if len(seen) != len(set(seen)):
            bad.append("matching elements overlap")
        if sorted(seen) != list(range(G.n)):
            bad.append("matching does not cover every vertex")
        return bad

    def is_valid(self, G: Graph) -> bool:
        return not self.problems(G)

    @classmethod
    def from_elements(cls, n: int, elements: Sequence[tuple[int, int]], v_star: int | None = None) -> "PerfectMatching":
        """Build from (a_i, b_i) pairs; with ``v_star`` the last pair becomes the triple."""
        elements = [tuple(e) for e in elements]
        if v_star is None:
            pairs, triple = elements, None
        else:
            a, b = elements[-1]
            pairs, triple = elements[:-1], (a, v_star, b)
        A = tuple(a for a, _ in elements) + (() if v_star is None else (v_star,))
        B = tuple(b for _, b in elements)
        return cls(A, B, tuple(pairs), triple)


@dataclass(frozen=True)
class NibbleParams:
    mode: str = DESK
    epsilon: float = 0.4
    delta: float = 0.05
    rounds: int | None = None  # None: ceil(ln(4/eps) / -ln(1-delta))
    seed: int = 0
    restart_cap: int = 10
    # final matching pool: "host" uses crossing G-edges among the leftover
    # vertices, "sample" only the sampled graph H_T
    final_pool: str = "host"

    def __post_init__(self):
        if self.mode not in (PAPER, DESK):
            raise ValueError(f"mode must be {PAPER!r} or {DESK!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.mode == DESK and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.final_pool not in ("host", "sample"):
            raise ValueError("final_pool must be 'host' or 'sample'")

    def resolve(self) -> tuple[float, int]:
        """(delta, T). PAPER mode derives both from epsilon and refuses
        values no computer can run."""
        eps = self.epsilon
        if self.mode == PAPER:
            delta = paper_delta(eps)
            t = paper_rounds(eps, delta)
            if not (delta > 0 and t <= MAX_ROUNDS):
                raise InfeasibleParams(
                    f"PAPER mode with epsilon={eps}: delta = exp(-22/eps * ln(1/eps)) = {delta:.3e} "
                    f"needs T = {t:.3e} rounds; use mode='desk' with an explicit delta and rounds"
                )
            return delta, max(1, math.ceil(t))
        if self.rounds is not None:
            return self.delta, self.rounds
        return self.delta, max(1, math.ceil(paper_rounds(eps, self.delta)))


def paper_delta(eps: float) -> float:
    return math.exp(-22.0 / eps * math.log(1.0 / eps))


def paper_rounds(eps: float, delta: float) -> float:
    if delta <= 0:
        return math.inf
    return math.log(4.0 / eps) / -math.log1p(-delta)


def xi(delta: float, eps: float, i: int) -> float:
    return delta * (1.0 + 21.0 / eps * delta) ** i


@dataclass
class RoundRecord:
    iteration: int
    n_i: int
    m_i: int
    chosen: int  # |M_i^(0)|
    kept: int  # |M_i|
    discarded: int  # |M_i^(1)|
    min_deg: int
    max_deg: int


@dataclass
class NibbleTrace:
    n: int
    n0: int
    epsilon: float
    delta: float
    rounds: int
    q_factor: float  # eps / 4, the H sampling rate
    restarts: int = 0
    records: list[RoundRecord] = field(default_factory=list)
    # per round the vertex sets A_i, B_i and the matchings M_i; index T holds A_T, B_T
    A_sets: list[list[int]] = field(default_factory=list)
    B_sets: list[list[int]] = field(default_factory=list)
    M_sets: list[list[tuple[int, int]]] = field(default_factory=list)
    H_edges: list[tuple[int, int]] = field(default_factory=list)
    final_pool: str = "host"
    final_size: int = 0  # vertices per side entering the last step
    final_pool_edges: int = 0
    final_matched: int = 0
    failures: list[str] = field(default_factory=list)

    HEADER = ("iteration", "n_i", "m_i", "chosen", "kept", "discarded", "min_deg", "max_deg")

    def rows(self) -> list[tuple]:
        return [
            (r.iteration, r.n_i, r.m_i, r.chosen, r.kept, r.discarded, r.min_deg, r.max_deg)
            for r in self.records
        ]


def max_bipartite_matching(left: Sequence[int], adj: dict[int, Sequence[int]]) -> dict[int, int]:
    """Kuhn's augmenting paths, left vertices and neighbours in increasing id
    order. Returns right -> left."""
    match_r: dict[int, int] = {}
    match_l: dict[int, int] = {}
    for u in sorted(left):
        seen: set[int] = set()
        parent: dict[int, int] = {}
        stack = [iter(sorted(adj.get(u, ())))]
        owners = [u]
        found = None
        # iterative DFS over alternating paths
        while stack and found is None:
            for y in stack[-1]:
                if y in seen:
                    continue
                seen.add(y)
                parent[y] = owners[-1]
                if y not in match_r:
                    found = y
                else:
                    z = match_r[y]
                    owners.append(z)
                    stack.append(iter(sorted(adj.get(z, ()))))
                break
            else:
                stack.pop()
                owners.pop()
        y = found
        while y is not None:
            x = parent[y]
            old = match_l.get(x)
            match_r[y] = x
            match_l[x] = y
            y = None if x == u else old
    return match_r


def _final_step(G, S, A_T, B_T, pool_adj, odd: bool):
    """Odd triple (if any) then a perfect matching of the rest; None on failure."""
    triples = [None]
    if odd:
        triples = []
        inA = set(A_T)
        for v in sorted(A_T):
            for a in sorted(w for w in G.neighbors(v) if w in inA):
                e1 = G.edge_id(a, v)
                for b in sorted(B_T):
                    if b not in pool_adj.get(v, ()):
                        continue
                    if S.is_compatible_pair(e1, G.edge_id(v, b)):
                        triples.append((a, v, b))
    tried = 0
    for tri in triples:
        tried += 1
        if tried > 2000:
            break
        used = set(tri) if tri else set()
        left = [a for a in A_T if a not in used]
        right = {b for b in B_T if b not in used}
        adj = {a: [b for b in pool_adj.get(a, ()) if b in right] for a in left}
        mr = max_bipartite_matching(left, adj)
        if len(mr) == len(left) == len(right):
            return tri, sorted((a, b) for b, a in mr.items()), len(mr)
        if not odd:
            return None, None, len(mr)
    return None, None, 0


def nibble_matching(G: Graph, S: ConflictSystem, params: NibbleParams = NibbleParams()) -> tuple[PerfectMatching, NibbleTrace]:
    """Semi-random perfect matching Phi(G).

    Uniform bisection A u B (odd n: |A| = |B| + 1), sampled crossing graph H
    at rate eps/4, T nibble rounds each picking every edge of H_i with
    probability delta n_i / m_i and keeping the isolated picks, then a
    deterministic augmenting-path matching on what is left. Restarts with a
    fresh sub-seed on failure. Raises NibbleFailure when all restarts fail.
    """
    n = G.n
    if n < 4:
        raise ValueError("nibble_matching needs n >= 4")
    delta, T = params.resolve()
    eps = params.epsilon
    seeds = np.random.SeedSequence(params.seed).spawn(params.restart_cap + 1)
    edges = np.array(G.edges, dtype=np.int64).reshape(-1, 2)
    failures: list[str] = []
    trace = None
    for restart, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        perm = rng.permutation(n)
        half = (n + 1) // 2
        side = np.zeros(n, dtype=bool)  # True on A
        side[perm[:half]] = True
        n0 = n // 2
        trace = NibbleTrace(n, n0, eps, delta, T, eps / 4, restart, final_pool=params.final_pool)
        trace.failures = list(failures)
        crossing = edges[side[edges[:, 0]] != side[edges[:, 1]]]
        keep = rng.random(len(crossing)) < eps / 4
        h = crossing[keep]
        # orient every H edge as (a, b)
        a_first = side[h[:, 0]]
        h = np.where(a_first[:, None], h, h[:, ::-1])
        trace.H_edges = [tuple(map(int, e)) for e in h]
        alive = np.ones(n, dtype=bool)
        hi = h
        for i in range(T):
            hi = hi[alive[hi[:, 0]] & alive[hi[:, 1]]]
            A_i = np.flatnonzero(alive & side)
            B_i = np.flatnonzero(alive & ~side)
            trace.A_sets.append(A_i.tolist())
            trace.B_sets.append(B_i.tolist())
            n_i = len(B_i)
            m_i = len(hi)
            deg = np.bincount(hi.ravel(), minlength=n)[alive]
            dmin = int(deg.min()) if deg.size else 0
            dmax = int(deg.max()) if deg.size else 0
            if m_i:
                pick = rng.random(m_i) < min(1.0, delta * n_i / m_i)
                chosen = hi[pick]
            else:
                chosen = hi[:0]
            cnt = np.bincount(chosen.ravel(), minlength=n)
            lone = (cnt[chosen[:, 0]] == 1) & (cnt[chosen[:, 1]] == 1)
            Mi = chosen[lone]
            trace.M_sets.append([tuple(map(int, e)) for e in Mi])
            trace.records.append(RoundRecord(i, n_i, m_i, len(chosen), len(Mi), len(chosen) - len(Mi), dmin, dmax))
            alive[Mi.ravel()] = False
        hi = hi[alive[hi[:, 0]] & alive[hi[:, 1]]]
        A_T = np.flatnonzero(alive & side).tolist()
        B_T = np.flatnonzero(alive & ~side).tolist()
        trace.A_sets.append(A_T)
        trace.B_sets.append(B_T)
        trace.final_size = len(B_T)

        pool_adj: dict[int, list[int]] = {}
        if params.final_pool == "sample":
            for a, b in hi.tolist():
                pool_adj.setdefault(a, []).append(b)
                pool_adj.setdefault(b, []).append(a)
        else:
            inB = set(B_T)
            inA = set(A_T)
            for a in A_T:
                pool_adj[a] = [b for b in G.neighbors(a) if b in inB]
            for b in B_T:
                pool_adj[b] = [a for a in G.neighbors(b) if a in inA]
        trace.final_pool_edges = sum(len(v) for k, v in pool_adj.items() if side[k])
        tri, final, matched = _final_step(G, S, A_T, B_T, pool_adj, n % 2 == 1)
        trace.final_matched = matched
        if final is None:
            failures.append(f"restart {restart}: no perfect matching on the last {len(B_T)} + {len(A_T)} vertices")
            continue
        elems = [p for Mi in trace.M_sets for p in Mi] + final
        pairs = tuple(sorted(elems))
        A = tuple(sorted(np.flatnonzero(side).tolist()))
        B = tuple(sorted(np.flatnonzero(~side).tolist()))
        pm = PerfectMatching(A, B, pairs, tri)
        trace.failures = failures
        return pm, trace
    trace.failures = failures
    raise NibbleFailure(f"no perfect matching after {params.restart_cap} restarts", trace)


# -- reduction ----------------------------------------------------------------


def build_digraph(G: Graph, M: PerfectMatching) -> Digraph:
    els = M.elements()
    pos_a = {a: j for j, (a, _) in enumerate(els)}
    arcs = []
    for i, (_, b) in enumerate(els):
        for w in G.neighbors(b):
            j = pos_a.get(w)
            if j is not None and j != i:
                arcs.append((i, j))
    return Digraph(len(els), arcs)


def prune_digraph(D: Digraph, G: Graph, M: PerfectMatching, S: ConflictSystem) -> Digraph:
    """Drop arc i -> j when {b_i, a_j} conflicts with the matching edge at
    b_i or at a_j; isolate the triple element if its own two edges conflict."""
    if S.mode is Mode.GLOBAL:
        raise ValueError("digraph pruning needs a LOCAL system")
    els = M.elements()
    k = len(M.pairs) if M.odd_triple is not None else None
    dead = None
    if k is not None:
        a, v, b = M.odd_triple
        if not S.is_compatible_pair(G.edge_id(a, v), G.edge_id(v, b)):
            dead = k
    at_b = [G.edge_id(*M.edge_at_b(i)) for i in range(len(els))]
    at_a = [G.edge_id(*M.edge_at_a(i)) for i in range(len(els))]
    keep = []
    for i, j in D.arcs:
        if i == dead or j == dead:
            continue
        f = G.edge_id(els[i][1], els[j][0])
        if f in S.conflicts_at(els[i][1], at_b[i]) or f in S.conflicts_at(els[j][0], at_a[j]):
            continue
        keep.append((i, j))
    return Digraph(D.m, keep)


@dataclass
class TypicalityReport:
    typical: bool
    threshold: float
    min_in: int
    min_out: int
    argmin_in: int | None
    argmin_out: int | None
    min_degree_G: int
    epsilon: float


def typicality_report(D: Digraph, G: Graph, epsilon: float, min_degree: int | None = None) -> TypicalityReport:
    """Minimum in/out degree of D against (1/2 + eps) * delta(G) / 2."""
    dG = G.min_degree() if min_degree is None else min_degree
    thr = (0.5 + epsilon) * dG / 2.0
    if D.m == 0:
        return TypicalityReport(False, thr, 0, 0, None, None, dG, epsilon)
    ins = [D.in_degree(i) for i in range(D.m)]
    outs = [D.out_degree(i) for i in range(D.m)]
    ai = min(range(D.m), key=ins.__getitem__)
    ao = min(range(D.m), key=outs.__getitem__)
    ok = ins[ai] >= thr and outs[ao] >= thr
    return TypicalityReport(ok, thr, ins[ai], outs[ao], ai, ao, dG, epsilon)


def lift_cycle(dcycle: Sequence[int], M: PerfectMatching) -> list[int]:
    els = M.elements()
    dc = list(dcycle)
    if sorted(dc) != list(range(len(els))):
        raise ValueError("directed cycle does not visit every matching element exactly once")
    k = len(M.pairs) if M.odd_triple is not None else None
    out = []
    for i in dc:
        a, b = els[i]
        out.append(a)
        if i == k:
            out.append(M.odd_triple[1])
        out.append(b)
    return out

"""Expander certification and the randomized d-out compatible subgraph.

Certification is exact: a branch-and-bound over vertex subsets in
increasing-degree order, cut off by a node budget. A set X violates
(k, r)-expansion iff |N[X]| < (r + 1)|X| with N[X] the closed
neighbourhood, and N[X] only grows along a branch, which gives the bound.
"""

from __future__ import annotations

import time

from dataclasses import dataclass, field

import numpy as np

from .conflicts import ConflictSystem, Mode
from .graph import Graph

CERTIFIED_TRUE = "certified_true"
CERTIFIED_FALSE = "certified_false"
BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class ExpanderParams:
    k: int | None = None  # None: floor(n / 4)
    r: float = 2.0
    enumeration_budget: int = 10_000_000

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")
        if self.r < 1:
            raise ValueError("r must be at least 1")

    def resolve_k(self, n: int) -> int:
        return max(1, n // 4) if self.k is None else self.k


@dataclass(frozen=True)
class DOutParams:
    d: int = 8
    max_retries: int = 10
    seed: int = 0
    # Moser-Tardos resampling rounds per attempt, as a multiple of n
    resample_factor: int = 20

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be at least 1")


@dataclass
class Certificate:
    status: str
    witness: tuple[int, ...] | None = None
    nodes: int = 0

    def __bool__(self) -> bool:
        return self.status == CERTIFIED_TRUE


class _Budget(Exception):
    pass


def _components(R: Graph) -> list[list[int]]:
    seen = [False] * R.n
    comps = []
    for s in range(R.n):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], []
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in R.neighbors(u):
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def is_expander(R: Graph, params: ExpanderParams = ExpanderParams()) -> Certificate:
    n = R.n
    if n == 0:
        return Certificate(CERTIFIED_TRUE)
    k = min(params.resolve_k(n), n)
    r = params.r
    factor = r + 1.0

    # cheap witnesses first: a low-degree vertex, or a subset of a small component
    for v in range(n):
        if R.degree(v) < r:
            return Certificate(CERTIFIED_FALSE, (v,))
    for comp in sorted(_components(R), key=len):
        t = min(k, len(comp))
        if len(comp) - t < r * t:
            return Certificate(CERTIFIED_FALSE, tuple(comp[:t]))

    order = sorted(range(n), key=lambda v: (R.degree(v), v))
    bits = R.adjacency_bitsets()
    closed = [bits[v] | (1 << v) for v in order]
    budget = params.enumeration_budget
    nodes = 0
    chosen: list[int] = []

    limit = factor * k

    def search(cands: list[int], size: int, cover: int) -> tuple[int, ...] | None:
        nonlocal nodes
        for pos, i in enumerate(cands):
            nodes += 1
            if nodes > budget:
                raise _Budget
            c2 = cover | closed[i]
            s2 = size + 1
            pc = c2.bit_count()
            chosen.append(order[i])
            if pc < factor * s2:
                return tuple(sorted(chosen))
            if s2 < k:
                # smallest size a violating superset could have
                t_need = int(pc // factor) + 1
                if t_need <= k:
                    # a later vertex can only join if the union stays below factor * k
                    rest = [j for j in cands[pos + 1:] if (c2 | closed[j]).bit_count() < limit]
                    if len(rest) >= t_need - s2:
                        found = search(rest, s2, c2)
                        if found is not None:
                            return found
            chosen.pop()
        return None

    try:
        witness = search(list(range(n)), 0, 0)
    except _Budget:
        return Certificate(BUDGET_EXCEEDED, None, nodes)
    if witness is not None:
        return Certificate(CERTIFIED_FALSE, witness, nodes)
    return Certificate(CERTIFIED_TRUE, None, nodes)


@dataclass
class ExpanderBuild:
    graph: Graph | None
    certificate: Certificate | None
    attempts: int = 0
    resamples: int = 0
    reason: str = ""
    history: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.graph is not None


class _ConflictTracker:
    """Multiset of chosen edges plus the set of conflicting chosen pairs."""

    def __init__(self, S: ConflictSystem, G: Graph):
        self.S, self.G = S, G
        self.count: dict[int, int] = {}
        self.bad: set[tuple[int, int]] = set()
        self.by_color: dict[int, set[int]] = {}

    def _partners(self, e: int) -> set[int]:
        if self.S.mode is Mode.GLOBAL:
            return self.by_color.get(self.S.color(e), set()) - {e}
        out: set[int] = set()
        for v in self.G.edges[e]:
            for f in self.S.conflicts_at(v, e):
                if f in self.count:
                    out.add(f)
        return out

    def add(self, e: int) -> None:
        c = self.count.get(e, 0)
        self.count[e] = c + 1
        if c:
            return
        for f in self._partners(e):
            self.bad.add((min(e, f), max(e, f)))
        if self.S.mode is Mode.GLOBAL:
            self.by_color.setdefault(self.S.color(e), set()).add(e)

    def remove(self, e: int) -> None:
        self.count[e] -= 1
        if self.count[e]:
            return
        del self.count[e]
        if self.S.mode is Mode.GLOBAL:
            self.by_color[self.S.color(e)].discard(e)
        for f in self._partners(e):
            self.bad.discard((min(e, f), max(e, f)))

    def first(self) -> tuple[int, int] | None:
        return min(self.bad) if self.bad else None


def build_compatible_expander(
    G: Graph,
    S: ConflictSystem,
    dp: DOutParams = DOutParams(),
    ep: ExpanderParams = ExpanderParams(),
    strict: bool = True,
    deadline: float | None = None,
    drop_on_stall: bool = False,
) -> ExpanderBuild:
    """Random d-out subgraph R of G, pairwise compatible under S, with
    |E(R)| <= d n; certified against ``ep`` when the budget allows.

    Every vertex picks ``d`` incident edges with repetition. While some
    chosen pair conflicts, every pick that chose either edge is redrawn
    (Moser-Tardos with the individual picks as variables). A whole fresh attempt starts on a
    resampling stall or, when ``strict``, a failed certificate.
    ``deadline`` is a ``time.perf_counter()`` value that ends the search.
    With ``drop_on_stall`` a resampling stall is not fatal: the higher-id
    edge of each remaining conflicting pair is dropped instead.
    """
    n = G.n
    if n == 0 or G.min_degree() < 1:
        raise ValueError("build_compatible_expander needs min degree >= 1")
    incident = [np.array(G.incident_edges(v), dtype=np.int64) for v in range(n)]
    seeds = np.random.SeedSequence(dp.seed).spawn(dp.max_retries + 1)
    history: list[str] = []
    total_resamples = 0
    last_cert: Certificate | None = None
    for attempt, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        picks = [incident[v][rng.integers(len(incident[v]), size=dp.d)].tolist() for v in range(n)]
        track = _ConflictTracker(S, G)
        pickers: dict[int, set[tuple[int, int]]] = {}
        for v in range(n):
            for j, e in enumerate(picks[v]):
                track.add(e)
                pickers.setdefault(e, set()).add((v, j))

        cap = dp.resample_factor * n
        resamples = 0
        bad = track.first()
        while bad is not None and resamples < cap:
            if deadline is not None and time.perf_counter() > deadline:
                history.append(f"attempt {attempt}: deadline reached")
                return ExpanderBuild(None, last_cert, attempt + 1, total_resamples + resamples, "deadline", history)
            resamples += 1
            # redraw exactly the picks that produced either conflicting edge
            for v, j in sorted(pickers[bad[0]] | pickers[bad[1]]):
                e = picks[v][j]
                track.remove(e)
                pickers[e].discard((v, j))
                e = int(incident[v][rng.integers(len(incident[v]))])
                picks[v][j] = e
                track.add(e)
                pickers.setdefault(e, set()).add((v, j))
            bad = track.first()
        total_resamples += resamples
        if bad is not None and drop_on_stall:
            dropped = 0
            while bad is not None:
                e = bad[1]
                for v, j in sorted(pickers[e]):
                    track.remove(e)
                dropped += 1
                pickers[e] = set()
                bad = track.first()
            history.append(f"attempt {attempt}: dropped {dropped} conflicting edges after {resamples} resamples")
        if bad is not None:
            history.append(f"attempt {attempt}: conflicts persisted after {resamples} resamples")
            continue

        R = Graph(n, (G.edges[e] for e in track.count))
        cert = is_expander(R, ep)
        last_cert = cert
        if cert.status == CERTIFIED_FALSE and strict:
            history.append(f"attempt {attempt}: not an expander, witness size {len(cert.witness)}")
            continue
        history.append(f"attempt {attempt}: {cert.status}")
        return ExpanderBuild(R, cert, attempt + 1, total_resamples, "", history)

    return ExpanderBuild(None, last_cert, len(seeds), total_resamples, "retries exhausted", history)

"""Normality diagnostics for a nibble trace.

Every quantity is compared with ((1 - delta)^i +- xi_i) times its starting
scale, xi_i = delta (1 + 21 delta / eps)^i. Conditions (iv) and (v) are
per-edge and run on a uniform sample of crossing edges unless
``exhaustive`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conflicts import ConflictSystem, Mode, max_bound
from .graph import Graph
from .matching import InfeasibleParams, NibbleParams, NibbleTrace, xi


@dataclass
class ConditionCheck:
    condition: str
    iteration: int
    passed: bool
    lo: float
    hi: float
    measured_min: float
    measured_max: float


@dataclass
class NormalityReport:
    checks: list[ConditionCheck] = field(default_factory=list)
    xis: list[float] = field(default_factory=list)
    bad_counts: list[tuple[int, int, int, int]] = field(default_factory=list)  # (i, edge, A-bad, B-bad)
    mu_hat: float = 0.0
    sampled_edges: int = 0
    infeasible: str = ""

    def passed(self, condition: str | None = None) -> bool:
        sel = [c for c in self.checks if condition is None or c.condition == condition]
        return not self.infeasible and all(c.passed for c in sel)

    def summary(self) -> dict[str, bool]:
        return {c: self.passed(c) for c in ("i", "ii", "iii", "iv", "v")}


def a_bad(G: Graph, S: ConflictSystem, e: tuple[int, int], e2: tuple[int, int]) -> bool:
    """e2 = (a', b') is A-bad for e = (a, b): {a, b'} is an edge compatible
    with e but incompatible with e2."""
    a, b = e
    a2, b2 = e2
    f = G.get_edge_id(a, b2)
    if f is None or b2 == b:
        return False
    return S.is_compatible_pair(f, G.edge_id(a, b)) and a2 != a and not S.is_compatible_pair(f, G.edge_id(a2, b2))


def b_bad(G: Graph, S: ConflictSystem, e: tuple[int, int], e2: tuple[int, int]) -> bool:
    """e2 = (a', b') is B-bad for e = (a, b): same with {b, a'}."""
    a, b = e
    a2, b2 = e2
    f = G.get_edge_id(b, a2)
    if f is None or a2 == a:
        return False
    return S.is_compatible_pair(f, G.edge_id(a, b)) and b2 != b and not S.is_compatible_pair(f, G.edge_id(a2, b2))


def compatible_sides(G: Graph, S: ConflictSystem, e: tuple[int, int], side_a: np.ndarray, among=None):
    """(A_e, B_e) for e = (a, b): x in A with {b, x} compatible with e, and
    y in B with {a, y} compatible with e. ``among`` restricts to an edge
    subgraph given as an adjacency map."""
    a, b = e
    eid = G.edge_id(a, b)
    nb_b = among[b] if among is not None else G.neighbors(b)
    nb_a = among[a] if among is not None else G.neighbors(a)
    bad_b = S.conflicts_at(b, eid)
    bad_a = S.conflicts_at(a, eid)
    Ae = [x for x in nb_b if x != a and side_a[x] and G.edge_id(b, x) not in bad_b]
    Be = [y for y in nb_a if y != b and not side_a[y] and G.edge_id(a, y) not in bad_a]
    return Ae, Be


def _window(i: int, delta: float, eps: float, scale: float) -> tuple[float, float]:
    base = (1 - delta) ** i
    x = xi(delta, eps, i)
    return (base - x) * scale, (base + x) * scale


def normality_check(
    G: Graph,
    S: ConflictSystem,
    trace: NibbleTrace,
    params: NibbleParams,
    sample_size: int = 200,
    *,
    p: float | None = None,
    exhaustive: bool = False,
    seed: int = 0,
) -> NormalityReport:
    """Conditions (i)-(v) for every recorded iteration of ``trace``.

    ``p`` defaults to the edge density of G; the bad-edge bound uses the
    measured bound of S divided by n p in place of mu.
    """
    rep = NormalityReport()
    try:
        params.resolve()
    except InfeasibleParams as exc:
        rep.infeasible = str(exc)
        return rep
    if S.mode is Mode.GLOBAL:
        raise ValueError("normality is defined for LOCAL systems")
    n = G.n
    if p is None:
        p = 2 * G.m / (n * (n - 1))
    delta, eps = trace.delta, trace.epsilon
    n0 = trace.n0
    q = eps * p / 4
    rep.mu_hat = max_bound(S).max_bound / (n * p)
    odd = n % 2 == 1

    side_a = np.zeros(n, dtype=bool)
    side_a[trace.A_sets[0]] = True
    edges = np.array(G.edges, dtype=np.int64).reshape(-1, 2)
    h = np.array(trace.H_edges, dtype=np.int64).reshape(-1, 2)
    h_adj: dict[int, list[int]] = {v: [] for v in range(n)}
    for a, b in trace.H_edges:
        h_adj[a].append(b)
        h_adj[b].append(a)

    crossing = [tuple(map(int, e)) for e in edges if side_a[e[0]] != side_a[e[1]]]
    crossing = [(a, b) if side_a[a] else (b, a) for a, b in crossing]
    if exhaustive or sample_size >= len(crossing):
        sample = crossing
    else:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(len(crossing), size=sample_size, replace=False))
        sample = [crossing[k] for k in idx]
    rep.sampled_edges = len(sample)
    sides_g = [compatible_sides(G, S, e, side_a) for e in sample]
    sides_h = [compatible_sides(G, S, e, side_a, h_adj) for e in sample]

    def add(cond, i, vals, lo, hi):
        vals = list(vals)
        if not vals:
            rep.checks.append(ConditionCheck(cond, i, True, lo, hi, float("nan"), float("nan")))
            return
        mn, mx = min(vals), max(vals)
        rep.checks.append(ConditionCheck(cond, i, bool(lo <= mn and mx <= hi), lo, hi, mn, mx))

    for i in range(len(trace.A_sets)):
        rep.xis.append(xi(delta, eps, i))
        A_i = np.asarray(trace.A_sets[i], dtype=np.int64)
        B_i = np.asarray(trace.B_sets[i], dtype=np.int64)
        alive = np.zeros(n, dtype=bool)
        alive[A_i] = True
        alive[B_i] = True
        inA = alive & side_a
        inB = alive & ~side_a

        lo, hi = _window(i, delta, eps, n0)
        add("i", i, [len(A_i) - (1 if odd else 0), len(B_i)], lo, hi)

        hi_e = h[alive[h[:, 0]] & alive[h[:, 1]]] if len(h) else h
        deg_h = np.bincount(hi_e.ravel(), minlength=n)[alive] if len(hi_e) else np.zeros(int(alive.sum()))
        lo, hi = _window(i, delta, eps, n0 * q)
        add("ii", i, deg_h.tolist(), lo, hi)

        # |N(v) & A_i| and |N(v) & B_i| for every vertex
        u, v = edges[:, 0], edges[:, 1]
        toA = np.bincount(u[inA[v]], minlength=n) + np.bincount(v[inA[u]], minlength=n)
        toB = np.bincount(u[inB[v]], minlength=n) + np.bincount(v[inB[u]], minlength=n)
        lo, hi = _window(i, delta, eps, n0 * p)
        add("iii", i, np.concatenate([toA, toB]).tolist(), lo, hi)

        ratios = []
        for (Ae, Be), (Ah, Bh) in zip(sides_g, sides_h):
            for s in (Ae, Be, Ah, Bh):
                if s:
                    ratios.append(sum(1 for x in s if alive[x]) / len(s))
        lo, hi = _window(i, delta, eps, 1.0)
        add("iv", i, ratios, lo, hi)

        if i >= 1 and i - 1 < len(trace.M_sets):
            Mprev = trace.M_sets[i - 1]
            mate_of_b = {b: a for a, b in Mprev}
            mate_of_a = {a: b for a, b in Mprev}
            excess = []
            limit = (rep.mu_hat + eps / 3) * delta * (1 - delta) ** (i - 1)
            for k, (e, (Ae, Be)) in enumerate(zip(sample, sides_g)):
                na = sum(1 for y in Be if y in mate_of_b and a_bad(G, S, e, (mate_of_b[y], y)))
                nb = sum(1 for x in Ae if x in mate_of_a and b_bad(G, S, e, (x, mate_of_a[x])))
                rep.bad_counts.append((i, k, na, nb))
                excess.append(max(na - limit * len(Be), nb - limit * len(Ae)))
            add("v", i, excess, -np.inf, 0.0)
    return rep

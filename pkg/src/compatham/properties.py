"""Finite-n checks of the four G(n, p) regularity properties used by the
sparse argument: degree concentration, sparse small sets, the mid-size
density bound, and edges between large disjoint sets.

The o(1) terms are replaced by explicit tolerances. Properties (ii)-(iv)
quantify over exponentially many sets, so they are checked on sampled and
structured families only; a pass is evidence, a fail is a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class PropertyTolerances:
    degree_slack: float = 0.25
    pair_samples: int = 200
    density_margin: float = 1.0
    # property (iv) only looks at pairs with |X||Y|p >= pair_factor * n
    pair_factor: float = 4.0

    def __post_init__(self):
        for name in ("degree_slack", "pair_samples", "density_margin", "pair_factor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class PropertyReport:
    degrees_ok: bool
    small_sets_ok: bool
    midsize_sets_ok: bool
    pairs_ok: bool
    stats: dict = field(default_factory=dict)
    skipped: list[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return self.degrees_ok and self.small_sets_ok and self.midsize_sets_ok and self.pairs_ok

    def flags(self) -> tuple[bool, bool, bool, bool]:
        return (self.degrees_ok, self.small_sets_ok, self.midsize_sets_ok, self.pairs_ok)


def _greedy_dense_set(G: Graph, start: int, size: int) -> list[int]:
    # grow X by repeatedly adding the outside vertex with most neighbours in X
    X = [start]
    inside = {start}
    gain: dict[int, int] = {w: 1 for w in G.neighbors(start)}
    while len(X) < size:
        if gain:
            v = max(gain, key=lambda w: (gain[w], -w))
            del gain[v]
        else:
            v = next(w for w in range(G.n) if w not in inside)
        X.append(v)
        inside.add(v)
        for w in G.neighbors(v):
            if w not in inside:
                gain[w] = gain.get(w, 0) + 1
    return X


def _size_grid(lo: int, hi: int, steps: int = 10) -> list[int]:
    if lo > hi:
        return []
    sizes = {lo, hi}
    for k in range(steps):
        sizes.add(int(round(lo * (hi / lo) ** (k / max(steps - 1, 1)))))
    return sorted(s for s in sizes if lo <= s <= hi)


def check_gnp_properties(
    G: Graph, p: float, tol: PropertyTolerances = PropertyTolerances(), seed: int = 0
) -> PropertyReport:
    if G.n == 0:
        raise ValueError("property checks need a non-empty graph")
    n = G.n
    rng = np.random.default_rng(seed)
    stats: dict = {}
    skipped: list[str] = []

    # (i) degrees (1 +- slack) (n-1) p
    degs = G.degrees()
    expected = (n - 1) * p
    lo, hi = (1 - tol.degree_slack) * expected, (1 + tol.degree_slack) * expected
    stats["degree_min"], stats["degree_max"], stats["degree_expected"] = min(degs), max(degs), expected
    degrees_ok = all(lo <= d <= hi for d in degs)

    # threshold between "small" and "mid-size" sets
    np4 = n * p**4
    t0 = math.inf if np4 <= 0 else np4 ** (-1.0 / 3.0)
    stats["t0"] = t0
    starts = rng.permutation(n)[: min(n, 20)].tolist()

    # (ii) e(X) <= 8|X| for |X| < t0
    small_ok = True
    worst_small = 0.0
    small_sizes = range(2, min(n, math.ceil(t0) - 1 if t0 < math.inf else n) + 1)
    if not small_sizes:
        skipped.append("small sets: no size below t0")
    for t in small_sizes:
        family = [_greedy_dense_set(G, s, t) for s in starts[:5]]
        family.append(rng.choice(n, size=t, replace=False).tolist())
        for X in family:
            ratio = G.e_inside(X) / (8 * len(X))
            worst_small = max(worst_small, ratio)
            if ratio > tol.density_margin:
                small_ok = False
    stats["small_worst_ratio"] = worst_small

    # (iii) e(X) <= t^2 p (n/t)^(1/2) for t0 <= |X| <= n
    mid_ok = True
    worst_mid = 0.0
    mid_lo = max(1, math.ceil(t0)) if t0 < math.inf else n + 1
    sizes = _size_grid(mid_lo, n)
    if not sizes:
        skipped.append("mid-size sets: t0 exceeds n")
    for t in sizes:
        bound = t * t * p * math.sqrt(n / t)
        family = [_greedy_dense_set(G, s, t) for s in starts[:3]]
        family.append(rng.choice(n, size=t, replace=False).tolist())
        for X in family:
            if bound <= 0:
                skipped.append(f"mid-size t={t}: zero bound")
                continue
            ratio = G.e_inside(X) / bound
            worst_mid = max(worst_mid, ratio)
            if ratio > tol.density_margin:
                mid_ok = False
    stats["midsize_worst_ratio"] = worst_mid

    # (iv) e(X, Y) >= |X||Y|p / 2 for disjoint X, Y with |X||Y|p >= pair_factor * n
    pairs_ok = True
    worst_pair = math.inf
    checked = 0
    if p <= 0:
        skipped.append("pairs: p = 0")
    else:
        s_min = math.ceil(math.sqrt(tol.pair_factor * n / p))
        if s_min > n // 2:
            skipped.append(f"pairs: need |X|=|Y|>={s_min} > n/2")
        else:
            families = []
            perm = rng.permutation(n).tolist()
            families.append((perm[: n // 2], perm[n // 2 : 2 * (n // 2)]))
            for v in starts[:5]:
                X = sorted(G.neighbors(v))
                Y = [w for w in range(n) if w != v and w not in G.neighbors(v)]
                if len(X) * len(Y) * p >= tol.pair_factor * n:
                    families.append((X, Y))
            for _ in range(int(tol.pair_samples)):
                s = int(rng.integers(s_min, n // 2 + 1))
                order = rng.permutation(n)
                families.append((order[:s].tolist(), order[s : 2 * s].tolist()))
            for X, Y in families:
                need = 0.5 * len(X) * len(Y) * p
                ratio = G.e_between(X, Y) / need
                worst_pair = min(worst_pair, ratio)
                checked += 1
                if ratio * tol.density_margin < 1.0:
                    pairs_ok = False
    stats["pairs_checked"] = checked
    stats["pairs_worst_ratio"] = worst_pair if checked else None

    return PropertyReport(degrees_ok, small_ok, mid_ok, pairs_ok, stats, skipped)

"""Booster counts for longest paths in certified (k, 2)-expanders sampled
as d-out subgraphs of K_n, against the (k + 1)^2 / 2 lower bound."""

import argparse
import statistics

import numpy as np

from compatham.conflicts import ConflictSystem
from compatham.expander import CERTIFIED_TRUE, DOutParams, ExpanderParams, build_compatible_expander
from compatham.graph import complete_graph
from compatham.posa import find_boosters


def hamilton_path(R):
    # plain DFS; fine for n around 20
    n = R.n
    best = []

    def go(path, seen):
        nonlocal best
        if len(path) > len(best):
            best = path.copy()
        if len(best) == n:
            return True
        for w in sorted(R.neighbors(path[-1])):
            if w not in seen:
                path.append(w)
                seen.add(w)
                if go(path, seen):
                    return True
                seen.discard(w)
                path.pop()
        return False

    go([0], {0})
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--samples", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    K = complete_graph(args.n)
    k = args.n // 4
    ep = ExpanderParams(k=k, r=2)
    counts = []
    for s in np.random.SeedSequence(args.seed).generate_state(args.samples):
        b = build_compatible_expander(K, ConflictSystem.empty(K), DOutParams(d=args.d, seed=int(s), max_retries=20), ep)
        if not b.ok or b.certificate.status != CERTIFIED_TRUE:
            continue
        P = hamilton_path(b.graph)
        counts.append(len(find_boosters(P, b.graph, K)))
    bound = (k + 1) ** 2 / 2
    print(f"n={args.n} k={k} d={args.d} certified={len(counts)}/{args.samples} bound={bound}")
    if counts:
        print(f"boosters min={min(counts)} median={statistics.median(counts)} max={max(counts)}")


if __name__ == "__main__":
    main()

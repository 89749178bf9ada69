"""Per-round H_i degrees of the nibble against the (1 - delta)^i n_0 q window,
plus the normality summary for the same run."""

import argparse

from compatham.conflicts import ConflictSystem, gen_adversarial
from compatham.graph import gen_gnp
from compatham.matching import NibbleParams, nibble_matching
from compatham.normality import normality_check


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--p", type=float, default=0.05)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--epsilon", type=float, default=0.4)
    ap.add_argument("--bound", type=int, default=0, help="random_bounded conflict bound")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sample", type=int, default=200)
    args = ap.parse_args(argv)

    G = gen_gnp(args.n, args.p, args.seed)
    S = gen_adversarial(G, "random_bounded", args.seed, delta=args.bound) if args.bound else ConflictSystem.empty(G)
    params = NibbleParams(epsilon=args.epsilon, delta=args.delta, seed=args.seed)
    M, trace = nibble_matching(G, S, params)
    q = args.epsilon * args.p / 4
    print(f"n0={trace.n0} q={q:.4g} n0*q={trace.n0 * q:.2f} rounds={trace.rounds}")
    print(f"{'i':>3} {'n_i':>6} {'kept':>5} {'min':>4} {'max':>4} {'target':>7} {'worst_rel':>9}")
    for r in trace.records:
        target = (1 - args.delta) ** r.iteration * trace.n0 * q
        worst = max(abs(r.min_deg - target), abs(r.max_deg - target)) / target
        print(f"{r.iteration:>3} {r.n_i:>6} {r.kept:>5} {r.min_deg:>4} {r.max_deg:>4} {target:>7.2f} {worst:>9.2f}")
    rep = normality_check(G, S, trace, params, sample_size=args.sample, seed=args.seed)
    print("normality:", rep.summary(), f"mu_hat={rep.mu_hat:.4f}")


if __name__ == "__main__":
    main()

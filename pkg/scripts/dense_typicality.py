"""Pruned digraph degrees in the dense pipeline against the typicality
threshold (1/2 + eps) delta(G) / 2, across conflict bounds."""

import argparse

from compatham.conflicts import gen_adversarial
from compatham.graph import gen_gnp
from compatham.matching import NibbleParams, build_digraph, nibble_matching, prune_digraph, typicality_report


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--p", type=float, default=0.3)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.15, 0.25])
    ap.add_argument("--epsilon", type=float, default=0.1, help="typicality epsilon")
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'mu':>5} {'bound':>5} {'arcs':>7} {'pruned':>7} {'min_in':>6} {'min_out':>7} {'thr':>6} typical")
    for mu in args.mu:
        bound = int(mu * args.n * args.p)
        for seed in range(args.seeds):
            G = gen_gnp(args.n, args.p, seed)
            S = gen_adversarial(G, "random_bounded", seed, delta=bound)
            M, _ = nibble_matching(G, S, NibbleParams(seed=seed))
            D = build_digraph(G, M)
            Dp = prune_digraph(D, G, M, S)
            t = typicality_report(Dp, G, args.epsilon)
            print(f"{mu:>5} {bound:>5} {len(D):>7} {len(Dp):>7} {t.min_in:>6} {t.min_out:>7} "
                  f"{t.threshold:>6.1f} {t.typical}")


if __name__ == "__main__":
    main()

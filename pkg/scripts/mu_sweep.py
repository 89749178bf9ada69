"""Success rate of the sparse solver as the conflict bound grows.

    python scripts/mu_sweep.py --n 300 --mu 0.02 0.05 0.1 0.2 --trials 20
"""

import argparse
import csv
import sys

from compatham.harness import ExperimentConfig, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--c", type=float, default=3.0, help="p = c ln n / n")
    ap.add_argument("--mu", type=float, nargs="+", default=[0.02, 0.05, 0.1, 0.2, 0.4])
    ap.add_argument("--d", type=int, default=8)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["mu_ratio", "bound", "successes", "trials", "mean_rotations", "mean_restarts"])
    for mu in args.mu:
        cfg = ExperimentConfig(n_values=(args.n,), p_rule=f"{args.c} ln n / n", mu_ratio=mu, d=args.d,
                               trials=args.trials, master_seed=args.seed, workers=args.workers)
        res = run_experiment(cfg)
        recs = res.records
        bound = int(mu * args.n * recs[0].p)
        w.writerow([mu, bound, sum(r.success for r in recs), len(recs),
                    f"{sum(r.rotations for r in recs) / len(recs):.1f}",
                    f"{sum(r.restarts for r in recs) / len(recs):.2f}"])
        sys.stdout.flush()


if __name__ == "__main__":
    main()

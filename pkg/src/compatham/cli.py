"""Command line: gen, solve, verify, experiment, nibble-trace.

Exit codes: 0 success, 1 solver failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .conflicts import ConflictSystem, Mode, SystemFormatError, gen_adversarial
from .dense import DenseLimits, solve_dense
from .expander import DOutParams
from .graph import Graph, gen_gnp
from .harness import ConfigError, ExperimentConfig, run_experiment
from .matching import InfeasibleParams, NibbleFailure, NibbleParams, NibbleTrace, nibble_matching
from .posa import SolveLimits, solve_constrained
from .verify import MODES, verify_cycle

log = logging.getLogger("compatham")

OK, FAILED, BAD_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_graph(path) -> Graph:
    try:
        return Graph.load(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot load graph {path}: {exc}") from None


def _load_system(G: Graph, path) -> ConflictSystem:
    if path is None:
        return ConflictSystem.empty(G)
    try:
        return ConflictSystem.load(G, path)
    except (OSError, SystemFormatError, ValueError) as exc:
        raise InputError(f"cannot load system {path}: {exc}") from None


def _parse_limits(items: list[str] | None) -> dict:
    out = {}
    for item in items or []:
        for part in item.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise InputError(f"limit {part!r} is not key=value")
            k, v = (s.strip() for s in part.split("=", 1))
            try:
                out[k] = float(v) if "." in v or "e" in v else int(v)
            except ValueError:
                raise InputError(f"limit {k} needs a number, got {v!r}") from None
    return out


def _load_cycle(path) -> list[int]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read cycle: {exc}") from None
    text = text.strip()
    try:
        if text.startswith("["):
            return [int(x) for x in json.loads(text)]
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"bad cycle file: {exc}") from None


def cmd_gen(args) -> int:
    if not 0 <= args.p <= 1:
        raise InputError("p must lie in [0, 1]")
    if args.n < 1:
        raise InputError("n must be positive")
    G = gen_gnp(args.n, args.p, args.seed)
    G.save(args.out)
    log.info("graph n=%d m=%d -> %s", G.n, G.m, args.out)
    if args.system:
        if args.system == "star_killer" and not 0 <= args.vertex < G.n:
            raise InputError("vertex out of range")
        S = gen_adversarial(G, args.system, args.seed, delta=args.delta, vertex=args.vertex, bound=args.bound)
        if not args.system_out:
            raise InputError("--system needs --system-out")
        S.save(args.system_out)
        log.info("system %s (%d pairs) -> %s", args.system, len(S), args.system_out)
    return OK


def cmd_solve(args) -> int:
    G = _load_graph(args.graph)
    S = _load_system(G, args.system)
    lim = _parse_limits(args.limits)
    if args.method == "rainbow" and S.mode is not Mode.GLOBAL:
        raise InputError("rainbow needs a colouring (GLOBAL system)")
    if args.method != "rainbow" and S.mode is Mode.GLOBAL:
        raise InputError(f"method {args.method} needs a LOCAL system")
    if G.n < (4 if args.method == "dense" else 3):
        raise InputError("graph too small")
    try:
        if args.method == "dense":
            params = NibbleParams(
                mode=lim.pop("mode", "desk"), epsilon=lim.pop("epsilon", 0.4), delta=lim.pop("delta", 0.05),
                rounds=lim.pop("rounds", None), seed=args.seed, restart_cap=lim.pop("restart_cap", 10))
            rep = solve_dense(G, S, params, DenseLimits(**lim))
        else:
            dp = DOutParams(d=lim.pop("d", 8), seed=args.seed)
            rep = solve_constrained(G, S, dp, SolveLimits(**lim))
    except TypeError as exc:
        raise InputError(f"unknown limit: {exc}") from None
    mode = "rainbow" if args.method == "rainbow" else "compatible"
    out = {"success": rep.success, "stage": rep.stage, "reason": rep.reason, "rotations": rep.rotations,
           "boosters": rep.boosters_enumerated, "boosters_rejected": rep.boosters_rejected,
           "restarts": rep.restarts, "cycle": rep.cycle}
    if rep.success:
        v = verify_cycle(G, S, rep.cycle, mode)
        out["verdict"] = "pass" if v.passed else "fail"
        if not v.passed:
            out["success"] = False
    text = json.dumps(out)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return OK if out["success"] else FAILED


def cmd_verify(args) -> int:
    G = _load_graph(args.graph)
    S = _load_system(G, args.system) if args.system or args.mode != "hamiltonian_only" else None
    C = _load_cycle(args.cycle)
    if args.mode == "rainbow" and S.mode is not Mode.GLOBAL:
        raise InputError("rainbow mode needs a colouring")
    v = verify_cycle(G, S, C, args.mode)
    print(json.dumps({"pass": v.passed, "violations": [[k, w] for k, w in v.violations]}, default=list))
    return OK if v.passed else FAILED


def cmd_experiment(args) -> int:
    try:
        cfg = ExperimentConfig.load(args.config)
    except ConfigError as exc:
        raise InputError(str(exc)) from None
    output = args.output or cfg.output
    fmt = args.format or cfg.format
    if output:
        try:
            Path(output).parent.mkdir(parents=True, exist_ok=True)
            Path(output).touch()
        except OSError as exc:
            raise InputError(f"output not writable: {exc}") from None
    res = run_experiment(cfg, workers=args.workers)
    if output:
        res.write(output, fmt)
    else:
        sys.stdout.write(res.to_json() if fmt == "json" else res.to_csv())
    for cell in res.summary():
        log.info("n=%s p=%s mu=%s %s: %d/%d", cell["n"], cell["p"], cell["mu_ratio"], cell["method"],
                 cell["successes"], cell["trials"])
    return OK


def cmd_nibble_trace(args) -> int:
    if args.n < 4 or not 0 < args.p <= 1:
        raise InputError("need n >= 4 and 0 < p <= 1")
    G = gen_gnp(args.n, args.p, args.seed)
    try:
        params = NibbleParams(mode=args.mode, epsilon=args.epsilon, delta=args.delta, rounds=args.rounds,
                              seed=args.seed)
        params.resolve()
    except (InfeasibleParams, ValueError) as exc:
        raise InputError(str(exc)) from None
    try:
        _, trace = nibble_matching(G, ConflictSystem.empty(G), params)
        status = OK
    except NibbleFailure as exc:
        trace, status = exc.trace, FAILED
        log.warning("%s", exc)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NibbleTrace.HEADER)
        w.writerows(trace.rows())
    finally:
        if args.out:
            fh.close()
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="compatham", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate G(n, p) and optionally a conflict system")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="graph file (.json or edge-list text)")
    g.add_argument("--system", choices=["random_bounded", "star_killer", "global_random", "empty"])
    g.add_argument("--system-out")
    g.add_argument("--delta", type=int, default=0)
    g.add_argument("--bound", type=int, default=1)
    g.add_argument("--vertex", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="search for a compatible / rainbow Hamilton cycle")
    s.add_argument("--method", choices=["sparse", "dense", "rainbow"], default="sparse")
    s.add_argument("--graph", required=True)
    s.add_argument("--system")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--limits", action="append", help="key=value[,key=value] e.g. time_limit=10")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a cycle")
    v.add_argument("--graph", required=True)
    v.add_argument("--system")
    v.add_argument("--cycle", required=True)
    v.add_argument("--mode", choices=MODES, default="compatible")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="run a seeded sweep from a key=value config")
    e.add_argument("--config", required=True)
    e.add_argument("--output")
    e.add_argument("--format", choices=["csv", "json"])
    e.add_argument("--workers", type=int)
    e.set_defaults(func=cmd_experiment)

    t = sub.add_parser("nibble-trace", help="per-round statistics of the nibble matching")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--p", type=float, required=True)
    t.add_argument("--delta", type=float, default=0.05)
    t.add_argument("--epsilon", type=float, default=0.4)
    t.add_argument("--rounds", type=int)
    t.add_argument("--mode", choices=["desk", "paper"], default="desk")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")
    t.set_defaults(func=cmd_nibble_trace)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

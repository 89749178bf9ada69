"""Dense pipeline: nibble matching -> digraph -> pruning -> directed
Hamilton cycle -> lifted compatible Hamilton cycle."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .conflicts import ConflictSystem, Mode
from .dihamilton import DirectedLimits, directed_hamilton
from .graph import Graph
from .matching import (
    InfeasibleParams,
    NibbleFailure,
    NibbleParams,
    build_digraph,
    lift_cycle,
    nibble_matching,
    prune_digraph,
    typicality_report,
)
from .posa import SolveReport
from .verify import verify_cycle


@dataclass(frozen=True)
class DenseLimits:
    time_limit: float = 60.0
    exact_cap: int = 25
    directed_restarts: int = 50
    # epsilon of the typicality diagnostic (independent of the nibble's)
    typical_epsilon: float = 0.1


def solve_dense(
    G: Graph,
    S: ConflictSystem,
    params: NibbleParams = NibbleParams(),
    limits: DenseLimits = DenseLimits(),
) -> SolveReport:
    if G.n < 4:
        raise ValueError("solve_dense needs n >= 4")
    if S.mode is Mode.GLOBAL:
        raise ValueError("the dense pipeline handles LOCAL systems only")
    t0 = time.perf_counter()
    rep = SolveReport(None)

    def done(reason: str, stage: str) -> SolveReport:
        rep.reason, rep.stage = reason, stage
        rep.elapsed = time.perf_counter() - t0
        return rep

    try:
        M, trace = nibble_matching(G, S, params)
    except InfeasibleParams as exc:
        return done(str(exc), "params")
    except NibbleFailure as exc:
        rep.restarts = params.restart_cap
        rep.extra["trace"] = exc.trace
        return done(str(exc), "nibble")
    rep.restarts = trace.restarts
    rep.extra.update(matching=M, trace=trace)
    problems = M.problems(G)
    if problems:
        return done("invalid matching: " + "; ".join(problems), "nibble")

    D = build_digraph(G, M)
    Dp = prune_digraph(D, G, M, S)
    typ = typicality_report(Dp, G, limits.typical_epsilon)
    rep.extra.update(arcs=len(D), pruned_arcs=len(Dp), typicality=typ)

    remaining = max(0.0, limits.time_limit - (time.perf_counter() - t0))
    res = directed_hamilton(
        Dp, DirectedLimits(limits.exact_cap, remaining, limits.directed_restarts, params.seed)
    )
    rep.extra["directed"] = res
    if res.cycle is None:
        return done(f"no directed Hamilton cycle ({res.method})", "directed")
    cycle = lift_cycle(res.cycle, M)
    verdict = verify_cycle(G, S, cycle, "compatible")
    rep.verdict = verdict
    if not verdict.passed:
        return done(f"lifted cycle rejected: {verdict.violations[:3]}", "verify")
    rep.cycle = cycle
    return done("", "done")

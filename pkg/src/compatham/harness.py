"""Seeded Monte Carlo sweeps over (n, p, mu_ratio) cells.

Trial seeds come from ``trial_seed(master, cell, trial)``: the first 32-bit
word of ``numpy.random.SeedSequence(master, spawn_key=(cell, trial))``. The
SeedSequence hash mixes all three integers, so seeds do not depend on
execution order or on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .conflicts import ConflictSystem, gen_adversarial
from .dense import DenseLimits, solve_dense
from .expander import DOutParams
from .graph import complete_graph, gen_gnp
from .matching import NibbleParams
from .posa import SolveLimits, solve_constrained
from .verify import verify_cycle

METHODS = ("sparse", "dense", "rainbow")
SYSTEMS = ("random_bounded", "global_random", "star_killer", "empty")
GRAPHS = ("gnp", "complete")
CSV_COLUMNS = ("seed", "n", "p", "mu_ratio", "method", "success", "stage",
               "rotations", "boosters", "restarts", "elapsed_ms")


class ConfigError(ValueError):
    pass


_LN_RULE = re.compile(r"^\s*([0-9.eE+-]+)?\s*\*?\s*ln\s*\(?\s*n\s*\)?\s*/\s*n\s*$")


def parse_p_rule(rule: str):
    """'0.3' -> constant; 'c ln n / n' (also 'c*ln(n)/n', 'ln n/n') -> function of n."""
    m = _LN_RULE.match(rule)
    if m:
        c = float(m.group(1)) if m.group(1) else 1.0
        return lambda n: min(1.0, c * math.log(n) / n)
    try:
        p = float(rule)
    except ValueError:
        raise ConfigError(f"p must be a number or 'c ln n / n', got {rule!r}") from None
    if not 0 <= p <= 1:
        raise ConfigError(f"p must lie in [0, 1], got {p}")
    return lambda n: p


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple[int, ...] = (100,)
    p_rule: str = "3 ln n / n"
    mu_ratio: float = 0.02
    system_kind: str = "random_bounded"
    method: str = "sparse"
    graph: str = "gnp"
    trials: int = 10
    master_seed: int = 0
    time_limit: float = 30.0
    d: int = 8
    max_restarts: int = 5
    epsilon: float = 0.4
    delta: float = 0.05
    rounds: int | None = None
    workers: int = 1
    # wall-clock timings break byte-identical reruns, so they are opt-in
    timing: bool = False
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.mu_ratio < 0:
            raise ConfigError("mu_ratio must be non-negative")
        if not self.n_values or min(self.n_values) < 3:
            raise ConfigError("n values must be at least 3")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if self.system_kind not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}")
        if self.graph not in GRAPHS:
            raise ConfigError(f"graph must be one of {GRAPHS}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.method == "rainbow" and self.system_kind not in ("global_random", "empty"):
            raise ConfigError("rainbow runs need system = global_random")
        if self.method != "rainbow" and self.system_kind == "global_random":
            raise ConfigError("global_random systems need method = rainbow")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        parse_p_rule(self.p_rule)

    _ALIASES = {"n": "n_values", "p": "p_rule", "system": "system_kind", "seed": "master_seed"}

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        """Flat ``key = value`` lines; '#' starts a comment."""
        kinds = {f.name: f.type for f in fields(cls)}
        kw = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = cls._ALIASES.get(key, key)
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            try:
                kw[key] = _convert(key, kinds[key], val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return cls.from_text(text)


def _convert(key: str, kind: str, val: str):
    if key == "n_values":
        return tuple(int(x) for x in val.replace(",", " ").split())
    if "bool" in kind:
        if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"not a boolean: {val}")
        return val.lower() in ("true", "1", "yes")
    if "None" in kind and val.lower() in ("none", ""):
        return None
    if kind.startswith("int"):
        return int(val)
    if kind.startswith("float"):
        return float(val)
    return val


@dataclass
class TrialRecord:
    trial: int
    seed: int
    n: int
    p: float
    mu_ratio: float
    method: str
    success: bool
    stage: str
    rotations: int
    boosters: int
    restarts: int
    elapsed_ms: int
    verdict: str  # pass / fail / none
    # dense runs only: nibble matching valid, pruned digraph typical
    matching_ok: bool | None = None
    typical: bool | None = None

    def csv_row(self) -> list[str]:
        return [str(self.seed), str(self.n), f"{self.p:.6g}", f"{self.mu_ratio:g}", self.method,
                "true" if self.success else "false", self.stage, str(self.rotations),
                str(self.boosters), str(self.restarts), str(self.elapsed_ms)]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[TrialRecord] = field(default_factory=list)

    def summary(self) -> list[dict]:
        cells: dict[tuple, list[TrialRecord]] = {}
        for r in self.records:
            cells.setdefault((r.n, f"{r.p:.6g}", r.mu_ratio, r.method), []).append(r)
        out = []
        for (n, p, mu, method), rs in cells.items():
            wins = sum(r.success for r in rs)
            out.append({"n": n, "p": p, "mu_ratio": mu, "method": method, "trials": len(rs),
                        "successes": wins, "success_rate": wins / len(rs)})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow(r.csv_row())
        return buf.getvalue()

    def to_json(self) -> str:
        cfg = asdict(self.config)
        cfg["n_values"] = list(cfg["n_values"])
        doc = {"config": cfg, "records": [asdict(r) for r in self.records], "summary": self.summary()}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def write(self, path, fmt: str | None = None) -> None:
        fmt = fmt or self.config.format
        text = self.to_json() if fmt == "json" else self.to_csv()
        Path(path).write_text(text)


def trial_seed(master: int, cell: int, trial: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=(cell, trial)).generate_state(1)[0])


def run_trial(cfg: ExperimentConfig, n: int, trial: int, seed: int) -> TrialRecord:
    p = 1.0 if cfg.graph == "complete" else parse_p_rule(cfg.p_rule)(n)
    g_seed, s_seed, a_seed = (int(x) for x in np.random.SeedSequence(seed).generate_state(3))
    G = complete_graph(n) if cfg.graph == "complete" else gen_gnp(n, p, g_seed)
    bound = int(math.floor(cfg.mu_ratio * n * p))
    t0 = time.perf_counter()

    def record(success, stage, rot=0, boosters=0, restarts=0, verdict="none", extra=None):
        ms = int(round((time.perf_counter() - t0) * 1000)) if cfg.timing else 0
        rec = TrialRecord(trial, seed, n, p, cfg.mu_ratio, cfg.method, success, stage,
                          rot, boosters, restarts, ms, verdict)
        if extra is not None:
            M = extra.get("matching")
            rec.matching_ok = M is not None and M.is_valid(G)
            typ = extra.get("typicality")
            rec.typical = None if typ is None else typ.typical
        return rec

    if cfg.system_kind == "empty":
        S = ConflictSystem.empty(G)
        if cfg.method == "rainbow":
            S = ConflictSystem.from_colors(G, list(range(G.m)))
    elif cfg.system_kind == "global_random":
        S = gen_adversarial(G, "global_random", s_seed, bound=max(1, bound))
    elif cfg.system_kind == "star_killer":
        S = gen_adversarial(G, "star_killer", s_seed, vertex=0)
    else:
        S = gen_adversarial(G, "random_bounded", s_seed, delta=bound)

    if G.min_degree() < 2:
        return record(False, "input")
    if cfg.method == "dense":
        params = NibbleParams(epsilon=cfg.epsilon, delta=cfg.delta, rounds=cfg.rounds, seed=a_seed)
        rep = solve_dense(G, S, params, DenseLimits(time_limit=cfg.time_limit))
    else:
        rep = solve_constrained(G, S, DOutParams(d=cfg.d, seed=a_seed),
                                SolveLimits(time_limit=cfg.time_limit, max_restarts=cfg.max_restarts))
    verdict = "none"
    success = rep.success
    if success:
        # re-verify independently of the solver's own check
        mode = "rainbow" if cfg.method == "rainbow" else "compatible"
        ok = verify_cycle(G, S, rep.cycle, mode).passed
        verdict = "pass" if ok else "fail"
        success = ok
    return record(success, rep.stage if success or rep.stage != "done" else "verify",
                  rep.rotations, rep.boosters_enumerated, rep.restarts, verdict,
                  rep.extra if cfg.method == "dense" else None)


def _run_task(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """All trials of all cells; rows come back ordered by (cell, trial)."""
    tasks = [(cfg, n, t, trial_seed(cfg.master_seed, cell, t))
             for cell, n in enumerate(cfg.n_values) for t in range(cfg.trials)]
    workers = cfg.workers if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_run_task, tasks))
    else:
        records = [_run_task(t) for t in tasks]
    return ExperimentResult(cfg, records)

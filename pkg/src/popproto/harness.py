"""Experiment runner: convergence, holding and scaling measurements."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import coloring as col
from . import election as el
from .engine import Configuration, adversarial_config, run_until
from .graph import Graph, gen_family, read_edge_list, stats

log = logging.getLogger(__name__)

PROTOCOLS = ("plru", "dlru", "pbc")
STARTS = ("uniform", "monochrome")

CSV_COLUMNS = (
    "trial", "seed", "protocol", "coloring", "graph", "start", "n", "m", "delta", "diameter",
    "N", "Delta", "tau", "t_bc", "max_steps", "steps_to_two_hop", "steps_to_safe",
    "steps_to_S_LE", "timeout", "closure_steps", "closure_held", "holding_budget",
    "holding_window", "check_every",
)


class HarnessIOError(OSError):
    """Writing results failed; distinct from a simulation timeout."""


@dataclass
class TrialResult:
    trial: int
    seed: int
    protocol: str
    graph: str
    n: int
    m: int
    delta: int
    diameter: int
    N: int
    Delta: int
    max_steps: int
    coloring: str = ""
    start: str = "uniform"
    tau: int | None = None
    t_bc: int | None = None
    steps_to_two_hop: int | None = None
    steps_to_safe: int | None = None
    steps_to_S_LE: int | None = None
    timeout: bool = False
    closure_steps: int = 0
    closure_held: bool | None = None
    holding_budget: int = 0
    holding_window: int | None = None
    check_every: int = 1

    @property
    def target_steps(self) -> int | None:
        """Steps to the protocol's convergence target (None on timeout)."""
        return self.steps_to_S_LE if self.protocol == "pbc" else self.steps_to_safe

    def row(self) -> dict:
        d = asdict(self)
        return {k: ("" if d[k] is None else d[k]) for k in CSV_COLUMNS}


@dataclass
class SizeSummary:
    n: int
    m: int
    trials: int
    mean: float
    median: float
    p95: float
    timeout_fraction: float
    scale: float
    median_ratio: float


@dataclass
class SweepSummary:
    protocol: str
    family: str
    asymptotic: str
    sizes: list[SizeSummary] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def fitted_constant(self) -> float:
        return float(np.median([s.median_ratio for s in self.sizes]))

    @property
    def ratio_spread(self) -> float:
        """max / min of the per-size median ratios."""
        ratios = [s.median_ratio for s in self.sizes]
        lo = min(ratios)
        return math.inf if lo == 0 else max(ratios) / lo

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "family": self.family,
            "asymptotic": self.asymptotic,
            "fitted_constant": self.fitted_constant,
            "ratio_spread": self.ratio_spread,
            "sizes": [asdict(s) for s in self.sizes],
            "params": self.params,
        }


# --- graph and parameter plumbing ------------------------------------------------


def resolve_graph(spec: str, n: int | None = None, p: float | None = None, seed: int = 0) -> Graph:
    """Graph from a family name (``ring``, ``gnp``...) or ``file:<path>``."""
    if spec.startswith("file:"):
        return read_edge_list(spec[len("file:"):])
    if n is None:
        raise ValueError(f"graph family {spec!r} needs n")
    return gen_family(spec, n, p, seed)


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def asymptotic_scale(protocol: str, g: Graph, kp: col.KnowledgeParams, tau: int | None = None) -> float:
    """The claimed convergence asymptotic for ``protocol`` on ``g``, constant 1."""
    if protocol == "plru":
        return g.m * g.n
    if protocol == "dlru":
        return g.m * (g.n + kp.Delta * kp.bit_width)
    if protocol == "nc":
        return g.m * g.n * math.log2(g.n)
    return g.m * tau * math.log2(g.n)


def default_max_steps(protocol: str, g: Graph, kp: col.KnowledgeParams, tau: int | None = None) -> int:
    if protocol == "pbc":
        return math.ceil(200 * asymptotic_scale("pbc", g, kp, tau))
    return math.ceil(50 * asymptotic_scale(protocol, g, kp))


def _start(p, g, seed, start):
    if start == "monochrome":
        return col.monochrome_config(p, g, seed)
    if start == "uniform":
        return adversarial_config(p, g, seed)
    raise ValueError(f"unknown start {start!r}; expected one of {STARTS}")


def _colors(c: Configuration):
    return [getattr(s, "col", s).hopcolor for s in c.states]


def colors_changed(c0: Configuration, key=None):
    """Predicate that becomes true once any agent's color differs from ``c0``.

    ``key`` extracts the color from a state (default: the hopcolor).
    """
    if key is None:
        colors_of = _colors
    else:
        def colors_of(c):
            return [key(s) for s in c.states]
    ref = colors_of(c0)
    return lambda c: colors_of(c) != ref


# --- single trials ---------------------------------------------------------------


@dataclass(frozen=True)
class TrialConfig:
    protocol: str
    graph: Graph
    N: int | None = None
    Delta: int | None = None
    coloring: str = "plru"
    max_steps: int | None = None
    closure_steps: int = 0
    holding_budget: int = 0
    check_every: int | None = None
    start: str = "uniform"
    tau: int | None = None


def _run_trial(cfg: TrialConfig, trial: int, seed: int) -> TrialResult:
    g = cfg.graph
    gs = stats(g)
    if cfg.protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {cfg.protocol!r}; expected one of {PROTOCOLS}")
    if cfg.protocol == "pbc":
        params = el.compute_params(g, cfg.N, cfg.Delta)
        if cfg.tau is not None:
            params = el.BCParams(cfg.tau, params.kp)
        kp = params.kp
        p = el.bc_protocol(params, cfg.coloring)
        tau, t_bc = params.tau, params.t_bc
    else:
        kp = col.KnowledgeParams.for_graph(g, cfg.N, cfg.Delta)
        p = col.lru_protocol(kp) if cfg.protocol == "plru" else col.dlru_protocol(kp)
        tau = t_bc = None
    max_steps = cfg.max_steps
    if max_steps is None:
        max_steps = default_max_steps(cfg.protocol, g, kp, tau)

    res = TrialResult(
        trial=trial, seed=seed, protocol=cfg.protocol, graph=g.name, n=g.n, m=g.m,
        delta=gs.delta, diameter=gs.diameter, N=kp.N, Delta=kp.Delta, max_steps=max_steps,
        coloring=cfg.coloring if cfg.protocol == "pbc" else cfg.protocol, start=cfg.start,
        tau=tau, t_bc=t_bc, closure_steps=cfg.closure_steps, holding_budget=cfg.holding_budget,
    )
    c0 = _start(p, g, seed, cfg.start)

    def two_hop(c):
        return col.check_two_hop(g, _colors(c))

    if cfg.protocol == "pbc":
        preds = {"two_hop": two_hop, "S_LE": el.s_le_predicate(params, g)}
        target = "S_LE"
    else:
        safe = col.lru_safe if cfg.protocol == "plru" else col.dlru_safe
        preds = {"two_hop": two_hop, "safe": lambda c: safe(g, c.states)}
        target = "safe"
    tr = run_until(p, g, c0, preds, max_steps, seed, stop=target, check_every=cfg.check_every)
    res.check_every = tr.check_every
    res.steps_to_two_hop = tr.hit("two_hop")
    if cfg.protocol == "pbc":
        res.steps_to_S_LE = tr.hit("S_LE")
    else:
        res.steps_to_safe = tr.hit("safe")
    res.timeout = tr.hit(target) is None

    if cfg.closure_steps and not res.timeout:
        ct = run_until(p, g, tr.final, {"changed": colors_changed(tr.final)},
                       cfg.closure_steps, seed + 1, stop="changed", check_every=1)
        res.closure_held = ct.hit("changed") is None
    if cfg.holding_budget:
        res.holding_window = 0 if res.timeout else holding_window(
            p, g, tr.final, cfg.holding_budget, seed + 2)
    return res


def holding_window(p, g: Graph, c: Configuration, budget: int, seed: int) -> int:
    """Number of steps from ``c`` during which LE holds, capped at ``budget``.

    Returns 0 when ``c`` itself violates LE.
    """
    tr = run_until(p, g, c, {"broken": el.le_broken}, budget, seed, stop="broken", check_every=1)
    broken = tr.hit("broken")
    return budget if broken is None else broken


def _run_many(cfg: TrialConfig, trials: int, seed: int, jobs: int) -> list[TrialResult]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seeds = [trial_seed(seed, i) for i in range(trials)]
    if jobs <= 1:
        results = [_run_trial(cfg, i, s) for i, s in enumerate(seeds)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, [cfg] * trials, range(trials), seeds))
    results.sort(key=lambda r: r.trial)
    return results


# --- public measurements -----------------------------------------------------------


def measure_convergence(protocol: str, graph: Graph, trials: int, seed: int,
                        max_steps: int | None = None, *, N=None, Delta=None,
                        coloring: str = "plru", closure_steps: int = 0,
                        check_every=None, start: str = "uniform", tau=None,
                        jobs: int = 1) -> list[TrialResult]:
    """Run ``trials`` independent trials from adversarial starts.

    The target is memory-consistent two-hop coloring for ``plru``/``dlru``
    and membership in S_LE for ``pbc``.  A non-zero ``closure_steps``
    additionally checks that hopcolors stay fixed after convergence.
    """
    cfg = TrialConfig(protocol, graph, N, Delta, coloring, max_steps, closure_steps,
                      0, check_every, start, tau)
    return _run_many(cfg, trials, seed, jobs)


def measure_holding(graph: Graph, trials: int, seed: int, holding_budget: int,
                    max_steps: int | None = None, *, N=None, Delta=None,
                    coloring: str = "plru", check_every=None, tau=None,
                    jobs: int = 1) -> list[TrialResult]:
    """Converge to S_LE, then count how long exactly one leader persists."""
    if holding_budget < 1:
        raise ValueError("holding_budget must be at least 1")
    cfg = TrialConfig("pbc", graph, N, Delta, coloring, max_steps, 0, holding_budget,
                      check_every, "uniform", tau)
    return _run_many(cfg, trials, seed, jobs)


def summarize(results: list[TrialResult], scale: float) -> SizeSummary:
    """Aggregate one size; timeouts enter the statistics at ``max_steps``."""
    steps = np.array([r.target_steps if r.target_steps is not None else r.max_steps
                      for r in results], dtype=float)
    med = float(np.median(steps))
    return SizeSummary(
        n=results[0].n, m=results[0].m, trials=len(results),
        mean=float(steps.mean()), median=med, p95=float(np.percentile(steps, 95)),
        timeout_fraction=sum(r.timeout for r in results) / len(results),
        scale=scale, median_ratio=med / scale,
    )


def sweep(protocol: str, family: str, sizes, trials: int, seed: int, out=None, *,
          p: float | None = None, coloring: str = "plru", start: str | None = None,
          check_every=None, jobs: int = 1) -> tuple[SweepSummary, list[TrialResult]]:
    """Measure convergence over increasing sizes of one graph family.

    With ``out`` set, writes ``trials.csv`` and ``summary.json`` there.
    Coloring sweeps default to monochrome starts so that there is work to
    measure; uniform starts are usually already two-hop colored.
    """
    sizes = list(sizes)
    if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be non-empty and strictly increasing")
    if start is None:
        start = "uniform" if protocol == "pbc" else "monochrome"
    asym = {"plru": "m*n", "dlru": "m*(n+Delta*x)", "pbc": "m*tau*log2(n)"}[protocol]
    summary = SweepSummary(protocol, family, asym, params=dict(
        sizes=sizes, trials=trials, seed=seed, p=p, coloring=coloring, start=start,
        check_every=check_every))
    everything: list[TrialResult] = []
    for n in sizes:
        g = resolve_graph(family, n, p, seed)
        results = measure_convergence(protocol, g, trials, seed, coloring=coloring,
                                      start=start, check_every=check_every, jobs=jobs)
        kp = col.KnowledgeParams(results[0].N, results[0].Delta)
        summary.sizes.append(summarize(results, asymptotic_scale(protocol, g, kp, results[0].tau)))
        everything.extend(results)
        log.info("%s n=%d median=%.0f", family, n, summary.sizes[-1].median)
    if out is not None:
        write_results(out, everything, summary)
    return summary, everything


def write_results(out, results: list[TrialResult], summary: SweepSummary | dict | None = None) -> None:
    """Write ``trials.csv`` (one row per trial) and optionally ``summary.json``."""
    try:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "trials.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
            w.writeheader()
            for r in sorted(results, key=lambda r: (r.n, r.trial)):
                w.writerow(r.row())
        if summary is not None:
            data = summary.to_dict() if isinstance(summary, SweepSummary) else summary
            (out / "summary.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise HarnessIOError(f"cannot write results to {out}: {exc}") from exc

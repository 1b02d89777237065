"""Execution of population protocols under the uniform random scheduler."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .graph import Graph

_BLOCK = 1 << 14
_INT64_LIMIT = 1 << 63


@dataclass(frozen=True)
class ProtocolSpec:
    """A protocol as seen by the engine.

    ``interact(p, q, r)`` updates the initiator state ``p`` and responder
    state ``q`` in place using the random number ``r`` drawn uniformly from
    ``range(random_range)``.  :meth:`transition` is the side-effect free
    view of the same function.
    """

    name: str
    interact: Callable[[Any, Any, int], None]
    output: Callable[[Any], Any]
    random_range: int
    sample_state: Callable[[np.random.Generator], Any]
    copy_state: Callable[[Any], Any]
    params: Any = None

    @property
    def deterministic(self) -> bool:
        return self.random_range == 1

    def transition(self, p, q, r: int = 0):
        p2, q2 = self.copy_state(p), self.copy_state(q)
        self.interact(p2, q2, r)
        return p2, q2


@dataclass
class Configuration:
    """Agent states plus, per agent, the last partner it interacted with.

    ``last_partner`` is observer bookkeeping (``-1`` = no interaction seen);
    agents never read it.
    """

    states: list
    last_partner: list[int] = field(default=None)

    def __post_init__(self):
        if self.last_partner is None:
            self.last_partner = [-1] * len(self.states)

    @property
    def n(self) -> int:
        return len(self.states)

    def copy(self, copy_state) -> "Configuration":
        return Configuration([copy_state(s) for s in self.states], list(self.last_partner))

    def outputs(self, output) -> list:
        return [output(s) for s in self.states]


@dataclass
class Trace:
    steps_taken: int
    predicate_hits: dict[str, int]
    final: Configuration
    seed: int
    check_every: int = 1
    stopped: bool = False

    def hit(self, name: str) -> int | None:
        return self.predicate_hits.get(name)


def schedule_next(rng: np.random.Generator, g: Graph) -> tuple[int, int]:
    """Draw one ordered edge uniformly; the first agent is the initiator."""
    return g.edges[int(rng.integers(g.m))]


def step(p: ProtocolSpec, c: Configuration, e: tuple[int, int], r: int = 0) -> Configuration:
    """Return the configuration reached from ``c`` by interaction ``e``.

    ``c`` is not modified; agents outside ``e`` share their state objects
    with ``c``.
    """
    u, v = e
    states = list(c.states)
    states[u], states[v] = p.transition(states[u], states[v], r)
    last = list(c.last_partner)
    last[u], last[v] = v, u
    return Configuration(states, last)


def adversarial_config(p: ProtocolSpec, g: Graph, seed: int) -> Configuration:
    """Draw every agent's state independently from the full state space."""
    rng = np.random.default_rng(seed)
    return Configuration([p.sample_state(rng) for _ in range(g.n)])


def default_check_every(g: Graph) -> int:
    return 1 if g.n <= 16 else g.m


class _Streams:
    """Independent edge and random-number streams for one trial."""

    def __init__(self, g: Graph, random_range: int, seed: int, number_seed: int | None):
        edge_ss, num_ss = np.random.SeedSequence(seed).spawn(2)
        if number_seed is not None:
            num_ss = np.random.SeedSequence(number_seed)
        self._edge_rng = np.random.default_rng(edge_ss)
        self._m = g.m
        self._R = random_range
        if random_range == 1:
            self._num_rng = None
        elif random_range <= _INT64_LIMIT:
            self._num_rng = np.random.default_rng(num_ss)
        else:
            self._num_rng = random.Random(int(num_ss.generate_state(1, dtype=np.uint64)[0]))

    def edges(self, count: int) -> list[int]:
        return self._edge_rng.integers(self._m, size=count).tolist()

    def numbers(self, count: int) -> list[int]:
        if self._num_rng is None:
            return [0] * count
        if isinstance(self._num_rng, random.Random):
            return [self._num_rng.randrange(self._R) for _ in range(count)]
        return self._num_rng.integers(self._R, size=count, dtype=np.int64).tolist()


def run_until(
    p: ProtocolSpec,
    g: Graph,
    c0: Configuration,
    predicates: dict[str, Callable[[Configuration], bool]] | None = None,
    max_steps: int = 0,
    seed: int = 0,
    stop: str | None = None,
    check_every: int | None = None,
    number_seed: int | None = None,
) -> Trace:
    """Simulate from ``c0`` and record when each predicate first holds.

    Predicates are evaluated on ``c0`` and then after every ``check_every``
    steps (and after the last step), so a first-hit index may be rounded up
    to the next check point.  The run ends after ``max_steps`` steps or as
    soon as the predicate named ``stop`` holds.  ``c0`` is not modified.
    """
    predicates = dict(predicates or {})
    if stop is not None and stop not in predicates:
        raise KeyError(f"stop predicate {stop!r} is not among the predicates")
    k = check_every if check_every is not None else default_check_every(g)
    if k < 1:
        raise ValueError("check_every must be positive")
    c = c0.copy(p.copy_state)
    hits: dict[str, int] = {}

    def evaluate(t):
        for name, pred in predicates.items():
            if name not in hits and pred(c):
                hits[name] = t
        return stop is not None and stop in hits

    if evaluate(0) or max_steps <= 0:
        return Trace(0, hits, c, seed, k, stop in hits if stop else False)

    streams = _Streams(g, p.random_range, seed, number_seed)
    edges = g.edges
    states = c.states
    last = c.last_partner
    interact = p.interact
    t = 0
    stopped = False
    while t < max_steps and not stopped:
        count = min(_BLOCK, max_steps - t)
        for ei, r in zip(streams.edges(count), streams.numbers(count)):
            u, v = edges[ei]
            interact(states[u], states[v], r)
            last[u] = v
            last[v] = u
            t += 1
            if (t % k == 0 or t == max_steps) and evaluate(t):
                stopped = True
                break
    return Trace(t, hits, c, seed, k, stopped)

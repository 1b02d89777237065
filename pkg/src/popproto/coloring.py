"""Self-stabilizing two-hop coloring with an LRU memory of partner colors.

Two protocols share the same memory layout:

* the randomized protocol (:func:`lru_protocol`) draws fresh colors and the
  shared stamp bit from the per-step random number;
* the deterministic protocol (:func:`dlru_protocol`) derives every bit
  from the initiator/responder roles chosen by the scheduler.  A normal
  coloring sublayer (:func:`nc_interact`) decides which endpoint of an
  interaction may harvest the role bit, so the numbers an agent assembles
  never share bits with another agent's numbers.

Arrays are stored 0-based: ``prev[0]`` is the most recently seen partner
color.  ``idx`` keeps the 1-based slot convention (``0`` = not found).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import Configuration, ProtocolSpec
from .graph import Graph, stats


@dataclass(frozen=True)
class KnowledgeParams:
    """A priori knowledge of the agents: ``N >= n`` and ``Delta >= delta``."""

    N: int
    Delta: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be at least 2, got {self.N}")
        if not (1 <= self.Delta <= 2 * (self.N - 1)):
            raise ValueError(f"Delta must lie in [1, 2(N-1)], got {self.Delta}")

    @property
    def color_space(self) -> int:
        return 8 * self.N**3 * self.Delta**2

    @property
    def bit_width(self) -> int:
        # ceil(log2(color_space))
        return (self.color_space - 1).bit_length()

    @property
    def nc_colors(self) -> int:
        return self.Delta + 1

    @property
    def nc_width(self) -> int:
        # ceil(log2(Delta + 1))
        return self.Delta.bit_length()

    @classmethod
    def for_graph(cls, g: Graph, N: int | None = None, Delta: int | None = None):
        """Knowledge for ``g``, defaulting to the exact ``n`` and ``delta``."""
        delta = stats(g).delta
        N = g.n if N is None else N
        Delta = delta if Delta is None else Delta
        if N < g.n:
            raise ValueError(f"N={N} is below the agent count n={g.n}")
        if Delta < delta:
            raise ValueError(f"Delta={Delta} is below the maximum degree {delta}")
        return cls(N, Delta)


@dataclass(slots=True)
class TwoHopState:
    hopcolor: int
    prev: list[int]
    stamp: list[int]
    idx: int = 0

    def copy(self):
        return TwoHopState(self.hopcolor, list(self.prev), list(self.stamp), self.idx)


@dataclass(slots=True)
class NCState:
    """Normal-coloring state: a color in ``0..Delta`` and a role-bit register."""

    ncolor: int
    ncreg: int = 0

    def copy(self):
        return NCState(self.ncolor, self.ncreg)


@dataclass(slots=True)
class DetTwoHopState(TwoHopState):
    """Two-hop state extended for role-bit number generation."""

    ncolor: int = 0
    ncreg: int = 0
    bitpool: int = 0
    fill: int = 0
    ready: list[int] = field(default_factory=list)
    pending: bool = False

    def copy(self):
        return DetTwoHopState(
            self.hopcolor, list(self.prev), list(self.stamp), self.idx,
            self.ncolor, self.ncreg, self.bitpool, self.fill, list(self.ready), self.pending,
        )


# --- oracles -----------------------------------------------------------------


def check_two_hop(g: Graph, colors) -> bool:
    """True iff any two distinct agents with a common neighbor differ in color."""
    for nbrs in g.adjacency:
        if len(nbrs) > 1 and len({colors[v] for v in nbrs}) != len(nbrs):
            return False
    return True


def check_normal(g: Graph, colors) -> bool:
    """True iff adjacent agents have different colors."""
    return all(colors[u] != colors[v] for u, v in g.edges)


def _first_slot(prev, color):
    try:
        return prev.index(color) + 1
    except ValueError:
        return 0


def collision_pending(a0: TwoHopState, a1: TwoHopState) -> bool:
    """Whether an interaction between ``a0`` and ``a1`` would detect a collision."""
    i0 = _first_slot(a0.prev, a1.hopcolor)
    i1 = _first_slot(a1.prev, a0.hopcolor)
    return bool(i0 and i1 and a0.stamp[i0 - 1] != a1.stamp[i1 - 1])


def memory_consistent(g: Graph, states) -> bool:
    """No edge would currently trigger collision detection.

    Together with :func:`check_two_hop` this is closed under every
    interaction, so the coloring can never change again.
    """
    return not any(collision_pending(states[u], states[v]) for u, v in g.edges if u < v)


def lru_safe(g: Graph, states) -> bool:
    return check_two_hop(g, [s.hopcolor for s in states]) and memory_consistent(g, states)


def dlru_safe(g: Graph, states) -> bool:
    return not any(s.pending for s in states) and lru_safe(g, states)


# --- randomized protocol -------------------------------------------------------


def _save_and_stamp(a0, a1, i0, i1, b):
    for a, k in ((a0, i0), (a1, i1)):
        if k == 0:
            k = len(a.prev)
        if k > 1:
            a.prev[1:k] = a.prev[: k - 1]
            a.stamp[1:k] = a.stamp[: k - 1]
        a.idx = k
    a0.prev[0] = a1.hopcolor
    a1.prev[0] = a0.hopcolor
    a0.stamp[0] = a1.stamp[0] = b


def lru_apply(a0: TwoHopState, a1: TwoHopState, c0: int, c1: int, b: int) -> bool:
    """One interaction of the randomized protocol, in place.

    ``c0``/``c1`` are the fresh colors used if a collision is detected and
    ``b`` is the shared stamp bit.  Returns True when colors were replaced.
    """
    i0 = _first_slot(a0.prev, a1.hopcolor)
    i1 = _first_slot(a1.prev, a0.hopcolor)
    collided = bool(i0 and i1 and a0.stamp[i0 - 1] != a1.stamp[i1 - 1])
    if collided:
        a0.hopcolor, a1.hopcolor = c0, c1
        i0 = i1 = 0
    _save_and_stamp(a0, a1, i0, i1, b)
    return collided


def lru_random_range(kp: KnowledgeParams) -> int:
    return 2 * kp.color_space**2


def decode_lru_number(r: int, kp: KnowledgeParams) -> tuple[int, int, int]:
    """Split one per-step random number into (color0, color1, stamp bit)."""
    K = kp.color_space
    b = r & 1
    r >>= 1
    return r % K + 1, r // K + 1, b


def lru_interact(a0: TwoHopState, a1: TwoHopState, rng, kp: KnowledgeParams):
    """Return the states after initiator ``a0`` meets responder ``a1``.

    ``rng`` is either a ``numpy.random.Generator`` or an already drawn
    integer in ``range(lru_random_range(kp))``.
    """
    r = rng if isinstance(rng, (int, np.integer)) else int(rng.integers(lru_random_range(kp)))
    a0, a1 = a0.copy(), a1.copy()
    lru_apply(a0, a1, *decode_lru_number(int(r), kp))
    return a0, a1


def sample_two_hop(rng: np.random.Generator, kp: KnowledgeParams, palette: int | None = None):
    """Arbitrary state; ``palette`` restricts colors to ``1..palette``."""
    hi = kp.color_space if palette is None else palette
    return TwoHopState(
        int(rng.integers(1, hi + 1)),
        rng.integers(1, hi + 1, size=kp.Delta).tolist(),
        rng.integers(2, size=kp.Delta).tolist(),
        int(rng.integers(kp.Delta + 1)),
    )


def lru_protocol(kp: KnowledgeParams, palette: int | None = None) -> ProtocolSpec:
    K = kp.color_space

    def interact(a0, a1, r):
        b = r & 1
        r >>= 1
        lru_apply(a0, a1, r % K + 1, r // K + 1, b)

    return ProtocolSpec(
        name="plru",
        interact=interact,
        output=lambda s: s.hopcolor,
        random_range=lru_random_range(kp),
        sample_state=lambda rng: sample_two_hop(rng, kp, palette),
        copy_state=TwoHopState.copy,
        params=kp,
    )


# --- normal coloring sublayer --------------------------------------------------


def nc_apply(a0, a1, kp: KnowledgeParams) -> None:
    """Normal-coloring step, in place; ``a0`` is the initiator.

    On a conflict the responder reads its role-bit register modulo
    ``Delta + 1``, stepping past the initiator's color.  Both agents then
    shift in their role bit (0 initiator, 1 responder).
    """
    if a0.ncolor == a1.ncolor:
        k = kp.Delta + 1
        cand = a1.ncreg % k
        if cand == a0.ncolor:
            cand = (cand + 1) % k
        a1.ncolor = cand
    mask = (1 << kp.nc_width) - 1
    a0.ncreg = (a0.ncreg << 1) & mask
    a1.ncreg = ((a1.ncreg << 1) | 1) & mask


def nc_interact(a0, a1, kp: KnowledgeParams):
    a0, a1 = a0.copy(), a1.copy()
    nc_apply(a0, a1, kp)
    return a0, a1


def sample_nc(rng: np.random.Generator, kp: KnowledgeParams) -> NCState:
    return NCState(int(rng.integers(kp.Delta + 1)), int(rng.integers(1 << kp.nc_width)))


def nc_protocol(kp: KnowledgeParams) -> ProtocolSpec:
    return ProtocolSpec(
        name="nc",
        interact=lambda a0, a1, r: nc_apply(a0, a1, kp),
        output=lambda s: s.ncolor,
        random_range=1,
        sample_state=lambda rng: sample_nc(rng, kp),
        copy_state=NCState.copy,
        params=kp,
    )


# --- deterministic protocol ----------------------------------------------------


def map_number(value: int, kp: KnowledgeParams) -> int:
    """Map an assembled x-bit number into ``1..color_space``."""
    return value % kp.color_space + 1


def dlru_apply(a0: DetTwoHopState, a1: DetTwoHopState, kp: KnowledgeParams) -> bool:
    """One interaction of the deterministic protocol, in place.

    Returns True when at least one hopcolor was replaced.
    """
    nc_apply(a0, a1, kp)
    if a0.ncolor > a1.ncolor:
        sup, b = a0, 0
    elif a1.ncolor > a0.ncolor:
        sup, b = a1, 1
    else:
        sup, b = None, 0

    if sup is not None:
        sup.bitpool = (sup.bitpool << 1) | b
        sup.fill += 1
        if sup.fill >= kp.bit_width:
            if len(sup.ready) < 2:
                sup.ready.append(sup.bitpool)
            sup.bitpool = 0
            sup.fill = 0

    i0 = _first_slot(a0.prev, a1.hopcolor)
    i1 = _first_slot(a1.prev, a0.hopcolor)
    recolored = False
    if i0 and i1 and a0.stamp[i0 - 1] != a1.stamp[i1 - 1]:
        if sup is not None and len(sup.ready) >= 2:
            a0.hopcolor = map_number(sup.ready[0], kp)
            a1.hopcolor = map_number(sup.ready[1], kp)
            sup.ready.clear()
            a0.pending = a1.pending = False
            i0 = i1 = 0
            recolored = True
        else:
            a0.pending = a1.pending = True
    elif (a0.pending or a1.pending) and sup is not None:
        waiting = [a for a in (a0, a1) if a.pending]
        if len(sup.ready) >= len(waiting):
            for a in waiting:
                a.hopcolor = map_number(sup.ready.pop(0), kp)
                a.pending = False
            i0 = i1 = 0
            recolored = True

    _save_and_stamp(a0, a1, i0, i1, b)
    return recolored


def dlru_interact(a0: DetTwoHopState, a1: DetTwoHopState, kp: KnowledgeParams):
    a0, a1 = a0.copy(), a1.copy()
    dlru_apply(a0, a1, kp)
    return a0, a1


def sample_det_two_hop(rng: np.random.Generator, kp: KnowledgeParams, palette: int | None = None):
    base = sample_two_hop(rng, kp, palette)
    x = kp.bit_width
    fill = int(rng.integers(x))
    return DetTwoHopState(
        base.hopcolor, base.prev, base.stamp, base.idx,
        ncolor=int(rng.integers(kp.Delta + 1)),
        ncreg=int(rng.integers(1 << kp.nc_width)),
        bitpool=int(rng.integers(1 << fill)) if fill else 0,
        fill=fill,
        ready=rng.integers(1 << x, size=int(rng.integers(3))).tolist(),
        pending=bool(rng.integers(2)),
    )


def dlru_protocol(kp: KnowledgeParams, palette: int | None = None) -> ProtocolSpec:
    return ProtocolSpec(
        name="dlru",
        interact=lambda a0, a1, r: dlru_apply(a0, a1, kp),
        output=lambda s: s.hopcolor,
        random_range=1,
        sample_state=lambda rng: sample_det_two_hop(rng, kp, palette),
        copy_state=DetTwoHopState.copy,
        params=kp,
    )


def monochrome_config(p: ProtocolSpec, g: Graph, seed: int, color: int = 1):
    """Adversarial start in which every agent holds the same hopcolor.

    Memories are filled with that color and random stamps, so every edge
    looks like a fresh collision candidate.
    """
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(g.n):
        s = p.sample_state(rng)
        col = getattr(s, "col", s)
        col.hopcolor = color
        col.prev = [color] * len(col.prev)
        states.append(s)
    return Configuration(states)

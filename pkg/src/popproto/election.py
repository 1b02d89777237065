"""Loosely-stabilizing leader election on top of two-hop coloring.

Agents pass through three phases: a global reset carried by a kill timer,
candidate generation with random identifiers assembled from role bits, and
periodic detection of multiple leaders through typed search viruses.  All
timers move by larger-time propagation plus a same-speed countdown that
only ticks when an agent meets its previous partner again, which the
two-hop coloring makes observable.

Every transition function below mutates its arguments in place and treats
the first agent as the initiator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coloring import (
    DetTwoHopState,
    KnowledgeParams,
    TwoHopState,
    check_two_hop,
    decode_lru_number,
    dlru_apply,
    lru_apply,
    lru_random_range,
    sample_det_two_hop,
    sample_two_hop,
)
from .engine import Configuration, ProtocolSpec
from .graph import Graph, stats

B, L0, L1, F = "B", "L0", "L1", "F"
LF_VALUES = (B, L0, L1, F)
LEADERS = frozenset((L0, L1))

TIMERS = ("timer_lf", "timer_kl", "timer_v", "timer_e")


@dataclass(frozen=True)
class BCParams:
    tau: int
    kp: KnowledgeParams

    @property
    def t_bc(self) -> int:
        return 16 * self.tau

    @property
    def N(self) -> int:
        return self.kp.N

    @property
    def id_threshold(self) -> int:
        # 2^ceil(log2 N^2)
        return 1 << (self.kp.N**2 - 1).bit_length()

    @property
    def type_threshold(self) -> int:
        # 2^ceil(log2 N)
        return 1 << (self.kp.N - 1).bit_length()

    def timer_max(self, name: str) -> int:
        return self.t_bc if name == "timer_kl" else 2 * self.t_bc


def tau_lower_bound(n: int, N: int, d: int) -> float:
    return max(2 * d, math.ceil(math.log2(N)) / 2, 15 + 3 * math.log2(n))


def compute_params(g: Graph, N: int | None = None, Delta: int | None = None,
                   d: int | None = None) -> BCParams:
    """Smallest integer ``tau`` meeting the timer bound, with ``t_bc = 16 tau``.

    ``d`` defaults to the graph diameter.
    """
    kp = KnowledgeParams.for_graph(g, N, Delta)
    if d is None:
        d = stats(g).diameter
    tau = math.ceil(tau_lower_bound(g.n, kp.N, d))
    return BCParams(tau, kp)


@dataclass(slots=True)
class LeaderState:
    lf: str
    type: int
    id: int
    pcol: int
    rc: int
    timer_lf: int
    timer_kl: int
    timer_v: int
    timer_e: int
    col: TwoHopState

    @property
    def color(self) -> int:
        return self.col.hopcolor

    def copy(self):
        return LeaderState(self.lf, self.type, self.id, self.pcol, self.rc, self.timer_lf,
                           self.timer_kl, self.timer_v, self.timer_e, self.col.copy())


def output(s: LeaderState) -> str:
    return "F" if s.lf == F else "L"


# --- timer primitives ------------------------------------------------------------


def repeat_check(a0: LeaderState, a1: LeaderState) -> None:
    c0, c1 = a0.col.hopcolor, a1.col.hopcolor
    a0.rc = 1 if a0.pcol == c1 else 0
    a1.rc = 1 if a1.pcol == c0 else 0
    a0.pcol = c1
    a1.pcol = c0


def ltp(a0: LeaderState, a1: LeaderState, timer: str) -> None:
    """Larger time propagation: each timer becomes max(own, partner - 1)."""
    t0, t1 = getattr(a0, timer), getattr(a1, timer)
    if t0 < t1 - 1:
        setattr(a0, timer, t1 - 1)
    elif t1 < t0 - 1:
        setattr(a1, timer, t0 - 1)


def count_down(a0: LeaderState, a1: LeaderState, timer: str) -> None:
    for a in (a0, a1):
        if a.rc == 1:
            t = getattr(a, timer)
            if t > 0:
                setattr(a, timer, t - 1)


def reset(a0: LeaderState, a1: LeaderState) -> None:
    for a in (a0, a1):
        a.lf, a.id, a.timer_v = F, 1, 0


# --- phases ----------------------------------------------------------------------


def generate_leader(a0: LeaderState, a1: LeaderState, params: BCParams) -> None:
    t = params.t_bc
    th = params.id_threshold
    pair = (a0, a1)
    if a0.timer_kl > 0 or a1.timer_kl > 0:
        a0.timer_lf = a1.timer_lf = t
    for a in pair:
        if a.lf == F and a.timer_lf == 0:
            if a.id != 1:
                a0.timer_kl = a1.timer_kl = t
            else:
                a.lf, a.timer_lf = B, 2 * t
    if a0.lf == B and a1.lf == B and a0.id < th and a1.id < th:
        a1.lf, a1.id, a1.timer_lf = F, 1, t
    for i, a in enumerate(pair):
        if a.lf == B and a.id < th:
            a.id, a.timer_lf = 2 * a.id + i, 2 * t
    if a0.lf in (F, B) and a1.lf in (F, B):
        for i in (0, 1):
            win, lose = pair[i], pair[1 - i]
            if ((win.lf == B and win.id >= th) or win.lf == F) and win.id > lose.id:
                lose.lf, lose.id = F, win.id
                break
    for i in (0, 1):
        if pair[i].lf == F and pair[1 - i].lf == B:
            pair[i].timer_lf = t - 1
    for a in pair:
        if a.lf == B and a.rc == 1 and a.timer_lf > 0:
            a.timer_lf -= 1
        if a.lf == B and a.timer_lf == 0:
            a.lf, a.timer_lf = L0, t


def detect(a0: LeaderState, a1: LeaderState, params: BCParams) -> None:
    t = params.t_bc
    th = params.type_threshold
    pair = (a0, a1)
    if a0.lf == B or a1.lf == B:
        a0.timer_e = a1.timer_e = 2 * t
    for i, a in enumerate(pair):
        if a.lf in LEADERS and a.timer_e == 0:
            a.lf, a.type, a.timer_e = L1, 1, 2 * t
        if a.lf == L1 and a.type < th:
            a.type, a.timer_e = 2 * a.type + i, 2 * t
            if a.type >= th:
                a.timer_v = 2 * t

    if (a0.lf == F and a1.lf in LEADERS) or (a1.lf == F and a0.lf in LEADERS):
        fol, lead = (a0, a1) if a0.lf == F else (a1, a0)
        if fol.timer_v > 0 and (lead.lf == L0 or lead.type < th or fol.type != lead.type):
            a0.timer_kl = a1.timer_kl = params.t_bc
        elif fol.timer_v == 0 and lead.lf == L1 and lead.timer_v > 0:
            fol.type, fol.timer_v = lead.type, lead.timer_v - 1
    elif a0.lf == F and a1.lf == F:
        if a0.timer_v > 0 and a1.timer_v > 0 and a0.type != a1.type:
            a0.timer_kl = a1.timer_kl = params.t_bc
        elif a0.timer_v == 0 and a1.timer_v > 0:
            a0.type, a0.timer_v = a1.type, a1.timer_v - 1
        elif a1.timer_v == 0 and a0.timer_v > 0:
            a1.type, a1.timer_v = a0.type, a0.timer_v - 1
    elif a0.lf in LEADERS and a1.lf in LEADERS:
        a0.timer_kl = a1.timer_kl = params.t_bc

    ltp(a0, a1, "timer_v")
    count_down(a0, a1, "timer_v")
    for a in pair:
        if a.timer_v > 0:
            a.timer_e = 2 * t
        if a.lf == L1 and 2 * a.timer_e < t:
            a.lf = L0


def bc_apply(a0: LeaderState, a1: LeaderState, params: BCParams) -> None:
    """Everything after the coloring step of one interaction."""
    repeat_check(a0, a1)
    if a0.timer_kl > 0 or a1.timer_kl > 0:
        reset(a0, a1)
    ltp(a0, a1, "timer_kl")
    count_down(a0, a1, "timer_kl")
    ltp(a0, a1, "timer_e")
    count_down(a0, a1, "timer_e")
    if a0.lf != B and a1.lf != B:
        ltp(a0, a1, "timer_lf")
        count_down(a0, a1, "timer_lf")
    for a in (a0, a1):
        if a.lf in LEADERS:
            a.timer_lf = params.t_bc
    generate_leader(a0, a1, params)
    detect(a0, a1, params)


def bc_interact(a0: LeaderState, a1: LeaderState, r, params: BCParams,
                coloring: str = "plru") -> None:
    """Full interaction: two-hop coloring step, then the election layer.

    ``r`` is the per-step random number (ignored by ``dlru``) or a numpy
    generator to draw it from.
    """
    if coloring == "plru":
        kp = params.kp
        if not isinstance(r, (int, np.integer)):
            r = int(r.integers(lru_random_range(kp)))
        lru_apply(a0.col, a1.col, *decode_lru_number(int(r), kp))
    elif coloring == "dlru":
        dlru_apply(a0.col, a1.col, params.kp)
    else:
        raise ValueError(f"unknown coloring protocol {coloring!r}")
    bc_apply(a0, a1, params)


def sample_leader_state(rng: np.random.Generator, params: BCParams,
                        coloring: str = "plru", palette: int | None = None) -> LeaderState:
    kp = params.kp
    t = params.t_bc
    if coloring == "dlru":
        col = sample_det_two_hop(rng, kp, palette)
    else:
        col = sample_two_hop(rng, kp, palette)
    return LeaderState(
        lf=LF_VALUES[int(rng.integers(4))],
        type=int(rng.integers(1, 2 * params.type_threshold)),
        id=int(rng.integers(1, 2 * params.id_threshold)),
        pcol=int(rng.integers(1, kp.color_space + 1)),
        rc=int(rng.integers(2)),
        timer_lf=int(rng.integers(2 * t + 1)),
        timer_kl=int(rng.integers(t + 1)),
        timer_v=int(rng.integers(2 * t + 1)),
        timer_e=int(rng.integers(2 * t + 1)),
        col=col,
    )


def bc_protocol(params: BCParams, coloring: str = "plru",
                palette: int | None = None) -> ProtocolSpec:
    kp = params.kp
    if coloring == "plru":
        K = kp.color_space

        def interact(a0, a1, r):
            b = r & 1
            r >>= 1
            lru_apply(a0.col, a1.col, r % K + 1, r // K + 1, b)
            bc_apply(a0, a1, params)

        random_range = lru_random_range(kp)
    elif coloring == "dlru":
        def interact(a0, a1, r):
            dlru_apply(a0.col, a1.col, kp)
            bc_apply(a0, a1, params)

        random_range = 1
    else:
        raise ValueError(f"unknown coloring protocol {coloring!r}")
    return ProtocolSpec(
        name=f"pbc-{coloring}",
        interact=interact,
        output=output,
        random_range=random_range,
        sample_state=lambda rng: sample_leader_state(rng, params, coloring, palette),
        copy_state=LeaderState.copy,
        params=params,
    )


def in_domain(s: LeaderState, params: BCParams) -> bool:
    """Whether every field of ``s`` lies in its declared domain."""
    kp = params.kp
    t = params.t_bc
    K = kp.color_space
    col = s.col
    ok = (
        s.lf in LF_VALUES
        and 1 <= s.type < 2 * params.type_threshold
        and 1 <= s.id < 2 * params.id_threshold
        and 1 <= s.pcol <= K
        and s.rc in (0, 1)
        and 0 <= s.timer_lf <= 2 * t
        and 0 <= s.timer_kl <= t
        and 0 <= s.timer_v <= 2 * t
        and 0 <= s.timer_e <= 2 * t
        and 1 <= col.hopcolor <= K
        and len(col.prev) == kp.Delta
        and len(col.stamp) == kp.Delta
        and all(1 <= c <= K for c in col.prev)
        and all(b in (0, 1) for b in col.stamp)
        and 0 <= col.idx <= kp.Delta
    )
    if ok and isinstance(col, DetTwoHopState):
        x = kp.bit_width
        ok = (
            0 <= col.ncolor <= kp.Delta
            and 0 <= col.ncreg < (1 << kp.nc_width)
            and 0 <= col.fill < x
            and 0 <= col.bitpool < (1 << max(col.fill, 0))
            and len(col.ready) <= 2
            and all(0 <= v < (1 << x) for v in col.ready)
        )
    return ok


# --- configuration predicates ------------------------------------------------------


def pcol_consistent(c: Configuration) -> bool:
    """Every agent's pcol equals the current color of its last partner."""
    states = c.states
    for s, w in zip(states, c.last_partner):
        if w < 0 or s.pcol != states[w].col.hopcolor:
            return False
    return True


def in_s_color_prime(c: Configuration, g: Graph) -> bool:
    return check_two_hop(g, [s.col.hopcolor for s in c.states]) and pcol_consistent(c)


def holds_le(c: Configuration) -> bool:
    """Exactly one agent outputs L."""
    return sum(1 for s in c.states if s.lf != F) == 1


def predicates(c: Configuration, params: BCParams, g: Graph) -> dict[str, bool]:
    """Evaluate every configuration set used to reason about convergence."""
    t = params.t_bc
    th = params.type_threshold
    states = c.states
    base = in_s_color_prime(c, g)
    virus = [s for s in states if s.timer_v > 0]
    sets = {
        "KL_zero": all(s.timer_kl == 0 for s in states),
        "B_no": all(s.lf != B for s in states),
        "L_one": sum(1 for s in states if s.lf in LEADERS) == 1,
        "LF_qua": all(2 * s.timer_lf >= t for s in states if s.lf != B),
        "L_v1": any(s.lf == L1 for s in states),
        "V_clean": not virus,
        "V_make": all(
            s.type < th if s.lf == L1 else s.timer_v == 0 for s in states
        ),
        "V_only": len({s.type for s in virus}) <= 1
        and all(s.type >= th for s in states if s.lf == L1),
        "E_half": all(s.timer_e >= t for s in states if s.lf in LEADERS),
    }
    out = {name: base and value for name, value in sets.items()}
    out["S_color_prime"] = base
    out["LE"] = holds_le(c)
    out["S_LE"] = (
        out["B_no"] and out["L_one"] and out["LF_qua"] and out["KL_zero"]
        and (out["V_clean"]
             or (out["L_v1"] and (out["V_make"] or out["V_only"]) and out["E_half"]))
    )
    return out


def s_le_predicate(params: BCParams, g: Graph):
    """Fast membership test for S_LE, for use as an engine predicate."""
    t = params.t_bc
    th = params.type_threshold

    def check(c: Configuration) -> bool:
        states = c.states
        leaders = 0
        l1 = False
        for s in states:
            lf = s.lf
            if lf == B or s.timer_kl:
                return False
            if lf == F:
                if 2 * s.timer_lf < t:
                    return False
            else:
                leaders += 1
                if 2 * s.timer_lf < t:
                    return False
                if lf == L1:
                    l1 = True
        if leaders != 1:
            return False
        if any(s.timer_v for s in states):
            if not l1:
                return False
            v_make = all(s.type < th if s.lf == L1 else s.timer_v == 0 for s in states)
            v_only = (len({s.type for s in states if s.timer_v > 0}) <= 1
                      and all(s.type >= th for s in states if s.lf == L1))
            if not (v_make or v_only):
                return False
            if not all(s.timer_e >= t for s in states if s.lf in LEADERS):
                return False
        return in_s_color_prime(c, g)

    return check


def le_broken(c: Configuration) -> bool:
    return not holds_le(c)

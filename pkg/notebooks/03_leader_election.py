"""Leader election on top of two-hop coloring.

Agents start in arbitrary states.  We wait for the safe set, then count how
long exactly one leader survives.
"""

import numpy as np

from popproto import election as el
from popproto import harness
from popproto.engine import adversarial_config, run_until
from popproto.graph import gen_family, stats

g = gen_family("ring", 6)
params = el.compute_params(g)
print(f"{g.name}: diameter={stats(g).diameter} tau={params.tau} t_bc={params.t_bc}")

p = el.bc_protocol(params)
c0 = adversarial_config(p, g, seed=5)
print("leaders at start:", sum(s.lf != el.F for s in c0.states))

tr = run_until(p, g, c0, {"S_LE": el.s_le_predicate(params, g)}, 10**6, seed=5, stop="S_LE")
print("in S_LE at step", tr.hit("S_LE"))
print("outputs:", "".join(el.output(s) for s in tr.final.states))

window = harness.holding_window(p, g, tr.final, 100_000, seed=6)
print("one leader held for", window, "steps")

# a handful of trials in one go
rs = harness.measure_holding(g, 10, seed=0, holding_budget=20_000)
print("median steps to S_LE:", np.median([r.steps_to_S_LE for r in rs]))
print("full windows:", sum(r.holding_window == 20_000 for r in rs), "/ 10")

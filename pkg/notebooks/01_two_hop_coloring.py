"""Randomized two-hop coloring on a small ring.

Start every agent on the same color, let the randomized protocol run, and
watch the first step at which no agent sees two neighbours sharing a color.
After that point the colors should never move again.
"""

from popproto import coloring as col
from popproto.engine import run_until
from popproto.graph import gen_family

g = gen_family("ring", 8)
kp = col.KnowledgeParams.for_graph(g)
print(f"{g.name}: m={g.m}, color space K={kp.color_space}")

p = col.lru_protocol(kp)
c0 = col.monochrome_config(p, g, seed=1)
preds = {
    "two_hop": lambda c: col.check_two_hop(g, [s.hopcolor for s in c.states]),
    "safe": lambda c: col.lru_safe(g, c.states),
}
tr = run_until(p, g, c0, preds, max_steps=50 * g.m * g.n, seed=1, stop="safe")
print("two-hop colored at step", tr.hit("two_hop"))
print("memory consistent at step", tr.hit("safe"))
print("colors:", [s.hopcolor for s in tr.final.states])
# Adjacent agents may still share a color.  The requirement is only that no
# agent has two neighbours with the same color, so that each agent can tell
# its neighbours apart.

# keep going: a safe configuration is silent for the coloring
colors = [s.hopcolor for s in tr.final.states]
more = run_until(p, g, tr.final, {}, max_steps=20 * g.m * g.n, seed=2)
print("unchanged after", more.steps_taken, "more steps:",
      [s.hopcolor for s in more.final.states] == colors)

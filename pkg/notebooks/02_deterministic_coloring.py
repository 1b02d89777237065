"""Two-hop coloring without any random numbers.

The deterministic variant runs a normal (one-hop) coloring underneath and
uses who wins each comparison as a source of bits.  Feeding the engine a
different number stream must not change a single step.
"""

from popproto import coloring as col
from popproto.engine import run_until
from popproto.graph import gen_family

g = gen_family("star", 7)
kp = col.KnowledgeParams.for_graph(g)
p = col.dlru_protocol(kp)
print(p.name, "deterministic:", p.deterministic, "bits per number:", kp.bit_width)

c0 = col.monochrome_config(p, g, seed=3)
budget = 50 * g.m * (g.n + kp.Delta * kp.bit_width)
preds = {"safe": lambda c: col.dlru_safe(g, c.states)}

a = run_until(p, g, c0, preds, budget, seed=3, stop="safe", number_seed=100)
b = run_until(p, g, c0, preds, budget, seed=3, stop="safe", number_seed=200)
print("safe at step", a.hit("safe"), "of budget", budget)
print("same trace with different numbers:", a.final == b.final and a.hit("safe") == b.hit("safe"))

hub = a.final.states[0]
print("hub normal color", hub.ncolor, "two-hop color", hub.hopcolor)
print("leaf colors", sorted(s.hopcolor for s in a.final.states[1:]))

"""Communication graphs: construction, standard families and statistics."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    """Raised when an edge list does not describe a valid population graph."""


@dataclass(frozen=True)
class GraphStats:
    m: int
    delta: int
    diameter: int


@dataclass(frozen=True, eq=False)
class Graph:
    """Symmetric, simple, connected digraph over agents ``0 .. n-1``.

    ``edges`` holds every ordered pair, so ``m == len(edges)`` counts both
    directions of each undirected link.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)
    name: str = ""

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and set(self.edges) == set(other.edges)

    def __hash__(self):
        return hash((self.n, frozenset(self.edges)))


def build_graph(edge_pairs, n: int | None = None, name: str = "") -> Graph:
    """Build a :class:`Graph` from (possibly one-directional) agent pairs.

    The symmetric closure of ``edge_pairs`` is taken and duplicates are
    dropped.  ``n`` defaults to one more than the largest agent index.
    """
    pairs = [(int(u), int(v)) for u, v in edge_pairs]
    for u, v in pairs:
        if u == v:
            raise GraphError(f"self-loop at agent {u}")
    if n is None:
        n = 1 + max((max(u, v) for u, v in pairs), default=-1)
    if n < 2:
        raise GraphError(f"a population needs at least 2 agents, got n={n}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for u, v in pairs:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) references an agent outside 0..{n - 1}")
        nbrs[u].add(v)
        nbrs[v].add(u)
    adjacency = tuple(tuple(sorted(s)) for s in nbrs)
    if _bfs_eccentricity(adjacency, 0)[1] < n:
        raise GraphError("graph is disconnected")
    edges = tuple((u, v) for u in range(n) for v in adjacency[u])
    return Graph(n=n, edges=edges, adjacency=adjacency, name=name)


def _bfs_eccentricity(adjacency, src):
    """Return (eccentricity of ``src``, number of agents reached)."""
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return max(dist.values()), len(dist)


def gen_family(kind: str, n: int, p: float | None = None, seed: int = 0) -> Graph:
    """Generate one of the standard test families.

    ``kind`` is ``complete``, ``ring``, ``star`` (agent 0 is the hub) or
    ``gnp``.  G(n, p) draws are repeated with an incremented sub-seed until
    the result is connected, so the output is a deterministic function of
    ``(n, p, seed)``.
    """
    if n < 2:
        raise GraphError(f"n must be at least 2, got {n}")
    if kind == "complete":
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    elif kind == "ring":
        if n == 2:
            pairs = [(0, 1)]
        else:
            pairs = [(u, (u + 1) % n) for u in range(n)]
    elif kind == "star":
        pairs = [(0, v) for v in range(1, n)]
    elif kind == "gnp":
        if p is None or not (0 < p <= 1):
            raise GraphError(f"gnp needs 0 < p <= 1, got p={p}")
        return _connected_gnp(n, p, seed)
    else:
        raise GraphError(f"unknown graph family {kind!r}")
    return build_graph(pairs, n=n, name=describe(kind, n, p))


def _connected_gnp(n, p, seed):
    upper = np.triu_indices(n, k=1)
    sub = 0
    while True:
        rng = np.random.default_rng([seed, sub])
        keep = rng.random(len(upper[0])) < p
        pairs = list(zip(upper[0][keep].tolist(), upper[1][keep].tolist()))
        try:
            return build_graph(pairs, n=n, name=describe("gnp", n, p))
        except GraphError:
            sub += 1


def describe(kind: str, n: int, p: float | None = None) -> str:
    if kind == "gnp":
        return f"gnp(n={n},p={p})"
    return f"{kind}(n={n})"


def read_edge_list(path) -> Graph:
    """Read a graph from a text file with one ``u v`` pair per line.

    Blank lines and ``#`` comments are ignored.
    """
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"{path}:{lineno}: expected 'u v', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return build_graph(pairs, name=f"file:{path}")


def write_edge_list(g: Graph, path) -> None:
    lines = [f"{u} {v}" for u, v in g.edges if u < v]
    Path(path).write_text("\n".join(lines) + "\n")


def stats(g: Graph) -> GraphStats:
    diameter = max(_bfs_eccentricity(g.adjacency, u)[0] for u in range(g.n))
    delta = max(len(a) for a in g.adjacency)
    return GraphStats(m=g.m, delta=delta, diameter=diameter)

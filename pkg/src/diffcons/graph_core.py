"""Lattice-core topologies, weighted Laplacians and closed-form optimal weights."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "Topology",
    "CoreTopology",
    "WeightedGraph",
    "build_laplacian",
    "optimal_core_weights",
    "lambda2_closed_form",
    "budget_for",
    "read_graph",
    "write_graph",
]


class Topology(str, Enum):
    PATH = "path"
    CYCLE = "cycle"
    COMPLETE = "complete"
    STAR = "star"
    LOLLIPOP = "lollipop"
    PAW = "paw"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on vertices 0..n-1 with non-negative edge weights.

    Edges are stored as (i, j, w) with i < j.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        norm = []
        seen = set()
        for i, j, w in self.edges:
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if i == j or i < 0 or j >= self.n:
                raise ValueError(f"invalid edge ({i}, {j}) for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if w < 0 or not math.isfinite(w):
                raise ValueError(f"edge ({i}, {j}) has invalid weight {w}")
            seen.add((i, j))
            norm.append((i, j, float(w)))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return math.fsum(w for _, _, w in self.edges)

    def weight_map(self) -> dict[tuple[int, int], float]:
        return {(i, j): w for i, j, w in self.edges}

    def is_connected(self) -> bool:
        """Connectivity through edges of strictly positive weight."""
        if self.n <= 1:
            return True
        adj = [[] for _ in range(self.n)]
        for i, j, w in self.edges:
            if w > 0:
                adj[i].append(j)
                adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n


@dataclass(frozen=True)
class CoreTopology:
    kind: Topology
    n: int
    custom_edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "kind", Topology(self.kind))
        if self.n < 2:
            raise ValueError("a lattice core needs at least two vertices")
        if self.kind in (Topology.LOLLIPOP, Topology.PAW) and self.n != 4:
            raise ValueError(f"{self.kind.value} is only defined for n = 4")
        if self.kind == Topology.CYCLE and self.n < 3:
            raise ValueError("a cycle needs at least three vertices")

    def edge_list(self) -> list[tuple[int, int]]:
        n = self.n
        k = self.kind
        if k == Topology.PATH:
            return [(i, i + 1) for i in range(n - 1)]
        if k == Topology.CYCLE:
            return [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
        if k == Topology.COMPLETE:
            return [(i, j) for i in range(n) for j in range(i + 1, n)]
        if k == Topology.STAR:
            return [(0, j) for j in range(1, n)]
        if k == Topology.LOLLIPOP:
            # triangle 0-1-2 with pendant vertex 3 hanging off vertex 2
            return [(0, 1), (0, 2), (1, 2), (2, 3)]
        if k == Topology.PAW:
            # 4-cycle 0-1-2-3 plus the chord 0-2
            return [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]
        return list(self.custom_edges)

    @property
    def n_edges(self) -> int:
        return len(self.edge_list())


def budget_for(topology: CoreTopology, rule) -> float:
    """Resolve a budget rule: "vertices", "edges" or an explicit number."""
    if rule in ("vertices", "V", "|V|"):
        return float(topology.n)
    if rule in ("edges", "E", "|E|"):
        return float(topology.n_edges)
    value = float(rule)
    if not value > 0:
        raise ValueError("weight budget must be positive")
    return value


def build_laplacian(g: WeightedGraph) -> np.ndarray:
    L = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def _path_weights(n: int, d: float) -> list[float]:
    """Optimal path weights listed in vertex order along the path."""
    denom = 2.0 * n * (n * n - 1)
    out = []
    for e in range(n - 1):
        # e-th edge joins vertices e and e+1; its midpoint sits at e + 1/2
        offset = abs(2 * e + 1 - (n - 1))  # = 2 * distance to the path centre
        out.append(3.0 * d * (n * n - offset * offset) / denom)
    return out


def optimal_core_weights(t: CoreTopology, d_l: float) -> WeightedGraph:
    """Optimal core weights under the edge-weight budget ``d_l``.

    The path weights follow w = 3 D (N^2 - s^2) / (2 N (N^2 - 1)) where s is
    twice the distance of the edge midpoint to the path centre; this covers
    both the even and odd vertex-count formulas.
    """
    if not d_l > 0:
        raise ValueError("weight budget must be positive")
    n = t.n
    edges = t.edge_list()
    if t.kind == Topology.PATH:
        ws = _path_weights(n, d_l)
    elif t.kind == Topology.CYCLE:
        ws = [d_l / n] * len(edges)
    elif t.kind == Topology.COMPLETE:
        ws = [2.0 * d_l / (n * (n - 1))] * len(edges)
    elif t.kind == Topology.STAR:
        ws = [d_l / (n - 1)] * len(edges)
    elif t.kind == Topology.LOLLIPOP:
        # reference labels: w_-1 on the triangle edge opposite the pendant,
        # w_0 on the two triangle edges at the attachment vertex, w_1 on the
        # pendant.  These sum to (9 - sqrt 3) / 6 * D_L, above the budget.
        w_m1 = d_l * (2.0 - math.sqrt(3.0)) / 6.0
        w_0 = d_l / 3.0
        w_1 = d_l / 2.0
        ws = [w_m1, w_0, w_0, w_1]
    elif t.kind == Topology.PAW:
        ws = [d_l / 4.0] * 4 + [0.0]
    else:
        raise ValueError(f"no closed-form optimal weights for {t.kind.value}")
    return WeightedGraph(n, tuple((i, j, w) for (i, j), w in zip(edges, ws)))


def lambda2_closed_form(t: CoreTopology, d_l: float) -> float:
    n = t.n
    if t.kind == Topology.COMPLETE:
        return 2.0 * d_l / (n - 1)
    if t.kind == Topology.PATH:
        return 12.0 * d_l / (n * (n * n - 1))
    if t.kind == Topology.CYCLE:
        return 2.0 * d_l * (1.0 - math.cos(2.0 * math.pi / n)) / n
    raise ValueError(f"no closed-form lambda_2 for {t.kind.value}")


def read_graph(path) -> WeightedGraph:
    """Read the plain-text format: "n m" then m lines "i j w" (0-based)."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty graph file")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"{path}: header announces {m} edges, found {len(body)}")
    return WeightedGraph(n, tuple((int(i), int(j), float(w)) for i, j, w in body))


def write_graph(g: WeightedGraph, path) -> None:
    rows = [f"{g.n} {g.m}"] + [f"{i} {j} {w!r}" for i, j, w in g.edges]
    Path(path).write_text("\n".join(rows) + "\n")

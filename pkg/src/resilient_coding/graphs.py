"""Confusability graphs of the deviating component and their exact colorings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .probability import SUPPORT_TOL, Channel

if TYPE_CHECKING:
    from .rate import SourceModel


@dataclass(frozen=True)
class DeviationGraph:
    vertex_count: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("graph needs at least one vertex")
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.vertex_count - 1}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DeviationGraph":
        return cls(n, frozenset(edges))

    @classmethod
    def complete(cls, n: int) -> "DeviationGraph":
        return cls(n, frozenset((u, v) for u in range(n) for v in range(u + 1, n)))

    @classmethod
    def cycle(cls, n: int) -> "DeviationGraph":
        return cls(n, frozenset((i, (i + 1) % n) for i in range(n)))

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def with_edge(self, u: int, v: int) -> "DeviationGraph":
        return DeviationGraph(self.vertex_count, self.edges | {(min(u, v), max(u, v))})


@dataclass(frozen=True)
class Coloring:
    colors: tuple[int, ...]

    @property
    def color_count(self) -> int:
        return len(set(self.colors))

    def is_proper(self, g: DeviationGraph) -> bool:
        return all(self.colors[u] != self.colors[v] for u, v in g.edges)


def build_deviation_graph(model: "SourceModel", ch: Channel, k: int,
                          support_tol: float = SUPPORT_TOL) -> DeviationGraph:
    """Join x_k and x_k' when some supported profile of the other components
    lets both produce a common signal with positive probability."""
    axes = tuple(model.alphabets)
    if tuple(ch.input_axes) != axes:
        raise ValueError(f"channel input axes {ch.input_axes} do not match model alphabets {axes}")
    if not 0 <= k < len(axes):
        raise IndexError(f"component {k} out of range")
    block = ch.matrix.reshape(axes + (ch.output_size,))
    block = np.moveaxis(block, k, 0).reshape(axes[k], -1, ch.output_size)
    supported = model.others(k).probs > support_tol
    pos = (block[:, supported, :] > support_tol).reshape(axes[k], -1).astype(np.int64)
    shared = pos @ pos.T
    n = axes[k]
    edges = {(u, v) for u in range(n) for v in range(u + 1, n) if shared[u, v] > 0}
    return DeviationGraph(n, frozenset(edges))


def _max_clique(adj: list[set[int]]) -> int:
    best = 0

    def expand(r: int, p: set[int], x: set[int]):
        nonlocal best
        if not p and not x:
            best = max(best, r)
            return
        if r + len(p) <= best:
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in sorted(p - adj[pivot]):
            expand(r + 1, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand(0, set(range(len(adj))), set())
    return best


def clique_lower_bound(g: DeviationGraph) -> int:
    return max(1, _max_clique(g.adjacency()))


def _greedy(g: DeviationGraph) -> list[int]:
    adj = g.adjacency()
    colors = [-1] * g.vertex_count
    for v in range(g.vertex_count):
        taken = {colors[u] for u in adj[v] if colors[u] >= 0}
        c = 0
        while c in taken:
            c += 1
        colors[v] = c
    return colors


def greedy_upper_bound(g: DeviationGraph) -> int:
    return max(_greedy(g)) + 1


def _try_color(adj: list[set[int]], order: list[int], budget: int) -> list[int] | None:
    colors = [-1] * len(adj)

    def place(i: int, used: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        taken = {colors[u] for u in adj[v]}
        # a fresh color is interchangeable with any other fresh one
        for c in range(min(used + 1, budget)):
            if c in taken:
                continue
            colors[v] = c
            if place(i + 1, max(used, c + 1)):
                return True
        colors[v] = -1
        return False

    return colors if place(0, 0) else None


def _canonical(colors: list[int]) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    return tuple(relabel.setdefault(c, len(relabel)) for c in colors)


def chromatic_number(g: DeviationGraph) -> tuple[int, Coloring]:
    """Exact chromatic number with a witness coloring.

    Witness colors are relabelled by first appearance in vertex order so the
    output is reproducible.
    """
    adj = g.adjacency()
    lo, hi = clique_lower_bound(g), greedy_upper_bound(g)
    order = sorted(range(g.vertex_count), key=lambda v: (-len(adj[v]), v))
    for budget in range(lo, hi):
        found = _try_color(adj, order, budget)
        if found is not None:
            return budget, Coloring(_canonical(found))
    return hi, Coloring(_canonical(_greedy(g)))


def to_edge_list(g: DeviationGraph, labels=None) -> str:
    name = (lambda i: str(labels[i])) if labels is not None else str
    return "".join(f"{name(u)} {name(v)}\n" for u, v in g.sorted_edges())


def from_edge_list(text: str, vertex_count: int, labels=None) -> DeviationGraph:
    index = {str(l): i for i, l in enumerate(labels)} if labels is not None else None
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        if index is not None:
            unknown = [p for p in parts if p not in index]
            if unknown:
                raise ValueError(f"line {lineno}: unknown vertex label {unknown[0]!r}")
            u, v = index[parts[0]], index[parts[1]]
        else:
            u, v = int(parts[0]), int(parts[1])
        edges.append((u, v))
    return DeviationGraph.from_edges(vertex_count, edges)

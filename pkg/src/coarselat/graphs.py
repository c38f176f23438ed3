"""Simple undirected graphs on a window, BFS helpers and seeded generators."""

import itertools
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .relations import RelationError, Window, bits_of


class GraphError(ValueError):
    pass


class DisconnectedGraph(GraphError):
    def __init__(self, u, v):
        super().__init__(f"graph is disconnected: no path between {u} and {v}")
        self.pair = (u, v)


@dataclass(frozen=True, eq=False)
class Graph:
    window: Window
    edges: tuple  # sorted (u, v) with u < v
    adjacency: tuple  # sorted neighbor tuples

    @classmethod
    def from_edges(cls, n_or_window, edges: Iterable) -> "Graph":
        window = n_or_window if isinstance(n_or_window, Window) else Window(n_or_window)
        seen = set()
        for u, v in edges:
            try:
                window.check_point(u)
                window.check_point(v)
            except RelationError as exc:
                raise GraphError(str(exc)) from None
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"repeated edge {key}")
            seen.add(key)
        nbrs = [[] for _ in range(window.size)]
        for u, v in seen:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return cls(window, tuple(sorted(seen)), tuple(tuple(sorted(a)) for a in nbrs))

    @property
    def n(self) -> int:
        return self.window.size

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def adjacency_masks(self) -> list:
        return [bits_of(a) for a in self.adjacency]

    def bfs(self, source: int, limit: Optional[int] = None) -> list:
        """Distances from ``source``; ``-1`` for unreached vertices."""
        dist = [-1] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if limit is not None and dist[u] >= limit:
                continue
            for w in self.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    def check_connected(self) -> None:
        if self.n == 0:
            return
        dist = self.bfs(0)
        for v, d in enumerate(dist):
            if d < 0:
                raise DisconnectedGraph(0, v)

    def is_connected(self) -> bool:
        return self.n == 0 or min(self.bfs(0)) >= 0

    def distance_matrix(self) -> np.ndarray:
        """All-pairs path distances as an int array, ``-1`` where unreachable."""
        if self.n == 0:
            return np.zeros((0, 0), dtype=np.int64)
        if self.edges:
            u, v = np.array(self.edges).T
        else:
            u = v = np.array([], dtype=np.int64)
        mat = csr_matrix((np.ones(len(u)), (u, v)), shape=(self.n, self.n))
        dist = shortest_path(mat, directed=False, unweighted=True)
        out = np.where(np.isinf(dist), -1, dist).astype(np.int64)
        return out

    def induced_components(self, vertices: Iterable[int]) -> list:
        """Connected components of the induced subgraph, each sorted, ordered by minimum."""
        vs = set(vertices)
        comps = []
        seen = set()
        for s in sorted(vs):
            if s in seen:
                continue
            comp = [s]
            seen.add(s)
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if w in vs and w not in seen:
                        seen.add(w)
                        comp.append(w)
                        queue.append(w)
            comps.append(tuple(sorted(comp)))
        return comps


# ---------------------------------------------------------------- generators

def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a simple cycle needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def grid_window(lows, highs) -> Window:
    """Integer box ``prod [lo_i, hi_i)`` with points in lexicographic order."""
    coords = tuple(itertools.product(*(range(lo, hi) for lo, hi in zip(lows, highs))))
    return Window(len(coords), coords=coords)


def grid_graph(lows, highs) -> Graph:
    """Unit-step (l1) graph on an integer box."""
    window = grid_window(lows, highs)
    sides = [hi - lo for lo, hi in zip(lows, highs)]
    strides = [1] * len(sides)
    for i in range(len(sides) - 2, -1, -1):
        strides[i] = strides[i + 1] * sides[i + 1]
    edges = []
    for idx, c in enumerate(window.coords):
        for axis, stride in enumerate(strides):
            if c[axis] + 1 < highs[axis]:
                edges.append((idx, idx + stride))
    return Graph.from_edges(window, edges)


def random_tree(n: int, rng: random.Random) -> Graph:
    """Uniform random recursive tree: vertex i attaches to a random earlier vertex."""
    return Graph.from_edges(n, [(rng.randrange(i), i) for i in range(1, n)])


def random_connected_graph(n: int, m: int, rng: random.Random) -> Graph:
    """Random spanning tree plus ``m - (n - 1)`` extra distinct edges."""
    max_edges = n * (n - 1) // 2
    if not n - 1 <= m <= max_edges:
        raise GraphError(f"cannot build a simple connected graph with {n} vertices and {m} edges")
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        u, v = order[rng.randrange(i)], order[i]
        edges.add((min(u, v), max(u, v)))
    while len(edges) < m:
        u, v = rng.sample(range(n), 2)
        edges.add((min(u, v), max(u, v)))
    return Graph.from_edges(n, sorted(edges))


def random_regular_graph(n: int, d: int, rng: random.Random, attempts: int = 200) -> Graph:
    """Configuration-model d-regular simple graph (retries on loops/multi-edges)."""
    if n * d % 2 or d >= n:
        raise GraphError("no simple d-regular graph with these parameters")
    for _ in range(attempts):
        stubs = [v for v in range(n) for _ in range(d)]
        rng.shuffle(stubs)
        edges = set()
        ok = True
        for i in range(0, len(stubs), 2):
            u, v = stubs[i], stubs[i + 1]
            key = (min(u, v), max(u, v))
            if u == v or key in edges:
                ok = False
                break
            edges.add(key)
        if ok:
            g = Graph.from_edges(n, sorted(edges))
            if g.is_connected():
                return g
    raise GraphError("failed to sample a connected simple regular graph")

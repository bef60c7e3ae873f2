"""Undirected simple graphs with CSR adjacency.

Vertices are ``0..n-1`` internally. The text format used on disk is 1-based::

    n m
    i j
    ...
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import GraphError

__all__ = [
    "Graph",
    "ComponentLabeling",
    "degree",
    "components",
    "cycles_up_to",
    "find_cycle",
    "bfs_distances",
    "is_bipartite",
    "complete_graph",
    "read_graph",
    "write_graph",
]

# cycles_up_to is exhaustive DFS; path counts grow like d**max_len, so lengths
# beyond ~10 are only practical on very sparse graphs.
CYCLE_LEN_WARN = 10


class Graph:
    """Immutable undirected simple graph.

    Edges are kept as a sorted ``(m, 2)`` array with ``i < j`` (the canonical
    edge order) plus CSR adjacency with sorted neighbor lists. ``edge_ids``
    maps every CSR slot back to its row in ``edges`` so per-edge data can be
    laid out along adjacency rows.
    """

    __slots__ = ("n", "edges", "indptr", "indices", "edge_ids")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = ()):
        n = int(n)
        if n < 1:
            raise GraphError(f"vertex count must be positive, got {n}")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise GraphError("edges must be a sequence of vertex pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise GraphError(f"edge endpoint out of range for n={n}")
        if np.any(arr[:, 0] == arr[:, 1]):
            bad = arr[arr[:, 0] == arr[:, 1]][0]
            raise GraphError(f"self-loop at vertex {int(bad[0])}")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        order = np.lexsort((hi, lo))
        canon = np.stack([lo[order], hi[order]], axis=1)
        if len(canon) > 1:
            dup = np.all(canon[1:] == canon[:-1], axis=1)
            if dup.any():
                i, j = canon[1:][dup][0]
                raise GraphError(f"duplicate edge ({int(i)}, {int(j)})")

        m = len(canon)
        src = np.concatenate([canon[:, 0], canon[:, 1]])
        dst = np.concatenate([canon[:, 1], canon[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])

        self.n = n
        self.edges = canon
        self.indptr = indptr
        self.indices = dst[order].astype(np.int64)
        self.edge_ids = eid[order].astype(np.int64)
        for a in (self.edges, self.indptr, self.indices, self.edge_ids):
            a.flags.writeable = False

    @property
    def vertex_count(self) -> int:
        return self.n

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.edges.tobytes()))

    def _check(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for n={self.n}")
        return v

    def neighbors(self, v: int) -> np.ndarray:
        v = self._check(v)
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        v = self._check(v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, i: int, j: int) -> bool:
        nb = self.neighbors(i)
        k = np.searchsorted(nb, j)
        return bool(k < len(nb) and nb[k] == j)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}

    def induced(self, vertices: Iterable[int]) -> tuple[Graph, np.ndarray]:
        """Subgraph induced by ``vertices``.

        Returns the subgraph (relabelled ``0..k-1`` in ascending original
        order) and the array of original labels, so ``labels[new] == old``.
        """
        keep = np.zeros(self.n, dtype=bool)
        keep[np.asarray(list(vertices), dtype=np.int64)] = True
        labels = np.flatnonzero(keep)
        if len(labels) == 0:
            raise GraphError("induced subgraph on an empty vertex set")
        new_id = np.full(self.n, -1, dtype=np.int64)
        new_id[labels] = np.arange(len(labels))
        mask = keep[self.edges[:, 0]] & keep[self.edges[:, 1]]
        sub = new_id[self.edges[mask]]
        return Graph(len(labels), sub), labels


def degree(g: Graph, v: int) -> int:
    return g.degree(v)


def complete_graph(n: int) -> Graph:
    i, j = np.triu_indices(n, k=1)
    return Graph(n, np.stack([i, j], axis=1))


@dataclass(frozen=True)
class ComponentLabeling:
    component_id: np.ndarray
    component_sizes: list[int]

    @property
    def count(self) -> int:
        return len(self.component_sizes)

    @property
    def is_connected(self) -> bool:
        return self.count == 1


def components(g: Graph) -> ComponentLabeling:
    """Label connected components by BFS in ascending vertex order.

    Component ids are assigned in order of each component's smallest vertex.
    """
    comp = np.full(g.n, -1, dtype=np.int64)
    sizes: list[int] = []
    indptr, indices = g.indptr, g.indices
    for s in range(g.n):
        if comp[s] >= 0:
            continue
        cid = len(sizes)
        comp[s] = cid
        size = 1
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in indices[indptr[u] : indptr[u + 1]]:
                if comp[w] < 0:
                    comp[w] = cid
                    size += 1
                    queue.append(w)
        sizes.append(size)
    return ComponentLabeling(comp, sizes)


def bfs_distances(g: Graph, sources: Iterable[int]) -> np.ndarray:
    """Hop distance from the nearest source; ``-1`` where unreachable."""
    dist = np.full(g.n, -1, dtype=np.int64)
    queue: deque[int] = deque()
    for s in sources:
        s = g._check(s)
        if dist[s] < 0:
            dist[s] = 0
            queue.append(s)
    indptr, indices = g.indptr, g.indices
    while queue:
        u = queue.popleft()
        for w in indices[indptr[u] : indptr[u + 1]]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def is_bipartite(g: Graph) -> bool:
    color = np.full(g.n, -1, dtype=np.int8)
    indptr, indices = g.indptr, g.indices
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in indices[indptr[u] : indptr[u + 1]]:
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return False
    return True


def _cycles_from(g: Graph, start: int, max_len: int, exact: int | None) -> Iterator[list[int]]:
    # Paths only visit vertices > start, so every cycle is produced from its
    # smallest vertex; requiring path[1] < path[-1] drops the reversed copy.
    indptr, indices = g.indptr, g.indices
    path = [start]
    on_path = {start}
    iters = [iter(indices[indptr[start] : indptr[start + 1]])]
    while iters:
        advanced = False
        for w in iters[-1]:
            w = int(w)
            if w == start:
                if len(path) >= 3 and path[1] < path[-1] and (exact is None or len(path) == exact):
                    yield list(path)
                continue
            if w < start or w in on_path or len(path) >= max_len:
                continue
            path.append(w)
            on_path.add(w)
            iters.append(iter(indices[indptr[w] : indptr[w + 1]]))
            advanced = True
            break
        if not advanced:
            iters.pop()
            on_path.discard(path.pop())


def cycles_up_to(g: Graph, max_len: int) -> list[list[int]]:
    """Every simple cycle of length <= ``max_len``, each exactly once.

    A cycle is reported in canonical form: it starts at its smallest vertex
    and is oriented so that the second vertex is smaller than the last. The
    list is sorted by length, then lexicographically.
    """
    if max_len < 3:
        raise ValueError(f"max_len must be >= 3, got {max_len}")
    out = []
    for s in range(g.n):
        out.extend(_cycles_from(g, s, max_len, None))
    out.sort(key=lambda c: (len(c), c))
    return out


def find_cycle(g: Graph, length: int) -> list[int] | None:
    """Return one simple cycle of exactly ``length`` vertices, or None."""
    if length < 3:
        raise ValueError(f"cycle length must be >= 3, got {length}")
    if length % 2 == 1 and is_bipartite(g):
        return None
    for s in range(g.n):
        for cyc in _cycles_from(g, s, length, length):
            return cyc
    return None


def read_graph(path: str | Path) -> Graph:
    """Load the 1-based ``n m`` / ``i j`` text format, validating simplicity."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise GraphError(f"{path}: empty graph file")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"{path}: header says {m} edges, found {len(body)}")
    edges = [(int(a) - 1, int(b) - 1) for a, b, *_ in body]
    return Graph(n, edges)


def write_graph(g: Graph, path: str | Path) -> None:
    rows = [f"{g.n} {g.edge_count}"]
    rows.extend(f"{i + 1} {j + 1}" for i, j in g.edges)
    Path(path).write_text("\n".join(rows) + "\n")

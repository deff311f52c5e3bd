"""Graph representation, parsing, and BFS level decomposition.

The network is a simple connected undirected graph over dense node ids
0..n-1.  Ids exist purely for bookkeeping: the distributed protocol never
reads them.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Tuple


class GraphFormatError(ValueError):
    """Raised when a graph file or edge list is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Graph:
    """Validated simple connected undirected graph.

    Attributes:
        n: number of nodes (ids 0..n-1).
        edges: sorted tuple of (u, v) pairs with u < v.
        adj: per-node sorted neighbor tuples.
    """

    n: int
    edges: Tuple[Tuple[int, int], ...]
    adj: Tuple[Tuple[int, ...], ...]

    @staticmethod
    def from_edges(n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        """Build and validate a Graph from an edge list."""
        if n < 1:
            raise GraphFormatError(f"node count must be >= 1, got {n}")
        seen = set()
        norm = []
        for u, v in edges:
            if not (0 <= u < n) or not (0 <= v < n):
                raise GraphFormatError(f"node id out of range in edge ({u}, {v})")
            if u == v:
                raise GraphFormatError(f"self-loop at node {u}")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise GraphFormatError(f"duplicate edge ({e[0]}, {e[1]})")
            seen.add(e)
            norm.append(e)
        norm.sort()
        neighbors = [[] for _ in range(n)]
        for u, v in norm:
            neighbors[u].append(v)
            neighbors[v].append(u)
        g = Graph(n=n, edges=tuple(norm), adj=tuple(tuple(sorted(ns)) for ns in neighbors))
        if not g.is_connected():
            raise GraphFormatError("graph is not connected")
        return g

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max(len(ns) for ns in self.adj)

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for w in self.adj[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.n

    def bfs_levels(self, source: int) -> list[int]:
        """BFS distance from source for every node."""
        dist = [-1] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    def diameter(self) -> int:
        """Exact diameter via BFS from every node."""
        best = 0
        for v in range(self.n):
            best = max(best, max(self.bfs_levels(v)))
        return best

    def to_text(self) -> str:
        """Serialize in the graph file format."""
        lines = [f"{self.n} {len(self.edges)}"]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    """Parse the graph file format: '# comment' lines, 'n m' header, then m edges.

    Every validation failure reports the offending line number.
    """
    header: tuple[int, int] | None = None
    header_line = 0
    edges: list[tuple[int, int]] = []
    edge_lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected two fields, got {len(parts)}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"non-integer field in {parts!r}", lineno) from None
        if header is None:
            header = (a, b)
            header_line = lineno
        else:
            edges.append((a, b))
            edge_lines.append(lineno)
    if header is None:
        raise GraphFormatError("missing 'n m' header line")
    n, m = header
    if n < 1:
        raise GraphFormatError(f"node count must be >= 1, got {n}", header_line)
    if m != len(edges):
        raise GraphFormatError(
            f"header declares {m} edges but file contains {len(edges)}", header_line
        )
    seen: dict[tuple[int, int], int] = {}
    for (u, v), lineno in zip(edges, edge_lines):
        if not (0 <= u < n) or not (0 <= v < n):
            raise GraphFormatError(f"node id out of range in edge ({u}, {v})", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at node {u}", lineno)
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise GraphFormatError(
                f"duplicate edge ({e[0]}, {e[1]}), first seen at line {seen[e]}", lineno
            )
        seen[e] = lineno
    try:
        return Graph.from_edges(n, edges)
    except GraphFormatError as exc:
        if exc.line is None:
            raise GraphFormatError(str(exc)) from None
        raise


@dataclass(frozen=True)
class LevelDecomposition:
    """BFS layering from a maximum-degree root.

    Attributes:
        root: the chosen root r (lowest id among maximum-degree nodes).
        level: per-node BFS distance from root.
        h: maximum level (eccentricity of root).
        levels: node sets V(0)..V(h), each sorted.
        delta: maximum degree of the graph.
    """

    root: int
    level: Tuple[int, ...]
    h: int
    levels: Tuple[Tuple[int, ...], ...]
    delta: int

    def nodes_at_or_below(self, l: int) -> int:
        """Count of nodes at levels >= l."""
        return sum(len(vs) for vs in self.levels[l:])


def decompose(g: Graph) -> LevelDecomposition:
    """Pick the lowest-id maximum-degree node as root and layer the graph by BFS."""
    delta = g.max_degree()
    root = min(v for v in range(g.n) if g.degree(v) == delta)
    dist = g.bfs_levels(root)
    h = max(dist)
    levels: list[list[int]] = [[] for _ in range(h + 1)]
    for v in range(g.n):
        levels[dist[v]].append(v)
    return LevelDecomposition(
        root=root,
        level=tuple(dist),
        h=h,
        levels=tuple(tuple(vs) for vs in levels),
        delta=delta,
    )

"""Seeded graph generators for reproducible corpora."""
from __future__ import annotations

import random
from typing import List, Tuple

from .graphs import Graph
from .history_lab import build_family


def star(delta: int) -> Graph:
    """K(1, delta): center 0, leaves 1..delta."""
    if delta < 1:
        raise ValueError("a star needs delta >= 1")
    return Graph.from_edges(delta + 1, [(0, v) for v in range(1, delta + 1)])


def path(n: int) -> Graph:
    if n < 2:
        raise ValueError("a path needs n >= 2")
    return Graph.from_edges(n, [(v, v + 1) for v in range(n - 1)])


def random_tree(n: int, delta_cap: int, seed: int) -> Graph:
    """Uniform attachment tree: node k joins a uniformly random node of
    degree < delta_cap among 0..k-1."""
    if n < 2:
        raise ValueError("random trees need n >= 2")
    if delta_cap < 2 and n > 2:
        raise ValueError(f"delta cap {delta_cap} cannot host a tree on {n} nodes")
    rng = random.Random(seed)
    degree = [0] * n
    edges: List[Tuple[int, int]] = []
    for k in range(1, n):
        hosts = [v for v in range(k) if degree[v] < delta_cap]
        if not hosts:
            raise ValueError(f"delta cap {delta_cap} exhausted at node {k}")
        host = rng.choice(hosts)
        edges.append((host, k))
        degree[host] += 1
        degree[k] += 1
    return Graph.from_edges(n, edges)


def random_connected_graph(n: int, delta_cap: int, seed: int, extra_edges: int | None = None) -> Graph:
    """Random spanning tree plus extra random edges under the degree cap."""
    if extra_edges is None:
        extra_edges = n // 3
    rng = random.Random(seed)
    base = random_tree(n, delta_cap, rng.randrange(2**32))
    degree = [base.degree(v) for v in range(n)]
    edges = set(base.edges)
    added = 0
    attempts = 0
    while added < extra_edges and attempts < 20 * max(1, extra_edges):
        attempts += 1
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        e = (u, v) if u < v else (v, u)
        if e in edges or degree[u] >= delta_cap or degree[v] >= delta_cap:
            continue
        edges.add(e)
        degree[u] += 1
        degree[v] += 1
        added += 1
    return Graph.from_edges(n, sorted(edges))


def family_member(delta: int, index: int) -> Graph:
    """The double star with `index` extra hub leaves, as a plain graph."""
    for tree in build_family(delta):
        if tree.i == index:
            return tree.graph
    lo, hi = delta // 2, delta - 1
    raise ValueError(f"index {index} outside the family range {lo}..{hi} for delta {delta}")

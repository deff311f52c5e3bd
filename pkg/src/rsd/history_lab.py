"""Executable lower-bound laboratory.

The hard instances are double stars: a center r of degree Delta with one
distinguished leaf a that carries i extra leaves, for floor(Delta/2) <= i
<= Delta-1.  Any size discovery algorithm is a deterministic function of a
node's history: its label followed by one entry per round (a received
history, a collision mark, or a silence mark).  Two leaves with equal
labels stay forever indistinguishable, and two trees whose per-label leaf
occupancies (none / one / many) agree give their centers identical
histories.  Counting patterns therefore bounds the number of center
histories by z^2 * 3^(2z) for z possible labels, which an exact big-integer
evaluation makes checkable.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .graphs import Graph
from .radio import COLLISION, Heard, Opaque, resolve_round

LAMBDA = "lambda"
STAR = "star"
SUB = "sub"


@dataclass(frozen=True)
class FamilyTree:
    """One double star: center r (id 0), hub leaf a (id 1), R = r's other
    leaves, A = a's extra leaves."""

    delta: int
    i: int
    graph: Graph
    r: int
    a: int
    leaves_r: Tuple[int, ...]
    leaves_a: Tuple[int, ...]

    @property
    def n(self) -> int:
        return self.graph.n


def build_family(delta: int) -> List[FamilyTree]:
    """All members for one maximum degree; i ranges over floor(Delta/2)..Delta-1."""
    if delta < 2:
        raise ValueError(f"the family needs delta >= 2, got {delta}")
    trees = []
    for i in range(delta // 2, delta):
        n = delta + i + 1
        edges = [(0, v) for v in range(1, delta + 1)]
        edges += [(1, v) for v in range(delta + 1, delta + 1 + i)]
        g = Graph.from_edges(n, edges)
        trees.append(
            FamilyTree(
                delta=delta,
                i=i,
                graph=g,
                r=0,
                a=1,
                leaves_r=tuple(range(2, delta + 1)),
                leaves_a=tuple(range(delta + 1, delta + 1 + i)),
            )
        )
    return trees


class HistoryTable:
    """Hash-consed history store: equal structures share one integer handle."""

    def __init__(self):
        self._intern: Dict[tuple, int] = {}
        self._digests: List[str] = []

    def leaf(self, label: str) -> int:
        return self._get(("leaf", label))

    def extend(self, prev: int, event: str, sub: Optional[int] = None) -> int:
        key = (event, prev) if sub is None else (event, prev, sub)
        return self._get(key)

    def _get(self, key: tuple) -> int:
        hid = self._intern.get(key)
        if hid is None:
            hid = len(self._digests)
            self._intern[key] = hid
            material = "|".join(
                self._digests[part] if isinstance(part, int) else str(part) for part in key
            )
            self._digests.append(hashlib.blake2b(material.encode(), digest_size=16).hexdigest())
        return hid

    def digest(self, hid: int) -> str:
        return self._digests[hid]


Automaton = Callable[[str], bool]  # history digest -> transmit?


def seeded_automaton(seed: int) -> Automaton:
    """Deterministic pseudo-random map from history digests to actions."""

    prefix = f"auto:{seed}:".encode()

    def act(digest: str) -> bool:
        return hashlib.blake2b(prefix + digest.encode(), digest_size=1).digest()[0] & 1 == 1

    return act


def compute_histories(
    tree: FamilyTree,
    labeling: Dict[int, str],
    automaton: Automaton,
    rounds: int,
    table: Optional[HistoryTable] = None,
) -> List[Dict[int, int]]:
    """Histories of every node for t = 0..rounds, as interned handles.

    Round t+1 actions are the automaton applied to round-t histories; the
    new entry is the transmitter's history when exactly one neighbor
    transmits, a collision mark for two or more, and a silence mark
    otherwise (transmitters record silence themselves).
    """
    table = table if table is not None else HistoryTable()
    g = tree.graph
    current = {v: table.leaf(labeling[v]) for v in range(g.n)}
    out = [dict(current)]
    for _t in range(rounds):
        actions = {
            v: Opaque(str(current[v])) if automaton(table.digest(current[v])) else None
            for v in range(g.n)
        }
        obs = resolve_round(g, actions)
        nxt = {}
        for v in range(g.n):
            o = obs[v]
            if isinstance(o, Heard):
                nxt[v] = table.extend(current[v], SUB, int(o.message.payload))
            elif o is COLLISION:
                nxt[v] = table.extend(current[v], STAR)
            else:
                nxt[v] = table.extend(current[v], LAMBDA)
        current = nxt
        out.append(dict(current))
    return out


# --- patterns and counting ---------------------------------------------------


def label_universe(beta: int) -> Tuple[str, ...]:
    """All binary strings of length <= beta, shortest first then lexicographic."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    out: List[str] = [""]
    for length in range(1, beta + 1):
        out.extend(format(val, f"0{length}b") for val in range(2**length))
    return tuple(out)


@dataclass(frozen=True)
class Pattern:
    """Center and hub labels plus per-label occupancy (0, 1, or 2-for-many)."""

    r_label: str
    r_occupancy: Tuple[int, ...]
    a_label: str
    a_occupancy: Tuple[int, ...]


def pattern_of(tree: FamilyTree, labeling: Dict[int, str], beta: int) -> Pattern:
    universe = label_universe(beta)
    index = {lab: k for k, lab in enumerate(universe)}

    def occupancy(nodes: Sequence[int]) -> Tuple[int, ...]:
        counts = [0] * len(universe)
        for v in nodes:
            counts[index[labeling[v]]] += 1
        return tuple(min(c, 2) for c in counts)

    return Pattern(
        r_label=labeling[tree.r],
        r_occupancy=occupancy(tree.leaves_r),
        a_label=labeling[tree.a],
        a_occupancy=occupancy(tree.leaves_a),
    )


def pattern_bound(beta: int) -> int:
    """Exact count bound z^2 * 3^(2z) with z = 2^(beta+1) labels."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    z = 2 ** (beta + 1)
    return z * z * 3 ** (2 * z)


def pattern_bound_second_path(beta: int) -> int:
    """Same quantity, evaluated by an independent grouping: (z * 3^z)^2."""
    z = 2 ** (beta + 1)
    return (z * 3**z) ** 2


def crossover(beta: int, delta: int) -> dict:
    """Evaluate the pigeonhole inequality z^2 * 3^(2z) < delta/2 exactly."""
    bound = pattern_bound(beta)
    return {
        "beta": beta,
        "delta": delta,
        "bound": bound,
        "family_size_lower_bound": delta // 2,
        "holds": 2 * bound < delta,
    }


# --- lemma checks -------------------------------------------------------------


def _random_labeling(nodes: Sequence[int], universe: Sequence[str], rng: random.Random) -> Dict[int, str]:
    return {v: rng.choice(list(universe)) for v in nodes}


def matched_labelings(
    family: Sequence[FamilyTree], beta: int, rng: random.Random
) -> List[Tuple[FamilyTree, Dict[int, str]]]:
    """Labelings sharing one pattern, for every member with at least 2 hub leaves.

    R has the same size in every member, so its multiset is copied verbatim.
    The A sets differ in size; size differences are absorbed by a padding
    label that appears at least twice everywhere, keeping its occupancy
    class at "many".
    """
    matchable = [t for t in family if t.i >= 2]
    if not matchable:
        return []
    universe = list(label_universe(beta))
    r_label = rng.choice(universe)
    a_label = rng.choice(universe)
    smallest = min(t.i for t in matchable)
    pad = rng.choice(universe)
    body: List[str] = [pad, pad]
    for _ in range(rng.randrange(0, smallest - 1)):
        body.append(rng.choice(universe))
    body = body[:smallest]
    r_leaf_labels = [rng.choice(universe) for _ in range(len(matchable[0].leaves_r))]

    out = []
    for tree in matchable:
        labeling = {tree.r: r_label, tree.a: a_label}
        for v, lab in zip(tree.leaves_r, r_leaf_labels):
            labeling[v] = lab
        fill = body + [pad] * (tree.i - len(body))
        for v, lab in zip(tree.leaves_a, fill):
            labeling[v] = lab
        out.append((tree, labeling))
    return out


def check_lemmas(
    delta: int,
    trials: int,
    rounds: int,
    seed: int,
    beta: int = 1,
) -> dict:
    """Stress the two indistinguishability lemmas over seeded automata.

    Per trial: a fresh automaton; lemma 1 runs each member under an
    independent random labeling and compares leaf histories against label
    equality at every time step; lemma 2 runs the whole family under a
    shared pattern and requires all center histories to coincide (their
    count must be exactly 1 per pattern class).
    """
    family = build_family(delta)
    universe = label_universe(beta)
    rng = random.Random(seed)
    violations: List[dict] = []

    for trial in range(trials):
        automaton = seeded_automaton(rng.getrandbits(32))
        table = HistoryTable()

        for tree in family:
            labeling = _random_labeling(range(tree.n), universe, rng)
            hist = compute_histories(tree, labeling, automaton, rounds, table)
            for group in (tree.leaves_r, tree.leaves_a):
                for aa in range(len(group)):
                    for bb in range(aa + 1, len(group)):
                        va, vb = group[aa], group[bb]
                        same_label = labeling[va] == labeling[vb]
                        for t in range(rounds + 1):
                            same_hist = hist[t][va] == hist[t][vb]
                            if same_hist != same_label:
                                violations.append(
                                    {
                                        "lemma": "leaf-indistinguishability",
                                        "trial": trial,
                                        "tree_i": tree.i,
                                        "nodes": [va, vb],
                                        "t": t,
                                    }
                                )
                                break

        matched = matched_labelings(family, beta, rng)
        if len(matched) < 2:
            continue  # nothing to compare at this delta
        patterns = {pattern_of(tree, labeling, beta) for tree, labeling in matched}
        if len(patterns) != 1:
            violations.append({"lemma": "pattern-construction", "trial": trial})
            continue
        root_histories = []
        for tree, labeling in matched:
            hist = compute_histories(tree, labeling, automaton, rounds, table)
            root_histories.append([hist[t][tree.r] for t in range(rounds + 1)])
        for other in root_histories[1:]:
            for t in range(rounds + 1):
                if other[t] != root_histories[0][t]:
                    violations.append(
                        {"lemma": "pattern-determines-center", "trial": trial, "t": t}
                    )
                    break
        distinct_final = len({tuple(hs) for hs in root_histories})
        if distinct_final != 1:
            violations.append(
                {"lemma": "one-history-per-pattern-class", "trial": trial, "count": distinct_final}
            )

    return {"delta": delta, "trials": trials, "rounds": rounds, "violations": violations}

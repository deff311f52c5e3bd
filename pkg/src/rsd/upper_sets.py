"""Ordered upper sets, private-child partition, child ids, and node weights.

For each level l < h, the upper set US(l) is an ordered list of level-l
nodes whose neighborhoods cover V(l+1).  Each member v owns the private
children N'(v): its level-(l+1) neighbors not claimed by earlier members.
The first floor(log2 |N'(v)|)+1 private children (by ascending id) carry
ids from {1..floor(log2 Delta)+1}; the first one inherits the id of the
shared tagged child that admitted v (rule 1), or id 1 (rule 2 and the
initial member).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from .graphs import Graph, LevelDecomposition


def bitlen(x: int) -> int:
    """floor(log2 x) + 1 for x >= 1; the number of binary digits."""
    if x < 1:
        raise ValueError(f"bitlen requires x >= 1, got {x}")
    return x.bit_length()


@dataclass(frozen=True)
class UpperSetPlan:
    """Per-level upper sets plus the tagging structure derived from them.

    Attributes:
        us: level -> ordered member tuple.
        nprime: member -> its private children, ascending id.
        owner: child (level >= 1 node) -> the member owning it.
        child_id: tagged child -> id in {1..floor(log Delta)+1}; untagged
            children are absent.
        tag_order: member -> its tagged children, inherited-id holder first.
        foreign: children audible to at least one member besides their owner.
    """

    us: Dict[int, Tuple[int, ...]]
    nprime: Dict[int, Tuple[int, ...]]
    owner: Dict[int, int]
    child_id: Dict[int, int]
    tag_order: Dict[int, Tuple[int, ...]]
    foreign: frozenset

    def id_set(self, member: int) -> Tuple[int, ...]:
        """Sorted ids used by a member's tagged children."""
        return tuple(sorted(self.child_id[u] for u in self.tag_order[member]))


def _upper_neighbors(g: Graph, d: LevelDecomposition, v: int) -> List[int]:
    lv = d.level[v]
    return [w for w in g.adj[v] if d.level[w] == lv + 1]


def compute_upper_sets(g: Graph, d: LevelDecomposition) -> UpperSetPlan:
    """Construct US(l) for every l in 0..h-1 with deterministic tie-breaks.

    Admission follows the two rules: prefer an uncovered-neighbor node that
    shares a tagged child with the latest possible member (scanning tagged
    children in assignment order, then smallest candidate id); otherwise
    admit the smallest-id node that still covers something.  The first
    member is the smallest-id node with an uncovered upper neighbor.

    Once a level is complete, ids are re-dealt among each member's private
    children: a child heard by members other than its owner transmits into
    their accounting windows, so it must not sit on a 0 digit of the
    owner's child-count encoding, where its lone report could decode as "no
    such children" at the foreigner and let it finish (and silence the
    child) before the owner has read it.  Children used as admission
    anchors keep their ids; the rest prefer owner-private children for 0
    digits and foreign-audible children for 1 digits, whose stray reports
    inflate a foreigner's counts and correctly stall it.
    """
    m_ids = bitlen(d.delta)
    us: Dict[int, Tuple[int, ...]] = {}
    nprime: Dict[int, Tuple[int, ...]] = {}
    owner: Dict[int, int] = {}
    child_id: Dict[int, int] = {}
    tag_order: Dict[int, Tuple[int, ...]] = {}
    foreign_all: set = set()

    for l in range(d.h):
        target = set(d.levels[l + 1])
        uncovered = set(target)
        members: List[int] = []
        inherited_of: Dict[int, int] = {}
        anchors: Dict[int, List[int]] = {}

        def eligible() -> List[int]:
            return [
                v
                for v in d.levels[l]
                if v not in members and any(w in uncovered for w in g.adj[v])
            ]

        def admit(v: int, inherited: int) -> None:
            private = sorted(w for w in _upper_neighbors(g, d, v) if w in uncovered)
            assert private, "admitted a member with no private children"
            members.append(v)
            inherited_of[v] = inherited
            nprime[v] = tuple(private)
            for u in private:
                owner[u] = v
            k = bitlen(len(private))
            used: List[int] = []
            order: List[int] = []
            for idx, u in enumerate(private[:k]):
                if idx == 0:
                    p = inherited
                else:
                    p = min(i for i in range(1, m_ids + 1) if i not in used)
                child_id[u] = p
                used.append(p)
                order.append(u)
            tag_order[v] = tuple(order)
            uncovered.difference_update(_upper_neighbors(g, d, v))

        while uncovered:
            cands = eligible()
            assert cands, f"level {l}: uncovered nodes remain but no eligible member"
            if not members:
                admit(min(cands), 1)
                continue
            cand_set = set(cands)
            chosen = None
            for a in reversed(members):
                for u in tag_order[a]:
                    sharers = [v for v in g.adj[u] if d.level[v] == l and v in cand_set]
                    if sharers:
                        chosen = (min(sharers), child_id[u])
                        anchor = u
                        break
                if chosen:
                    break
            if chosen:
                anchors.setdefault(anchor, []).append(chosen[1])
                admit(*chosen)
            else:
                admit(min(cands), 1)

        us[l] = tuple(members)
        member_set = set(members)
        foreign = {
            u
            for u in d.levels[l + 1]
            if sum(1 for w in g.adj[u] if w in member_set) >= 2
        }
        foreign_all.update(foreign)
        for v in members:
            _redeal_ids(
                v,
                nprime[v],
                inherited_of[v],
                {u: child_id[u] for u in tag_order[v] if u in anchors},
                foreign,
                child_id,
                tag_order,
            )
    return UpperSetPlan(
        us=us,
        nprime=nprime,
        owner=owner,
        child_id=child_id,
        tag_order=tag_order,
        foreign=frozenset(foreign_all),
    )


def _redeal_ids(
    v: int,
    private: Tuple[int, ...],
    inherited: int,
    locked: Dict[int, int],
    foreign: set,
    child_id: Dict[int, int],
    tag_order: Dict[int, Tuple[int, ...]],
) -> None:
    """Re-distribute v's ids over its children per the audibility policy."""
    ids = sorted(child_id[u] for u in tag_order[v])
    size_bits = format(len(private), "b")
    bit_of = {i: int(size_bits[rank]) for rank, i in enumerate(ids)}
    for u in tag_order[v]:
        if u not in locked:
            del child_id[u]
    free_ids = [i for i in ids if i not in locked.values()]
    pool = [u for u in private if u not in locked]
    quiet = [u for u in pool if u not in foreign]
    loud = [u for u in pool if u in foreign]
    assignment = _audibility_assignment(free_ids, bit_of, quiet, loud)
    for u in assignment:
        child_id[u] = assignment[u]
    holder = {child_id[u]: u for u in private if u in child_id}
    order = [holder[inherited]] + sorted(
        u for u in private if u in child_id and u != holder[inherited]
    )
    tag_order[v] = tuple(order)


def _audibility_assignment(
    slots: List[int],
    bit_of: Dict[int, int],
    quiet: List[int],
    loud: List[int],
) -> Dict[int, int]:
    """Fill slots with quiet children first; unavoidable loud ones take
    1-digit slots before 0-digit slots.  Returns child -> slot."""
    shortfall = max(0, len(slots) - len(quiet))
    use_loud = loud[:shortfall]
    loud_first = sorted((i for i in slots if bit_of[i] == 1)) + sorted(
        i for i in slots if bit_of[i] == 0
    )
    out: Dict[int, int] = {}
    for u, i in zip(use_loud, loud_first):
        out[u] = i
    remaining = sorted(i for i in slots if i not in out.values())
    for u, i in zip(quiet, remaining):
        out[u] = i
    return out


def compute_weights(plan: UpperSetPlan, d: LevelDecomposition) -> Dict[int, int]:
    """Bottom-up weights: 1 at level h and for non-members, else 1 + sum over N'."""
    weight: Dict[int, int] = {}
    for v in d.levels[d.h]:
        weight[v] = 1
    for l in range(d.h - 1, -1, -1):
        member_set = set(plan.us[l])
        for v in d.levels[l]:
            if v in member_set:
                weight[v] = 1 + sum(weight[u] for u in plan.nprime[v])
            else:
                weight[v] = 1
    return weight


def collision_tag_map(plan: UpperSetPlan) -> Dict[int, Tuple[int, int]]:
    """Child -> (id, bit): the bit is its rank's digit in binary(|N'(owner)|)."""
    tags: Dict[int, Tuple[int, int]] = {}
    for v, order in plan.tag_order.items():
        ids = plan.id_set(v)
        size_bits = format(len(plan.nprime[v]), "b")
        for u in order:
            rank = ids.index(plan.child_id[u]) + 1
            tags[u] = (plan.child_id[u], int(size_bits[rank - 1]))
    return tags


def weight_tag_map(plan: UpperSetPlan, weights: Dict[int, int]) -> Dict[int, Tuple[int, int]]:
    """Child -> (id, bit): position and digit within binary(|Q(x)|) of its group.

    Position holders follow the same audibility policy as collision-tag ids:
    owner-private children first, with unavoidable foreign-audible holders
    steered onto 1 digits.
    """
    tags: Dict[int, Tuple[int, int]] = {}
    for v in plan.nprime:
        groups: Dict[int, List[int]] = {}
        for u in plan.nprime[v]:
            groups.setdefault(weights[u], []).append(u)
        for x, full in groups.items():
            full.sort()
            count_bits = format(len(full), "b")
            positions = list(range(1, bitlen(len(full)) + 1))
            bit_of = {j: int(count_bits[j - 1]) for j in positions}
            quiet = [u for u in full if u not in plan.foreign]
            loud = [u for u in full if u in plan.foreign]
            for u, j in _audibility_assignment(positions, bit_of, quiet, loud).items():
                tags[u] = (j, bit_of[j])
    return tags


class OraclePlanError(AssertionError):
    """The offline phase replay could not reach a sound schedule."""


def _replay_level(
    g: Graph,
    d: LevelDecomposition,
    plan: UpperSetPlan,
    weights: Dict[int, int],
    l: int,
    l2: Dict[int, Tuple[int, int]],
    l3: Dict[int, Tuple[int, int]],
):
    """Exact slot-by-slot replay of one phase's block dynamics.

    A member completes when its windows are collision-free, the tag bits it
    hears decode to a child count matched by the per-weight report sum; it
    then stops at the block end, silencing every adjacent child.  Returns
    ('ok', blocks) when every member completes with its true weight,
    ('wrong', member, strays) when a member would adopt a wrong weight, and
    ('robbed', member, child) when a member can never complete because a
    foreign stop silenced one of its tag carriers.
    """
    m = bitlen(d.delta)
    members = plan.us[l]
    active = {u for u in d.levels[l + 1] if u in l2 or u in l3}
    blocks: Dict[int, int] = {}
    incomplete = list(members)
    block = 0
    while incomplete:
        block += 1
        finishing = []
        for v in incomplete:
            audible = [u for u in _upper_neighbors(g, d, v) if u in active]
            slots: Dict[int, List[int]] = {}
            for u in audible:
                if u in l2:
                    slots.setdefault(l2[u][0], []).append(u)
                if u in l3:
                    slots.setdefault(m + (weights[u] - 1) * m + l3[u][0], []).append(u)
            if any(len(us) > 1 for us in slots.values()):
                continue
            tag_bits = {
                l2[us[0]][0]: l2[us[0]][1] for slot, us in slots.items() if slot <= m
            }
            if not tag_bits:
                continue
            d_count = int("".join(str(b) for _i, b in sorted(tag_bits.items())), 2)
            reports: Dict[int, Dict[int, int]] = {}
            for slot, us in slots.items():
                if slot > m:
                    u = us[0]
                    reports.setdefault(weights[u], {})[l3[u][0]] = l3[u][1]
            d_by_weight = {
                x: int("".join(str(b) for _i, b in sorted(pairs.items())), 2)
                for x, pairs in reports.items()
            }
            if sum(d_by_weight.values()) != d_count:
                continue
            learned = 1 + sum(x * c for x, c in d_by_weight.items())
            if learned != weights[v]:
                strays = sorted(u for u in audible if plan.owner.get(u) != v)
                return ("wrong", v, strays)
            finishing.append(v)
        if not finishing:
            own_tagged = {}
            for v in incomplete:
                own_tagged[v] = [
                    u for u in plan.nprime[v] if (u in l2 or u in l3) and u not in active
                ]
            v = min((v for v in incomplete if own_tagged[v]), default=None)
            if v is not None:
                return ("robbed", v, min(own_tagged[v]))
            raise OraclePlanError(
                f"level {l}: no member can complete in block {block} and none is robbed"
            )
        if block > len(members):
            raise OraclePlanError(f"level {l}: completion replay did not converge")
        for v in finishing:
            blocks[v] = block
        incomplete = [v for v in incomplete if v not in blocks]
        silenced = set()
        for v in finishing:
            silenced.update(_upper_neighbors(g, d, v))
        active.difference_update(silenced)
    return ("ok", blocks)


def _promote_to_one_bit(
    u: int,
    plan: UpperSetPlan,
    weights: Dict[int, int],
    l3: Dict[int, Tuple[int, int]],
    pinned: set,
) -> bool:
    """Move child u onto a 1-digit position of its weight class.

    A 1-digit report strictly inflates any foreign member's per-weight sum
    (or collides outright), so its carrier provably stalls every member
    other than its owner and can never be silenced early.  The displaced
    classmate takes u's old spot (or loses its tag if u had none).
    """
    owner = plan.owner[u]
    classmates = [c for c in plan.nprime[owner] if weights[c] == weights[u]]
    count_bits = format(len(classmates), "b")
    one_positions = [j + 1 for j, b in enumerate(count_bits) if b == "1"]
    holder = {l3[c][0]: c for c in classmates if c in l3}
    for pos in one_positions:
        victim = holder[pos]
        if victim == u:
            return True  # already protected
        if victim in pinned:
            continue
        old = l3.get(u)
        if old is None:
            del l3[victim]
        else:
            l3[victim] = old
        l3[u] = (pos, 1)
        pinned.add(u)
        return True
    return False


def finalize_weight_tags(
    g: Graph,
    d: LevelDecomposition,
    plan: UpperSetPlan,
    weights: Dict[int, int],
) -> Tuple[Dict[int, Tuple[int, int]], Dict[int, Dict[int, int]]]:
    """Weight-transmission tags plus the per-level completion-block schedule.

    Starts from the audibility-aware assignment and repairs it against the
    exact phase replay: whenever the replay finds a member that is robbed of
    a tag carrier (or would adopt a wrong weight), the offending child is
    promoted to a 1-digit position, which provably stalls the member that
    silenced (or miscounted) it.  Each repair pins one child, so the loop
    terminates.
    """
    l2 = collision_tag_map(plan)
    l3 = weight_tag_map(plan, weights)
    blocks_per_level: Dict[int, Dict[int, int]] = {}
    pinned: set = set()
    for l in range(d.h):
        while True:
            verdict = _replay_level(g, d, plan, weights, l, l2, l3)
            if verdict[0] == "ok":
                blocks_per_level[l] = verdict[1]
                break
            if verdict[0] == "robbed":
                _, _v, child = verdict
                if not _promote_to_one_bit(child, plan, weights, l3, pinned):
                    raise OraclePlanError(
                        f"level {l}: cannot protect robbed child {child} of member {_v}"
                    )
            else:  # wrong weight at verdict[1] caused by stray carriers
                _, v, strays = verdict
                for u in strays:
                    if u not in pinned and _promote_to_one_bit(u, plan, weights, l3, pinned):
                        break
                else:
                    raise OraclePlanError(
                        f"level {l}: cannot stall member {v} miscounting strays {strays}"
                    )
    return l3, blocks_per_level

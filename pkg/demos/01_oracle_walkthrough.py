"""Walk through the centralized oracle on a small graph.

The oracle is the offline side of size discovery: it roots the graph at a
maximum-degree node, layers it by BFS, picks per-level upper sets whose
neighborhoods cover the next level, and folds weights bottom-up so that the
root's weight is the network size.
"""
from rsd import compute_upper_sets, compute_weights, decompose, parse_graph

TEXT = """\
# two triangles sharing a tail
8 8
0 1
0 2
0 3
1 4
1 5
2 5
2 6
3 7
"""

g = parse_graph(TEXT)
d = decompose(g)

print(f"n = {g.n}, max degree = {d.delta}, root = {d.root}, depth h = {d.h}")
for l, nodes in enumerate(d.levels):
    print(f"  level {l}: {list(nodes)}")

plan = compute_upper_sets(g, d)
print("\nupper sets and private children:")
for l in range(d.h):
    print(f"  US({l}) = {list(plan.us[l])}")
    for v in plan.us[l]:
        ids = {u: plan.child_id[u] for u in plan.tag_order[v]}
        print(f"    N'({v}) = {list(plan.nprime[v])}, tagged ids {ids}")

weights = compute_weights(plan, d)
print("\nweights (each level sums to the node count at or below it):")
for l in range(d.h + 1):
    row = {v: weights[v] for v in d.levels[l]}
    print(f"  level {l}: {row}  sum = {sum(row.values())}")

assert weights[d.root] == g.n
print(f"\nthe root's weight is the size: W({d.root}) = {weights[d.root]} = n")

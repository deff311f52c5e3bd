"""Exercise the lower-bound machinery at desk scale.

The hard family: a star center r with one hub leaf a carrying i extra
leaves.  Whatever deterministic algorithm runs, leaves with equal labels
stay indistinguishable forever, and trees with equal per-label occupancy
patterns give their centers identical histories; counting patterns bounds
how many center histories short labels can produce.
"""
import random

from rsd import (
    build_family,
    check_lemmas,
    compute_histories,
    crossover,
    matched_labelings,
    pattern_bound,
    pattern_of,
    seeded_automaton,
)

family = build_family(6)
print("family members for max degree 6:")
for tree in family:
    print(f"  {tree.i} hub leaves -> {tree.n} nodes")

rng = random.Random(0)
matched = matched_labelings(family, beta=1, rng=rng)
patterns = {pattern_of(tree, lab, beta=1) for tree, lab in matched}
print(f"\nmatched labelings collapse to {len(patterns)} pattern(s)")

automaton = seeded_automaton(7)
histories = [
    compute_histories(tree, lab, automaton, rounds=60)[-1][tree.r]
    for tree, lab in matched
]
print(f"center histories after 60 rounds: {len(set(histories))} distinct value(s)")
assert len(set(histories)) == 1

print("\npattern-count bound z^2 * 3^(2z):")
for beta in range(4):
    print(f"  beta = {beta}: {pattern_bound(beta)}")

report = crossover(0, 1000)
print(
    f"\ncrossover at beta=0, delta=1000: bound {report['bound']} "
    f"< delta/2 = {report['delta'] // 2}? {report['holds']}"
)

print("\nlemma stress (20 seeded automata, 80 rounds, degree 6):")
report = check_lemmas(6, trials=20, rounds=80, seed=11)
print("  violations:", report["violations"])
assert report["violations"] == []

"""The four split strategies and the persisted split artifact.

Run from the repository root: python3 demos/02_splitting_strategies.py
"""

from pathlib import Path

from ppmbench import (
    SplitFractions,
    load_split,
    parse_csv,
    persist_split,
    split_by_case,
    split_combined,
    split_stratified_variants,
    split_time_based,
)

ROOT = Path(__file__).resolve().parent.parent
with open(ROOT / "data" / "synthetic_orders.csv", "rb") as handle:
    log = parse_csv(handle, {"case": "case_id", "activity": "activity",
                             "timestamp": "timestamp"})

fractions = SplitFractions(train=0.8, val=0.1, test=0.1)


def describe(name, assignment):
    print(f"{name:22s} train={len(assignment.train):3d} val={len(assignment.val):3d} "
          f"test={len(assignment.test):3d} dropped={len(assignment.dropped)}")


# 1. Random by case id: seeded shuffle, floor rounding, remainder to train.
describe("case_random", split_by_case(log, fractions, seed=42))

# 2. Combined: order cases by end timestamp; a case whose interval crosses a
#    window boundary is removed entirely rather than leaking across splits.
describe("combined", split_combined(log, fractions))

# 3. Time-based: two global timestamp quantiles cut every trace into
#    window segments; the assignment records per-case cut indices.
time_assignment = split_time_based(log, fractions)
describe("time_based", time_assignment)
spanning = [cid for cid, (i1, i2) in time_assignment.cut_points.items()
            if 0 < i1 and i1 < i2 < len(log.traces[cid])]
print(f"  cases with events in all three windows: {len(spanning)}")

# 4. Stratified by variant: all cases of one activity sequence stay
#    together. With only four variants the case counts cannot match
#    80/10/10 closely, so one split may come out empty.
describe("stratified_variants", split_stratified_variants(log, fractions, seed=42))

# Persisted splits are plain text: a JSON header line plus case_id,split
# rows. Equal inputs always produce byte-identical files.
assignment = split_by_case(log, fractions, seed=42)
text = persist_split(assignment)
print("\nsplit file head:")
for line in text.splitlines()[:4]:
    print(" ", line)
assert load_split(text) == assignment
assert persist_split(split_by_case(log, fractions, seed=42)) == text
print("round trip and byte determinism: ok")

"""Deterministic, leakage-safe train/validation/test splitting.

Four strategies are provided. ``case_random`` and ``stratified_variants``
shuffle with a seeded Philox stream, ``combined`` and ``time_based`` are
fully determined by timestamps. Assignments can be persisted to a small
text artifact (JSON header line + CSV body) whose bytes are reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import FormatError, InfeasibleSplitError
from .eventlog import EventLog

STRATEGIES = ("case_random", "time_based", "combined", "stratified_variants")
SPLIT_LABELS = ("train", "val", "test", "dropped")


@dataclass(frozen=True)
class SplitFractions:
    train: float = 0.8
    val: float = 0.1
    test: float = 0.1

    def __post_init__(self):
        for name, value in (("train", self.train), ("val", self.val), ("test", self.test)):
            if not 0.0 < value < 1.0:
                raise InfeasibleSplitError(f"fraction {name}={value} outside (0, 1)")
        if abs(self.train + self.val + self.test - 1.0) > 1e-9:
            raise InfeasibleSplitError(
                f"fractions sum to {self.train + self.val + self.test}, expected 1"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.train, self.val, self.test)


@dataclass(frozen=True)
class SplitAssignment:
    strategy: str
    seed: int
    fractions: SplitFractions
    train: frozenset[str]
    val: frozenset[str]
    test: frozenset[str]
    dropped: frozenset[str] = frozenset()
    # time_based only: case_id -> (events in train window, events in train+val windows)
    cut_points: dict[str, tuple[int, int]] | None = None

    def label_of(self, case_id: str) -> str:
        for label in SPLIT_LABELS:
            if case_id in getattr(self, label):
                return label
        raise KeyError(case_id)

    def all_case_ids(self) -> frozenset[str]:
        return self.train | self.val | self.test | self.dropped


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed & (2**64 - 1))))


def _sizes(n: int, fractions: SplitFractions) -> tuple[int, int, int]:
    # Floor each split, leftover cases go to train.
    eps = 1e-9
    n_train = math.floor(n * fractions.train + eps)
    n_val = math.floor(n * fractions.val + eps)
    n_test = math.floor(n * fractions.test + eps)
    n_train += n - (n_train + n_val + n_test)
    return n_train, n_val, n_test


def split_by_case(log: EventLog, fractions: SplitFractions, seed: int) -> SplitAssignment:
    """Shuffle case ids with a seeded stream and partition by fractions."""
    case_ids = sorted(log.case_ids())
    if len(case_ids) < 3:
        raise InfeasibleSplitError(f"need at least 3 cases, got {len(case_ids)}")
    order = _rng(seed).permutation(len(case_ids))
    shuffled = [case_ids[i] for i in order]
    n_train, n_val, _ = _sizes(len(shuffled), fractions)
    return SplitAssignment(
        strategy="case_random",
        seed=seed,
        fractions=fractions,
        train=frozenset(shuffled[:n_train]),
        val=frozenset(shuffled[n_train : n_train + n_val]),
        test=frozenset(shuffled[n_train + n_val :]),
    )


def split_combined(log: EventLog, fractions: SplitFractions) -> SplitAssignment:
    """Order cases by end timestamp and window them; boundary straddlers are dropped.

    Boundary timestamps sit at the cumulative case-count fractions. A case is
    assigned to a window only when its whole [start, end] interval lies inside
    it; a case that starts in an earlier window is removed entirely.
    """
    traces = sorted(log, key=lambda t: (t.end, t.case_id))
    if len(traces) < 3:
        raise InfeasibleSplitError(f"need at least 3 cases, got {len(traces)}")
    n_train, n_val, _ = _sizes(len(traces), fractions)
    t1 = traces[max(n_train - 1, 0)].end
    t2 = traces[max(n_train + n_val - 1, 0)].end

    train, val, test, dropped = set(), set(), set(), set()
    for trace in traces:
        if trace.end <= t1:
            train.add(trace.case_id)
        elif trace.end <= t2:
            (val if trace.start > t1 else dropped).add(trace.case_id)
        else:
            (test if trace.start > t2 else dropped).add(trace.case_id)
    if not (train or val or test):
        raise InfeasibleSplitError("combined split dropped every case")
    return SplitAssignment(
        strategy="combined",
        seed=0,
        fractions=fractions,
        train=frozenset(train),
        val=frozenset(val),
        test=frozenset(test),
        dropped=frozenset(dropped),
    )


def split_time_based(log: EventLog, fractions: SplitFractions) -> SplitAssignment:
    """Cut every trace at two global timestamp quantiles of all events.

    The assignment stores, per case, how many of its events fall at or before
    each cutoff; sample generation restricts a window's samples to targets
    inside that window. Each case is labelled by the window holding its first
    event so the persisted artifact still partitions the case set.
    """
    all_ts = sorted(ev.timestamp for trace in log for ev in trace.events)
    n = len(all_ts)
    eps = 1e-9
    k1 = max(math.floor(n * fractions.train + eps), 1)
    k2 = max(math.floor(n * (fractions.train + fractions.val) + eps), 1)
    cutoff1, cutoff2 = all_ts[k1 - 1], all_ts[k2 - 1]
    if not (cutoff1 < cutoff2 < all_ts[-1]):
        raise InfeasibleSplitError(
            "degenerate time-based cutoffs; not enough distinct timestamps"
        )

    cut_points: dict[str, tuple[int, int]] = {}
    train, val, test = set(), set(), set()
    for trace in log:
        i1 = sum(1 for ev in trace.events if ev.timestamp <= cutoff1)
        i2 = sum(1 for ev in trace.events if ev.timestamp <= cutoff2)
        cut_points[trace.case_id] = (i1, i2)
        first = trace.events[0].timestamp
        if first <= cutoff1:
            train.add(trace.case_id)
        elif first <= cutoff2:
            val.add(trace.case_id)
        else:
            test.add(trace.case_id)
    return SplitAssignment(
        strategy="time_based",
        seed=0,
        fractions=fractions,
        train=frozenset(train),
        val=frozenset(val),
        test=frozenset(test),
        cut_points=cut_points,
    )


def split_stratified_variants(
    log: EventLog, fractions: SplitFractions, seed: int
) -> SplitAssignment:
    """Partition whole activity-sequence variants so no variant spans splits.

    Variants are shuffled by seed, then walked largest-first into train, val
    and test toward the case-count targets; the crossing variant goes to
    whichever side keeps the cumulative count closest to the target.
    """
    variants: dict[tuple[str, ...], list[str]] = {}
    for trace in log:
        variants.setdefault(trace.activities, []).append(trace.case_id)
    if len(variants) < 3:
        raise InfeasibleSplitError(
            f"need at least 3 distinct variants, got {len(variants)}"
        )
    # Canonical order by smallest member case id, then seeded shuffle,
    # then stable largest-first. For all-unique logs this reduces to the
    # case_random schedule.
    groups = sorted(variants.values(), key=lambda ids: min(ids))
    order = _rng(seed).permutation(len(groups))
    groups = [groups[i] for i in order]
    groups.sort(key=len, reverse=True)

    n = len(log)
    targets = _sizes(n, fractions)
    buckets: tuple[list[str], list[str], list[str]] = ([], [], [])
    current = 0
    for group in groups:
        while current < 2:
            have = len(buckets[current])
            target = targets[current]
            if have >= target:
                current += 1
            elif have > 0 and abs(have + len(group) - target) > abs(have - target):
                current += 1  # overshoot beats stopping short: fill the next split
            else:
                break
        buckets[current].extend(group)
    return SplitAssignment(
        strategy="stratified_variants",
        seed=seed,
        fractions=fractions,
        train=frozenset(buckets[0]),
        val=frozenset(buckets[1]),
        test=frozenset(buckets[2]),
    )


def split_log(
    log: EventLog, strategy: str, fractions: SplitFractions, seed: int = 0
) -> SplitAssignment:
    if strategy == "case_random":
        return split_by_case(log, fractions, seed)
    if strategy == "combined":
        return split_combined(log, fractions)
    if strategy == "time_based":
        return split_time_based(log, fractions)
    if strategy == "stratified_variants":
        return split_stratified_variants(log, fractions, seed)
    raise InfeasibleSplitError(
        f"unknown strategy {strategy!r}; expected one of {STRATEGIES}"
    )


def persist_split(assignment: SplitAssignment, sink: IO[str] | None = None) -> str:
    """Serialize an assignment; equal assignments produce identical bytes."""
    header = {
        "strategy": assignment.strategy,
        "seed": assignment.seed,
        "fractions": {
            "train": assignment.fractions.train,
            "val": assignment.fractions.val,
            "test": assignment.fractions.test,
        },
        "n_cases": len(assignment.all_case_ids()),
    }
    if assignment.cut_points is not None:
        header["cut_points"] = {
            cid: list(cuts) for cid, cuts in sorted(assignment.cut_points.items())
        }
    buf = io.StringIO()
    buf.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["case_id", "split"])
    for case_id in sorted(assignment.all_case_ids()):
        writer.writerow([case_id, assignment.label_of(case_id)])
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def load_split(source: IO[str] | str) -> SplitAssignment:
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()
    if len(lines) < 2:
        raise FormatError("split file needs a JSON header line and a CSV body")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"split header is not valid JSON: {exc}") from None
    for key in ("strategy", "seed", "fractions", "n_cases"):
        if key not in header:
            raise FormatError(f"split header lacks key {key!r}")
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    rows = list(reader)
    if not rows or rows[0] != ["case_id", "split"]:
        raise FormatError("split body must start with a 'case_id,split' header row")
    sets: dict[str, set[str]] = {label: set() for label in SPLIT_LABELS}
    seen: set[str] = set()
    for row in rows[1:]:
        if len(row) != 2:
            raise FormatError(f"malformed split row: {row!r}")
        case_id, label = row
        if label not in sets:
            raise FormatError(f"unknown split label {label!r} for case {case_id!r}")
        if case_id in seen:
            raise FormatError(f"duplicate case id {case_id!r}")
        seen.add(case_id)
        sets[label].add(case_id)
    if len(seen) != header["n_cases"]:
        raise FormatError(
            f"split file lists {len(seen)} cases but header declares {header['n_cases']}"
        )
    cut_points = None
    if "cut_points" in header:
        cut_points = {cid: (c[0], c[1]) for cid, c in header["cut_points"].items()}
        if set(cut_points) != seen:
            raise FormatError("cut_points keys do not match the case rows")
    fr = header["fractions"]
    return SplitAssignment(
        strategy=header["strategy"],
        seed=int(header["seed"]),
        fractions=SplitFractions(train=fr["train"], val=fr["val"], test=fr["test"]),
        train=frozenset(sets["train"]),
        val=frozenset(sets["val"]),
        test=frozenset(sets["test"]),
        dropped=frozenset(sets["dropped"]),
        cut_points=cut_points,
    )

"""Prefix/suffix sample construction with train-only fitted statistics.

Every fitted artifact here (vocabulary, pad size, time-feature scaler) is a
function of the train split alone; evaluation-split content can never leak
into them. Traces are augmented with START/END sentinels, inputs are rolling
n-gram windows left-padded with PAD, and suffix targets are right-padded to a
power-of-two pad size.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable, Sequence

from .errors import PadOverflowError, PpmBenchError
from .eventlog import Trace

logger = logging.getLogger(__name__)

PAD_ID = 0
START_ID = 1
END_ID = 2
UNK_ID = 3

PAD_TOKEN = "<PAD>"
START_TOKEN = "<START>"
END_TOKEN = "<END>"
UNK_TOKEN = "<UNK>"

RESERVED_TOKENS = (PAD_TOKEN, START_TOKEN, END_TOKEN, UNK_TOKEN)

SECONDS_PER_DAY = 86_400.0

FEATURE_NAMES = (
    "delta_since_last_event",
    "time_since_case_start",
    "time_since_midnight",
    "time_since_sunday_midnight",
    "position_index",
)


@dataclass(frozen=True)
class Vocabulary:
    """Bijective token<->id map with fixed reserved ids 0..3."""

    token_to_id: dict[str, int]
    id_to_token: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def encode(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def decode(self, token_id: int) -> str:
        return self.id_to_token[token_id]

    def encode_trace(self, trace: Trace) -> list[int]:
        return [self.encode(a) for a in trace.activities]

    def activity_ids(self) -> range:
        return range(UNK_ID + 1, self.size)


def build_vocabulary(train_traces: Iterable[Trace]) -> Vocabulary:
    """Assign ids >= 4 to the train-split activity tokens in lexicographic order."""
    activities = sorted({a for trace in train_traces for a in trace.activities})
    if not activities:
        raise PpmBenchError("cannot build a vocabulary from an empty train split")
    clash = [a for a in activities if a in RESERVED_TOKENS]
    if clash:
        raise PpmBenchError(f"activities collide with reserved tokens: {clash}")
    id_to_token = list(RESERVED_TOKENS) + activities
    return Vocabulary(
        token_to_id={tok: i for i, tok in enumerate(id_to_token)},
        id_to_token=tuple(id_to_token),
    )


@dataclass(frozen=True)
class PadPolicy:
    pad_size: int
    derivation: str = "power_of_two_train_max"  # or "fixed"

    def __post_init__(self):
        if self.pad_size < 2 or self.pad_size & (self.pad_size - 1) != 0:
            raise PpmBenchError(f"pad size {self.pad_size} is not a power of two >= 2")


def compute_pad_size(train_traces: Iterable[Trace]) -> PadPolicy:
    """Smallest power of two strictly greater than the longest augmented train trace.

    The augmented length counts the START and END sentinels, so a generated
    suffix of any train-like trace always fits inside the pad.
    """
    longest = max(len(trace) + 2 for trace in train_traces)
    pad = 2
    while pad <= longest:
        pad *= 2
    return PadPolicy(pad_size=pad)


@dataclass(frozen=True)
class TimeFeatureScaler:
    """Train-split means used to scale the day-valued time features.

    ``mean_delta_days`` averages inter-event gaps (zero gaps included);
    ``mean_since_case_start_days`` averages over all events, first events
    contributing zero. The midnight/Sunday means are fitted as well but only
    applied when ``scale_all_time_features`` is requested, mirroring the
    original pipelines that left those features unscaled.
    """

    mean_delta_days: float
    mean_since_case_start_days: float
    mean_since_midnight_days: float = 0.0
    mean_since_sunday_days: float = 0.0

    def __post_init__(self):
        if self.mean_delta_days < 0 or self.mean_since_case_start_days < 0:
            raise PpmBenchError("fitted time-feature means must be non-negative")


def _scale(value: float, mean: float) -> float:
    # Zero fitted mean would divide by zero; pass the raw value through.
    return value / mean if mean > 0 else value


def _days_between(later: datetime, earlier: datetime) -> float:
    return (later - earlier).total_seconds() / SECONDS_PER_DAY


def _since_midnight_days(ts: datetime) -> float:
    seconds = ts.hour * 3600 + ts.minute * 60 + ts.second + ts.microsecond / 1e6
    return seconds / SECONDS_PER_DAY


def _since_sunday_days(ts: datetime) -> float:
    days_since_sunday = (ts.weekday() + 1) % 7  # Monday=0 ... Sunday=6
    return days_since_sunday + _since_midnight_days(ts)


def fit_time_scaler(train_traces: Iterable[Trace]) -> TimeFeatureScaler:
    deltas: list[float] = []
    since_start: list[float] = []
    midnights: list[float] = []
    sundays: list[float] = []
    for trace in train_traces:
        start = trace.start
        prev: datetime | None = None
        for ev in trace.events:
            if prev is not None:
                deltas.append(_days_between(ev.timestamp, prev))
            since_start.append(_days_between(ev.timestamp, start))
            midnights.append(_since_midnight_days(ev.timestamp))
            sundays.append(_since_sunday_days(ev.timestamp))
            prev = ev.timestamp
    if not since_start:
        raise PpmBenchError("cannot fit a time scaler on an empty train split")
    if not deltas:
        raise PpmBenchError("train split has no inter-event gap to fit on")
    mean_delta = sum(deltas) / len(deltas)
    if mean_delta == 0:
        logger.warning("all train inter-event gaps are zero; deltas pass through unscaled")
    return TimeFeatureScaler(
        mean_delta_days=mean_delta,
        mean_since_case_start_days=sum(since_start) / len(since_start),
        mean_since_midnight_days=sum(midnights) / len(midnights),
        mean_since_sunday_days=sum(sundays) / len(sundays),
    )


def extract_time_features(
    trace: Trace,
    position: int,
    scaler: TimeFeatureScaler,
    scale_all_time_features: bool = False,
) -> tuple[float, float, float, float, float]:
    """Five time features for the event at ``position`` (0-based).

    Order: delta since last event and time since case start (both scaled by
    their train means), time since midnight and since last Sunday midnight
    (unscaled unless the clean variant is enabled), and the raw position
    index. All values except the index are in days.
    """
    if not 0 <= position < len(trace):
        raise PpmBenchError(f"position {position} outside trace of length {len(trace)}")
    ev = trace.events[position]
    delta = _days_between(ev.timestamp, trace.events[position - 1].timestamp) if position else 0.0
    since_start = _days_between(ev.timestamp, trace.start)
    midnight = _since_midnight_days(ev.timestamp)
    sunday = _since_sunday_days(ev.timestamp)
    if scale_all_time_features:
        midnight = _scale(midnight, scaler.mean_since_midnight_days)
        sunday = _scale(sunday, scaler.mean_since_sunday_days)
    return (
        _scale(delta, scaler.mean_delta_days),
        _scale(since_start, scaler.mean_since_case_start_days),
        midnight,
        sunday,
        float(position),
    )


@dataclass(frozen=True)
class PrefixSample:
    """One padded prefix window with every in-scope prediction target.

    ``k`` counts revealed tokens of the START/END-augmented sequence, so k=1
    reveals only START. ``prefix_end`` anchors absolute-timestamp
    accumulation during generation; ``split`` is a provenance tag used to
    keep evaluation off train/val samples.
    """

    case_id: str
    k: int
    input_ids: tuple[int, ...]
    input_time_features: tuple[tuple[float, float, float, float, float], ...]
    suffix_ids: tuple[int, ...]
    suffix_deltas_days: tuple[float, ...]
    suffix_mask: tuple[bool, ...]
    next_activity_id: int
    next_delta_days: float
    remaining_time_days: float
    prefix_end: datetime = field(default_factory=lambda: datetime.fromtimestamp(0, timezone.utc))
    split: str | None = None

    def true_suffix_activities(self) -> list[int]:
        """Unpadded suffix ids with the END sentinel stripped."""
        return [t for t, real in zip(self.suffix_ids, self.suffix_mask) if real and t != END_ID]

    def to_json_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "k": self.k,
            "input_ids": list(self.input_ids),
            "input_time_features": [list(f) for f in self.input_time_features],
            "suffix_ids": list(self.suffix_ids),
            "suffix_deltas_days": list(self.suffix_deltas_days),
            "suffix_mask": list(self.suffix_mask),
            "next_activity_id": self.next_activity_id,
            "next_delta_days": self.next_delta_days,
            "remaining_time_days": self.remaining_time_days,
            "prefix_end": self.prefix_end.isoformat(timespec="milliseconds"),
            "split": self.split,
        }


def make_samples(
    trace: Trace,
    vocab: Vocabulary,
    pad_policy: PadPolicy,
    n: int,
    scaler: TimeFeatureScaler,
    split_window: tuple[int, int] | None = None,
    scale_all_time_features: bool = False,
    split: str | None = None,
) -> list[PrefixSample]:
    """All prefix/suffix pairs of one trace, one per k = 1..|augmented|-1.

    ``split_window`` (lo, hi) restricts output to samples whose target event
    index falls inside [lo, hi); the END-target sample follows the last real
    event. Raises :class:`PadOverflowError` when the augmented trace does not
    fit the pad size.
    """
    if n < 1:
        raise PpmBenchError(f"n-gram size must be >= 1, got {n}")
    p = pad_policy.pad_size
    n_events = len(trace)
    aug_len = n_events + 2
    if aug_len >= p:
        raise PadOverflowError(
            f"case {trace.case_id!r}: augmented length {aug_len} >= pad size {p}"
        )
    aug_ids = [START_ID] + vocab.encode_trace(trace) + [END_ID]

    # Per augmented position: delta target and input features. START mirrors
    # the case-start instant; END carries a zero delta.
    deltas = [0.0, 0.0]
    for i in range(1, n_events):
        deltas.append(_days_between(trace.events[i].timestamp, trace.events[i - 1].timestamp))
    deltas.append(0.0)

    event_feats = [
        extract_time_features(trace, i, scaler, scale_all_time_features)
        for i in range(n_events)
    ]
    start_feats = (0.0, 0.0, event_feats[0][2], event_feats[0][3], 0.0)
    feats_by_aug = [start_feats] + event_feats  # END never appears in an input window
    pad_feats = (0.0, 0.0, 0.0, 0.0, 0.0)

    samples = []
    for k in range(1, aug_len):
        if split_window is not None:
            lo, hi = split_window
            target_idx = min(k - 1, n_events - 1)
            if not lo <= target_idx < hi:
                continue
        window = aug_ids[max(k - n, 0) : k]
        input_ids = [PAD_ID] * (n - len(window)) + window
        input_feats = [pad_feats] * (n - len(window)) + [
            feats_by_aug[j] for j in range(max(k - n, 0), k)
        ]
        suffix = aug_ids[k:]
        suffix_deltas = deltas[k:]
        n_pad = p - len(suffix)
        suffix_ids = suffix + [PAD_ID] * n_pad
        suffix_deltas_days = suffix_deltas + [0.0] * n_pad
        suffix_mask = [True] * len(suffix) + [False] * n_pad
        remaining = math.fsum(suffix_deltas)
        prefix_end = trace.start if k == 1 else trace.events[k - 2].timestamp
        samples.append(
            PrefixSample(
                case_id=trace.case_id,
                k=k,
                input_ids=tuple(input_ids),
                input_time_features=tuple(input_feats),
                suffix_ids=tuple(suffix_ids),
                suffix_deltas_days=tuple(suffix_deltas_days),
                suffix_mask=tuple(suffix_mask),
                next_activity_id=suffix[0],
                next_delta_days=suffix_deltas[0],
                remaining_time_days=remaining,
                prefix_end=prefix_end,
                split=split,
            )
        )
    return samples


def export_samples_jsonl(samples: Iterable[PrefixSample], sink: IO[str]) -> int:
    """Write samples as JSON Lines; returns the number of lines written."""
    count = 0
    for sample in samples:
        sink.write(json.dumps(sample.to_json_dict(), sort_keys=True) + "\n")
        count += 1
    return count


def samples_for_split(
    traces: Sequence[Trace],
    vocab: Vocabulary,
    pad_policy: PadPolicy,
    n: int,
    scaler: TimeFeatureScaler,
    label: str,
    cut_points: dict[str, tuple[int, int]] | None = None,
    scale_all_time_features: bool = False,
) -> list[PrefixSample]:
    """Samples for one split, ordered by (case_id, k) regardless of scheduling."""
    out: list[PrefixSample] = []
    for trace in sorted(traces, key=lambda t: t.case_id):
        window = None
        if cut_points is not None:
            i1, i2 = cut_points[trace.case_id]
            if label == "train":
                window = (0, i1)
            elif label == "val":
                window = (i1, i2)
            else:
                window = (i2, len(trace))
        out.extend(
            make_samples(
                trace,
                vocab,
                pad_policy,
                n,
                scaler,
                split_window=window,
                scale_all_time_features=scale_all_time_features,
                split=label,
            )
        )
    return out

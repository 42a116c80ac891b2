"""From split log to padded prefix/suffix samples with time features.

Everything fitted here (vocabulary, pad size, feature means) sees the train
split only. Run from the repository root.
"""

import io
from pathlib import Path

from ppmbench import (
    SplitFractions,
    build_vocabulary,
    compute_pad_size,
    export_samples_jsonl,
    fit_time_scaler,
    make_samples,
    parse_csv,
    split_by_case,
)

ROOT = Path(__file__).resolve().parent.parent
with open(ROOT / "data" / "synthetic_orders.csv", "rb") as handle:
    log = parse_csv(handle, {"case": "case_id", "activity": "activity",
                             "timestamp": "timestamp"})

assignment = split_by_case(log, SplitFractions(), seed=1)
train_traces = [log.traces[cid] for cid in sorted(assignment.train)]

# Vocabulary: PAD=0 START=1 END=2 UNK=3, then train activities sorted.
vocab = build_vocabulary(train_traces)
print(f"vocabulary ({vocab.size} ids):")
for token, token_id in sorted(vocab.token_to_id.items(), key=lambda kv: kv[1]):
    print(f"  {token_id:2d} {token}")
print("unseen activity encodes to UNK:", vocab.encode("totally new step"))

# Pad size: smallest power of two strictly above the longest augmented
# train trace, so generated suffixes always fit with headroom.
pad = compute_pad_size(train_traces)
longest = max(len(t) for t in train_traces)
print(f"longest train trace {longest} (+2 sentinels) -> pad size {pad.pad_size}")

# Time features are day-scaled; delta and since-case-start divide by their
# train means. Midnight/Sunday stay raw unless scale_all_time_features=True.
scaler = fit_time_scaler(train_traces)
print(f"mean gap {scaler.mean_delta_days:.3f} days, "
      f"mean since-start {scaler.mean_since_case_start_days:.3f} days")

trace = train_traces[0]
samples = make_samples(trace, vocab, pad, n=4, scaler=scaler)
print(f"\ncase {trace.case_id} ({len(trace)} events) -> {len(samples)} samples")
sample = samples[1]  # k=2: START plus the first event revealed
print(f"k={sample.k} window     {sample.input_ids}")
print(f"suffix target {sample.suffix_ids}")
print(f"suffix deltas {tuple(round(d, 3) for d in sample.suffix_deltas_days)}")
print(f"next activity {vocab.decode(sample.next_activity_id)!r}, "
      f"remaining {sample.remaining_time_days:.3f} days")

buf = io.StringIO()
export_samples_jsonl(samples[:2], buf)
print("\nJSONL export, first line:")
print(buf.getvalue().splitlines()[0][:120] + " ...")

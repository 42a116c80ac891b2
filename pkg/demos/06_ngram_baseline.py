"""Fit the n-gram frequency baseline and generate suffixes with it.

Run from the repository root: python3 demos/06_ngram_baseline.py
"""

from pathlib import Path

from ppmbench import (
    GenerationConfig,
    SamplerConfig,
    SplitFractions,
    build_vocabulary,
    compute_pad_size,
    derive_stream,
    evaluate_task,
    fit_ngram,
    fit_time_scaler,
    generate_suffix,
    parse_csv,
    samples_for_split,
    split_by_case,
)

ROOT = Path(__file__).resolve().parent.parent
with open(ROOT / "data" / "synthetic_orders.csv", "rb") as handle:
    log = parse_csv(handle, {"case": "case_id", "activity": "activity",
                             "timestamp": "timestamp"})

assignment = split_by_case(log, SplitFractions(), seed=5)
train = [log.traces[cid] for cid in sorted(assignment.train)]
test = [log.traces[cid] for cid in sorted(assignment.test)]

vocab = build_vocabulary(train)
pad = compute_pad_size(train)
scaler = fit_time_scaler(train)
train_samples = samples_for_split(train, vocab, pad, 4, scaler, "train")
test_samples = samples_for_split(test, vocab, pad, 4, scaler, "test")
print(f"{len(train_samples)} train samples, {len(test_samples)} test samples")

model = fit_ngram(train_samples, n=4, alpha=0.1, vocab_size=vocab.size)
print(f"contexts learned: {len(model.counts)}")

# Generate a continuation for one test prefix.
sample = test_samples[1]
cfg = GenerationConfig(sampler=SamplerConfig(strategy="greedy"))
suffix = generate_suffix(model, sample, cfg, derive_stream(0))
window = [vocab.decode(t) for t in sample.input_ids if t != 0]
generated = [vocab.decode(t) for t in suffix.activity_ids]
truth = [vocab.decode(t) for t in sample.true_suffix_activities()]
print(f"\nprefix window : {window}")
print(f"generated     : {generated} (terminated={suffix.terminated})")
print(f"true suffix   : {truth}")

# Evaluate over the whole test split, per prefix length.
for task in ("next_activity", "suffix", "remaining_iterative"):
    report = evaluate_task(model, test_samples, task, cfg)
    headline = sorted(report.global_values.items())[0]
    print(f"{task:20s} n={report.total_samples:3d}  {headline[0]}={headline[1]:.4f}")

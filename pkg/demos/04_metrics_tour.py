"""The metric suite, including the two pitfalls the engine makes visible.

Run from the repository root: python3 demos/04_metrics_tour.py
"""

from ppmbench import (
    accuracy,
    balanced_accuracy,
    bleu,
    build_report,
    dl_distance,
    dl_similarity,
    f1_macro,
    jaccard,
    regression_errors,
)

# Classification: imbalance makes plain accuracy look great while the
# minority class is never predicted.
targets = ["resolve"] * 9 + ["escalate"]
preds = ["resolve"] * 10
print(f"accuracy          {accuracy(preds, targets):.3f}")
print(f"balanced accuracy {balanced_accuracy(preds, targets):.3f}")
print(f"f1 macro          {f1_macro(preds, targets):.3f}")

# Regression errors are absolute: a -1 day prediction for a 0 day target
# scores the same as a +1 day miss, which hides negative time predictions.
print("\nregression on days:", regression_errors([-1.0, 0.5], [0.0, 0.5]))

# Sequence metrics operate on whole activity tokens, not characters.
a = ("receive", "check", "ship")
b = ("receive", "ship", "check")
print(f"\ndl_distance(swap)       {dl_distance(a, b)}")  # one transposition
print(f"dl_similarity            {dl_similarity(a, b):.4f}")
# Unrestricted variant: transposed tokens may be edited again afterwards.
print(f"dl_distance(CA -> ABC)  {dl_distance(('C','A'), ('A','B','C'))}  (OSA would say 3)")
print(f"bleu short candidate     {bleu(('receive','check'), a):.4f}")
print(f"jaccard                  {jaccard(a, ('receive','check','cancel')):.4f}")

# Aggregation: the per-prefix unweighted mean over-weights rare long
# prefixes. Both aggregates are always reported side by side.
rows = [(1, {"accuracy": 1.0})] * 90 + [(1, {"accuracy": 0.0})] * 10
rows += [(5, {"accuracy": 1.0})] * 5 + [(5, {"accuracy": 0.0})] * 5
report = build_report(rows)
print("\nper-k rows:", [(r.k, r.n_samples, round(r.values["accuracy"], 3)) for r in report.per_k])
print(f"unweighted mean {report.aggregate_unweighted['accuracy']:.4f}   "
      f"weighted mean {report.aggregate_weighted['accuracy']:.4f}   "
      f"pooled {report.global_values['accuracy']:.4f}")

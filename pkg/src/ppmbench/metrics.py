"""Classification, regression, and sequence metrics with per-prefix reporting.

Sequence metrics operate on token sequences, not characters. The report
carries both the per-prefix unweighted mean (the aggregation several
published pipelines used) and the sample-weighted mean side by side, plus
metrics pooled over all samples.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import PpmBenchError


def _check_paired(preds: Sequence, targets: Sequence) -> None:
    if len(preds) != len(targets):
        raise PpmBenchError(f"length mismatch: {len(preds)} preds vs {len(targets)} targets")
    if not preds:
        raise PpmBenchError("empty input")


def accuracy(preds: Sequence[Hashable], targets: Sequence[Hashable]) -> float:
    _check_paired(preds, targets)
    return sum(p == t for p, t in zip(preds, targets)) / len(preds)


def balanced_accuracy(
    preds: Sequence[Hashable],
    targets: Sequence[Hashable],
    num_classes: int | None = None,
) -> float:
    """Mean per-class recall.

    With ``num_classes=None`` the mean runs over classes that occur in the
    targets. Passing ``num_classes=K`` divides by K instead, counting classes
    absent from the targets as recall zero.
    """
    _check_paired(preds, targets)
    support: Counter = Counter(targets)
    hits: Counter = Counter(t for p, t in zip(preds, targets) if p == t)
    recalls = [hits[cls] / count for cls, count in support.items()]
    if num_classes is None:
        return sum(recalls) / len(recalls)
    observed = len(set(targets) | set(preds))
    if num_classes < observed:
        raise PpmBenchError(
            f"num_classes={num_classes} smaller than {observed} observed classes"
        )
    return sum(recalls) / num_classes


def f1_macro(preds: Sequence[Hashable], targets: Sequence[Hashable]) -> float:
    """Unweighted mean F1 over the classes observed in targets or predictions."""
    _check_paired(preds, targets)
    classes = set(targets) | set(preds)
    support: Counter = Counter(targets)
    predicted: Counter = Counter(preds)
    hits: Counter = Counter(t for p, t in zip(preds, targets) if p == t)
    scores = []
    for cls in classes:
        precision = hits[cls] / predicted[cls] if predicted[cls] else 0.0
        recall = hits[cls] / support[cls] if support[cls] else 0.0
        if precision + recall == 0:
            scores.append(0.0)
        else:
            scores.append(2 * precision * recall / (precision + recall))
    return sum(scores) / len(scores)


def regression_errors(
    preds: Sequence[float], targets: Sequence[float]
) -> dict[str, float]:
    _check_paired(preds, targets)
    abs_errors = [abs(t - p) for p, t in zip(preds, targets)]
    sq_errors = [e * e for e in abs_errors]
    mse = sum(sq_errors) / len(sq_errors)
    return {
        "mae": sum(abs_errors) / len(abs_errors),
        "mse": mse,
        "rmse": math.sqrt(mse),
    }


def dl_distance(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Unrestricted Damerau-Levenshtein distance with unit operation costs.

    Unlike the optimal-string-alignment variant, transposed tokens may take
    part in later edits, e.g. d(CA, ABC) = 2.
    """
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    maxdist = la + lb
    # Rows/cols shifted by one so index 0 is the maxdist sentinel.
    d = [[maxdist] * (lb + 2) for _ in range(la + 2)]
    for i in range(la + 1):
        d[i + 1][1] = i
    for j in range(lb + 1):
        d[1][j + 1] = j
    last_row: dict[Hashable, int] = {}
    for i in range(1, la + 1):
        ch_a = a[i - 1]
        last_col = 0
        for j in range(1, lb + 1):
            ch_b = b[j - 1]
            i_prev = last_row.get(ch_b, 0)
            j_prev = last_col
            if ch_a == ch_b:
                cost = 0
                last_col = j
            else:
                cost = 1
            d[i + 1][j + 1] = min(
                d[i][j] + cost,  # substitution / match
                d[i + 1][j] + 1,  # insertion
                d[i][j + 1] + 1,  # deletion
                d[i_prev][j_prev] + (i - i_prev - 1) + 1 + (j - j_prev - 1),
            )
        last_row[ch_a] = i
    return d[la + 1][lb + 1]


def dl_similarity(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """1 - distance normalized by the longer length; two empty sequences match."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - dl_distance(a, b) / longest


def _ngram_counts(tokens: Sequence[Hashable], order: int) -> Counter:
    return Counter(tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1))


def bleu(candidate: Sequence[Hashable], reference: Sequence[Hashable], max_order: int = 4) -> float:
    """Single-reference BLEU with clipped n-gram precision and brevity penalty.

    The n-gram order adapts to min(max_order, |candidate|, |reference|) with
    uniform weights. Any zero precision zeroes the score (no smoothing). An
    empty candidate against a non-empty reference scores 0; two empty
    sequences count as a perfect match, consistent with the other suffix
    similarities.
    """
    if not candidate and not reference:
        return 1.0
    if not candidate or not reference:
        return 0.0
    order = min(max_order, len(candidate), len(reference))
    log_sum = 0.0
    for n in range(1, order + 1):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        total = sum(cand_counts.values())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total) / order
    brevity = 1.0 if len(candidate) >= len(reference) else math.exp(1 - len(reference) / len(candidate))
    return brevity * math.exp(log_sum)


def jaccard(a: Iterable[Hashable], b: Iterable[Hashable]) -> float:
    """Set Jaccard similarity over activity tokens; two empty sets match."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


@dataclass(frozen=True)
class MetricRow:
    k: int
    n_samples: int
    values: dict[str, float]


@dataclass(frozen=True)
class MetricReport:
    per_k: tuple[MetricRow, ...]
    aggregate_unweighted: dict[str, float]
    aggregate_weighted: dict[str, float]
    global_values: dict[str, float]

    @property
    def total_samples(self) -> int:
        return sum(row.n_samples for row in self.per_k)

    def to_json_dict(self) -> dict:
        return {
            "per_k": [
                {"k": row.k, "n_samples": row.n_samples, "metrics": row.values}
                for row in self.per_k
            ],
            "aggregate_unweighted": self.aggregate_unweighted,
            "aggregate_weighted": self.aggregate_weighted,
            "global": self.global_values,
        }


def assemble_report(
    rows: Sequence[MetricRow], global_values: Mapping[str, float]
) -> MetricReport:
    """Aggregate per-k rows into unweighted and sample-weighted means."""
    if not rows:
        raise PpmBenchError("cannot build a report from zero rows")
    rows = tuple(sorted(rows, key=lambda r: r.k))
    metrics = list(rows[0].values.keys())
    total = sum(r.n_samples for r in rows)
    unweighted = {
        m: sum(r.values[m] for r in rows) / len(rows) for m in metrics
    }
    weighted = {
        m: sum(r.values[m] * r.n_samples for r in rows) / total for m in metrics
    }
    return MetricReport(
        per_k=rows,
        aggregate_unweighted=unweighted,
        aggregate_weighted=weighted,
        global_values=dict(global_values),
    )


def build_report(samples: Iterable[tuple[int, Mapping[str, float]]]) -> MetricReport:
    """Report from per-sample metric values keyed by prefix length k.

    Per-k rows are means within each k group; the global block pools every
    sample, which for sample-decomposable metrics coincides with the weighted
    aggregate.
    """
    grouped: dict[int, list[Mapping[str, float]]] = {}
    pooled: dict[str, list[float]] = {}
    for k, values in samples:
        grouped.setdefault(k, []).append(values)
        for name, value in values.items():
            pooled.setdefault(name, []).append(value)
    if not grouped:
        raise PpmBenchError("cannot build a report from zero samples")
    rows = []
    for k, group in grouped.items():
        metrics = {name: sum(v[name] for v in group) / len(group) for name in group[0]}
        rows.append(MetricRow(k=k, n_samples=len(group), values=metrics))
    global_values = {name: sum(vals) / len(vals) for name, vals in pooled.items()}
    return assemble_report(rows, global_values)


def report_to_csv_rows(
    task: str, report: MetricReport, metrics: list[str] | None = None
) -> list[list[str]]:
    """Flatten one task's report: one row per k plus three aggregate rows.

    ``metrics`` fixes the column set (e.g. the union over several tasks);
    columns a report does not carry stay blank.
    """
    if metrics is None:
        metrics = sorted(report.aggregate_unweighted.keys() | report.global_values.keys())
    out: list[list[str]] = [["task", "row", "k", "n_samples", *metrics]]

    def fmt(values: Mapping[str, float]) -> list[str]:
        return [repr(values[m]) if m in values else "" for m in metrics]

    for row in report.per_k:
        out.append([task, "per_k", str(row.k), str(row.n_samples), *fmt(row.values)])
    total = str(report.total_samples)
    out.append([task, "aggregate_unweighted", "", total, *fmt(report.aggregate_unweighted)])
    out.append([task, "aggregate_weighted", "", total, *fmt(report.aggregate_weighted)])
    out.append([task, "global", "", total, *fmt(report.global_values)])
    return out

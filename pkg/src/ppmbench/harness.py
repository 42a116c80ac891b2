"""Suffix generation and task evaluation over a test split.

Generation walks predict -> sample -> append until END or a length cap,
accumulating absolute timestamps from the prefix's last known instant.
Evaluation produces a :class:`~ppmbench.metrics.MetricReport` per task with
the per-prefix-length breakdown and both aggregation modes. Every sample owns
a derived rng stream, so results are identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Sequence

from .errors import GenerationError, PpmBenchError
from .metrics import (
    MetricReport,
    MetricRow,
    accuracy,
    assemble_report,
    balanced_accuracy,
    bleu,
    dl_similarity,
    f1_macro,
    jaccard,
)
from .predictors import Predictor
from .preprocessing import END_ID, PAD_ID, PrefixSample
from .sampling import SamplerConfig, derive_stream, sample as sample_token

TASKS = (
    "next_activity",
    "next_timestamp",
    "suffix",
    "remaining_direct",
    "remaining_iterative",
)

GENERATION_MODES = ("iterative", "msp")


@dataclass(frozen=True)
class GenerationConfig:
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    max_len: int | None = None  # None: use the pad size
    clamp_negative_delta: bool = True
    mode: str = "iterative"
    msp_m: int = 1
    # Sensitivity variant: keep the END sentinel inside suffix metrics.
    include_end_in_suffix_metrics: bool = False

    def __post_init__(self):
        if self.mode not in GENERATION_MODES:
            raise PpmBenchError(f"unknown generation mode {self.mode!r}")
        if self.msp_m < 1:
            raise PpmBenchError(f"msp block size must be >= 1, got {self.msp_m}")

    def resolved_max_len(self, pad_size: int) -> int:
        if self.max_len is None:
            return pad_size
        if not 1 <= self.max_len <= pad_size:
            raise PpmBenchError(f"max_len {self.max_len} outside [1, {pad_size}]")
        return self.max_len


@dataclass(frozen=True)
class GeneratedSuffix:
    activity_ids: tuple[int, ...]
    delta_days: tuple[float, ...]
    timestamps: tuple[datetime, ...]
    terminated: bool

    def activities_only(self) -> list[int]:
        """Generated ids with END and PAD stripped, for sequence metrics."""
        return [t for t in self.activity_ids if t not in (END_ID, PAD_ID)]


def _clamped(delta: float | None, clamp: bool) -> float:
    value = 0.0 if delta is None else float(delta)
    return max(value, 0.0) if clamp else value


def generate_suffix(
    predictor: Predictor,
    prefix_sample: PrefixSample,
    cfg: GenerationConfig,
    rng,
) -> GeneratedSuffix:
    """Autoregressive generation, one predicted event per forward pass."""
    return _generate(predictor, prefix_sample, cfg, rng, block=1)


def generate_msp(
    predictor: Predictor,
    prefix_sample: PrefixSample,
    m: int,
    cfg: GenerationConfig,
    rng,
) -> GeneratedSuffix:
    """Block generation: m distributions per forward pass; END cuts the block."""
    caps = predictor.capabilities()
    if m > 1 and not caps.supports_multi_step:
        raise PpmBenchError("predictor does not support multi-step prediction")
    if m > caps.max_m:
        raise PpmBenchError(f"m={m} exceeds predictor capability max_m={caps.max_m}")
    return _generate(predictor, prefix_sample, cfg, rng, block=m)


def _generate(
    predictor: Predictor,
    prefix_sample: PrefixSample,
    cfg: GenerationConfig,
    rng,
    block: int,
) -> GeneratedSuffix:
    max_len = cfg.resolved_max_len(len(prefix_sample.suffix_ids))
    generated: list[int] = []
    deltas: list[float] = []
    timestamps: list[datetime] = []
    current = prefix_sample.prefix_end
    terminated = False
    while len(generated) < max_len and not terminated:
        steps = min(block, max_len - len(generated))
        try:
            distributions = predictor.predict(prefix_sample, tuple(generated), steps)
        except Exception as exc:
            raise GenerationError(
                f"predictor failed after {len(generated)} steps: {exc}",
                partial=tuple(generated),
            ) from exc
        for dist in distributions:
            token = sample_token(dist, cfg.sampler, rng)
            delta = _clamped(dist.delta_days, cfg.clamp_negative_delta)
            generated.append(token)
            deltas.append(delta)
            current = current + timedelta(days=delta)
            timestamps.append(current)
            if token == END_ID:
                terminated = True
                break  # discard the rest of the block
    return GeneratedSuffix(
        activity_ids=tuple(generated),
        delta_days=tuple(deltas),
        timestamps=tuple(timestamps),
        terminated=terminated,
    )


def remaining_time_iterative(suffix: GeneratedSuffix) -> float:
    """Sum of predicted increments until case end (post-clamp values)."""
    return math.fsum(suffix.delta_days)


def _check_provenance(samples: Sequence[PrefixSample]) -> None:
    tainted = {s.split for s in samples} - {None, "test"}
    if tainted:
        raise PpmBenchError(
            f"evaluation received samples tagged {sorted(tainted)}; only test samples are allowed"
        )


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise PpmBenchError(message)


@dataclass(frozen=True)
class _SampleOutcome:
    k: int
    values: dict[str, float]
    pred_id: int | None = None
    target_id: int | None = None


def evaluate_task(
    predictor: Predictor,
    test_samples: Sequence[PrefixSample],
    task: str,
    cfg: GenerationConfig,
    workers: int = 1,
) -> MetricReport:
    """Evaluate one prediction task over the test samples.

    Samples are processed in (case_id, k) order with one derived rng stream
    each; reports are byte-identical for any ``workers`` value.
    """
    if task not in TASKS:
        raise PpmBenchError(f"unknown task {task!r}; expected one of {TASKS}")
    if not test_samples:
        raise PpmBenchError("empty test set")
    _check_provenance(test_samples)
    caps = predictor.capabilities()
    if task == "next_timestamp":
        _require(caps.supports_time_delta, "predictor does not emit time deltas")
    if task == "remaining_direct":
        _require(caps.supports_remaining_time, "predictor does not emit remaining time")
    if task in ("suffix", "remaining_iterative") and cfg.mode == "msp":
        _require(caps.supports_multi_step, "msp generation needs multi-step support")
        _require(cfg.msp_m <= caps.max_m, f"msp block {cfg.msp_m} exceeds max_m {caps.max_m}")

    ordered = sorted(test_samples, key=lambda s: (s.case_id, s.k))

    def generate_for(sample: PrefixSample, rng) -> GeneratedSuffix:
        if cfg.mode == "msp":
            return generate_msp(predictor, sample, cfg.msp_m, cfg, rng)
        return generate_suffix(predictor, sample, cfg, rng)

    def one(index_sample: tuple[int, PrefixSample]) -> _SampleOutcome:
        index, sample = index_sample
        rng = derive_stream(cfg.sampler.seed, index)
        if task == "next_activity":
            dist = predictor.predict(sample, (), 1)[0]
            pred = sample_token(dist, cfg.sampler, rng)
            return _SampleOutcome(
                k=sample.k,
                values={"accuracy": float(pred == sample.next_activity_id)},
                pred_id=pred,
                target_id=sample.next_activity_id,
            )
        if task == "next_timestamp":
            dist = predictor.predict(sample, (), 1)[0]
            pred_delta = _clamped(dist.delta_days, cfg.clamp_negative_delta)
            err = abs(pred_delta - sample.next_delta_days)
            return _SampleOutcome(k=sample.k, values={"abs_error": err, "sq_error": err * err})
        if task == "remaining_direct":
            dist = predictor.predict(sample, (), 1)[0]
            pred_remaining = float(dist.remaining_days) if dist.remaining_days is not None else 0.0
            err = abs(pred_remaining - sample.remaining_time_days)
            return _SampleOutcome(k=sample.k, values={"abs_error": err, "sq_error": err * err})
        if task == "remaining_iterative":
            suffix = generate_for(sample, rng)
            err = abs(remaining_time_iterative(suffix) - sample.remaining_time_days)
            return _SampleOutcome(k=sample.k, values={"abs_error": err, "sq_error": err * err})
        # suffix task
        suffix = generate_for(sample, rng)
        if cfg.include_end_in_suffix_metrics:
            generated = [t for t in suffix.activity_ids if t != PAD_ID]
            true_suffix = [t for t, real in zip(sample.suffix_ids, sample.suffix_mask) if real]
        else:
            generated = suffix.activities_only()
            true_suffix = sample.true_suffix_activities()
        return _SampleOutcome(
            k=sample.k,
            values={
                "dl_similarity": dl_similarity(generated, true_suffix),
                "bleu": bleu(generated, true_suffix),
                "jaccard": jaccard(generated, true_suffix),
            },
        )

    jobs = list(enumerate(ordered))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, jobs))
    else:
        outcomes = [one(job) for job in jobs]
    return _assemble(task, outcomes)


def _assemble(task: str, outcomes: Sequence[_SampleOutcome]) -> MetricReport:
    grouped: dict[int, list[_SampleOutcome]] = {}
    for outcome in outcomes:
        grouped.setdefault(outcome.k, []).append(outcome)

    rows = []
    for k, group in sorted(grouped.items()):
        rows.append(MetricRow(k=k, n_samples=len(group), values=_metrics_of(task, group)))
    return assemble_report(rows, _metrics_of(task, list(outcomes)))


def _metrics_of(task: str, group: Sequence[_SampleOutcome]) -> dict[str, float]:
    if task == "next_activity":
        preds = [o.pred_id for o in group]
        targets = [o.target_id for o in group]
        return {
            "accuracy": accuracy(preds, targets),
            "balanced_accuracy": balanced_accuracy(preds, targets),
            "f1_macro": f1_macro(preds, targets),
        }
    if task in ("next_timestamp", "remaining_direct", "remaining_iterative"):
        mse = sum(o.values["sq_error"] for o in group) / len(group)
        return {
            "mae": sum(o.values["abs_error"] for o in group) / len(group),
            "mse": mse,
            "rmse": math.sqrt(mse),
        }
    return {
        name: sum(o.values[name] for o in group) / len(group)
        for name in ("dl_similarity", "bleu", "jaccard")
    }


def evaluate_tasks(
    predictor: Predictor,
    test_samples: Sequence[PrefixSample],
    tasks: Sequence[str],
    cfg: GenerationConfig,
    workers: int = 1,
) -> dict[str, MetricReport]:
    return {
        task: evaluate_task(predictor, test_samples, task, cfg, workers) for task in tasks
    }

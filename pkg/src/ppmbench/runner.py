"""Config-driven experiment pipeline with reproducibility manifest.

Stages: parse -> split -> fit on train -> build samples -> predictor ->
evaluate -> emit. The manifest records the config hash, master seed, split
file hash, and engine version; reruns with identical inputs write
byte-identical reports. On any stage failure, partial outputs are removed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import shutil
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .config import ExperimentConfig
from .errors import PpmBenchError
from .eventlog import EventLog, parse_csv, parse_xes
from .harness import GenerationConfig, evaluate_tasks
from .metrics import MetricReport, report_to_csv_rows
from .predictors import ExternalPredictor, fit_ngram
from .preprocessing import (
    PadPolicy,
    PrefixSample,
    TimeFeatureScaler,
    Vocabulary,
    build_vocabulary,
    compute_pad_size,
    fit_time_scaler,
    samples_for_split,
)
from .splitting import SplitAssignment, load_split, persist_split, split_log


class StageError(PpmBenchError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PreparedData:
    log: EventLog
    assignment: SplitAssignment
    vocab: Vocabulary
    pad_policy: PadPolicy
    scaler: TimeFeatureScaler
    samples: dict[str, list[PrefixSample]]


@dataclass
class RunResult:
    report_paths: list[Path]
    manifest: dict
    reports: dict[str, MetricReport]


def _config_hash(cfg: ExperimentConfig) -> str:
    def encode(obj):
        if hasattr(obj, "__dataclass_fields__"):
            return {name: encode(getattr(obj, name)) for name in obj.__dataclass_fields__}
        if isinstance(obj, (list, tuple)):
            return [encode(x) for x in obj]
        if isinstance(obj, dict):
            return {k: encode(v) for k, v in sorted(obj.items())}
        if hasattr(obj, "tolist"):
            return obj.tolist()
        return obj

    canonical = json.dumps(encode(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_dataset(cfg: ExperimentConfig) -> EventLog:
    path = Path(cfg.dataset.path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file {path} does not exist")
    with open(path, "rb") as handle:
        if cfg.dataset.format == "xes":
            return parse_xes(handle)
        return parse_csv(handle, cfg.dataset.columns, cfg.dataset.timestamp_format)


def _train_traces_for_fitting(log: EventLog, assignment: SplitAssignment):
    """Traces (or train-window segments) that fitted statistics may see."""
    if assignment.cut_points is None:
        return [log.traces[cid] for cid in sorted(assignment.train)]
    from .eventlog import Trace  # local import to avoid a cycle in type checkers

    segments = []
    for cid, (i1, _) in sorted(assignment.cut_points.items()):
        trace = log.traces[cid]
        if i1 >= 1:
            segments.append(Trace(case_id=cid, events=trace.events[:i1]))
    if not segments:
        raise PpmBenchError("time-based split leaves no train-window events to fit on")
    return segments


def prepare(cfg: ExperimentConfig) -> PreparedData:
    try:
        log = load_dataset(cfg)
    except Exception as exc:
        raise StageError("dataset", exc) from exc

    try:
        if cfg.split.path:
            with open(cfg.split.path, encoding="utf-8") as handle:
                assignment = load_split(handle)
            missing = set(log.case_ids()) - assignment.all_case_ids()
            if missing:
                raise PpmBenchError(
                    f"persisted split lacks {len(missing)} cases, e.g. {sorted(missing)[:3]}"
                )
        else:
            assignment = split_log(
                log, cfg.split.strategy, cfg.split.fractions, cfg.split_seed
            )
    except StageError:
        raise
    except Exception as exc:
        raise StageError("split", exc) from exc

    try:
        fit_traces = _train_traces_for_fitting(log, assignment)
        vocab = build_vocabulary(fit_traces)
        pad_policy = (
            PadPolicy(pad_size=cfg.preprocessing.pad, derivation="fixed")
            if cfg.preprocessing.pad
            else compute_pad_size(fit_traces)
        )
        scaler = fit_time_scaler(fit_traces)
        samples = {}
        for label in ("train", "val", "test"):
            if assignment.cut_points is not None:
                traces = [log.traces[cid] for cid in sorted(assignment.cut_points)]
            else:
                traces = [log.traces[cid] for cid in sorted(getattr(assignment, label))]
            samples[label] = samples_for_split(
                traces,
                vocab,
                pad_policy,
                cfg.preprocessing.n_gram,
                scaler,
                label,
                cut_points=assignment.cut_points,
                scale_all_time_features=cfg.preprocessing.scale_all_time_features,
            )
    except StageError:
        raise
    except Exception as exc:
        raise StageError("preprocessing", exc) from exc
    return PreparedData(
        log=log,
        assignment=assignment,
        vocab=vocab,
        pad_policy=pad_policy,
        scaler=scaler,
        samples=samples,
    )


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> RunResult:
    prepared = prepare(cfg)
    out_dir = Path(cfg.output.report_dir)
    staging = out_dir / ".staging"
    try:
        try:
            if cfg.predictor_ngram is not None:
                predictor = fit_ngram(
                    prepared.samples["train"],
                    n=cfg.predictor_ngram.n,
                    alpha=cfg.predictor_ngram.alpha,
                    vocab_size=prepared.vocab.size,
                )
                close = lambda: None
            else:
                external = ExternalPredictor(
                    cfg.predictor_external.command,
                    prepared.vocab,
                    prepared.pad_policy,
                    cfg.preprocessing.n_gram,
                    cfg.predictor_external.timeout,
                )
                predictor, close = external, external.close
        except Exception as exc:
            raise StageError("predictor", exc) from exc

        generation = GenerationConfig(
            sampler=cfg.sampler,
            max_len=cfg.generation.max_len,
            clamp_negative_delta=cfg.generation.clamp_negative_delta,
            mode=cfg.generation.mode,
            msp_m=cfg.generation.m,
            include_end_in_suffix_metrics=cfg.generation.include_end_in_suffix_metrics,
        )
        try:
            reports = evaluate_tasks(
                predictor, prepared.samples["test"], cfg.tasks, generation, workers
            )
        except Exception as exc:
            raise StageError("evaluate", exc) from exc
        finally:
            close()

        try:
            split_text = persist_split(prepared.assignment)
            manifest = {
                "engine_version": __version__,
                "config_hash": _config_hash(cfg),
                "master_seed": cfg.master_seed,
                "split_hash": hashlib.sha256(split_text.encode("utf-8")).hexdigest(),
                "dataset_path": cfg.dataset.path,
                "n_test_samples": len(prepared.samples["test"]),
                "vocab_size": prepared.vocab.size,
                "pad_size": prepared.pad_policy.pad_size,
            }
            staging.mkdir(parents=True, exist_ok=True)
            paths = _emit(cfg, staging, manifest, reports, split_text)
            final_paths = []
            for path in paths:
                target = out_dir / path.name
                shutil.move(str(path), target)
                final_paths.append(target)
            return RunResult(report_paths=final_paths, manifest=manifest, reports=reports)
        except StageError:
            raise
        except Exception as exc:
            raise StageError("emit", exc) from exc
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def _emit(
    cfg: ExperimentConfig,
    staging: Path,
    manifest: dict,
    reports: dict[str, MetricReport],
    split_text: str,
) -> list[Path]:
    paths = []
    document = {
        "manifest": manifest,
        "tasks": {
            task: _report_dict(report, cfg.output.emit_per_k)
            for task, report in sorted(reports.items())
        },
    }
    if "json" in cfg.output.formats:
        path = staging / "report.json"
        path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        paths.append(path)
    if "csv" in cfg.output.formats:
        path = staging / "report.csv"
        columns = sorted(
            {name for report in reports.values() for name in report.global_values}
        )
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            first = True
            for task, report in sorted(reports.items()):
                rows = report_to_csv_rows(task, report, metrics=columns)
                if not cfg.output.emit_per_k:
                    rows = [rows[0]] + [r for r in rows[1:] if r[1] != "per_k"]
                writer.writerows(rows if first else rows[1:])
                first = False
        paths.append(path)
    split_path = staging / "split.csv"
    split_path.write_text(split_text, encoding="utf-8")
    paths.append(split_path)
    return paths


def _report_dict(report: MetricReport, emit_per_k: bool) -> dict:
    document = report.to_json_dict()
    if not emit_per_k:
        document.pop("per_k")
    return document

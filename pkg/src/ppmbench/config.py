"""Experiment configuration: YAML schema, defaults, strict validation.

Unknown keys are errors and every problem found is reported at once. The
canonical encoding is YAML (a strict subset: nested mappings, scalars, and
lists); the full schema with defaults is documented in the README.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import IO, Any

import yaml

from .errors import ConfigurationError
from .harness import GENERATION_MODES, TASKS
from .sampling import STRATEGIES as SAMPLER_STRATEGIES
from .sampling import SamplerConfig
from .splitting import STRATEGIES as SPLIT_STRATEGIES, SplitFractions

DATASET_FORMATS = ("csv", "xes")
REPORT_FORMATS = ("json", "csv")

DEFAULT_COLUMNS = {"case": "case_id", "activity": "activity", "timestamp": "timestamp"}


@dataclass(frozen=True)
class DatasetConfig:
    path: str
    format: str = "csv"
    columns: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    timestamp_format: str = "auto"


@dataclass(frozen=True)
class SplitConfig:
    strategy: str = "case_random"
    fractions: SplitFractions = field(default_factory=SplitFractions)
    seed: int | None = None  # None: fall back to the master seed
    path: str | None = None  # persisted split overrides the strategy


@dataclass(frozen=True)
class PreprocessingConfig:
    n_gram: int = 5
    pad: int | None = None  # None: power-of-two rule on the train split
    scale_all_time_features: bool = False


@dataclass(frozen=True)
class NGramPredictorConfig:
    n: int = 5
    alpha: float = 0.0


@dataclass(frozen=True)
class ExternalPredictorConfig:
    command: tuple[str, ...]
    timeout: float = 30.0


@dataclass(frozen=True)
class GenerationSettings:
    max_len: int | None = None
    clamp_negative_delta: bool = True
    mode: str = "iterative"
    m: int = 1
    include_end_in_suffix_metrics: bool = False


@dataclass(frozen=True)
class OutputConfig:
    report_dir: str = "reports"
    formats: tuple[str, ...] = ("json",)
    emit_per_k: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    predictor_ngram: NGramPredictorConfig | None
    predictor_external: ExternalPredictorConfig | None
    split: SplitConfig = field(default_factory=SplitConfig)
    preprocessing: PreprocessingConfig = field(default_factory=PreprocessingConfig)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    tasks: tuple[str, ...] = TASKS
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    output: OutputConfig = field(default_factory=OutputConfig)
    master_seed: int = 0

    @property
    def split_seed(self) -> int:
        return self.split.seed if self.split.seed is not None else self.master_seed


class _Validator:
    """Collects every validation problem instead of failing on the first."""

    def __init__(self):
        self.errors: list[str] = []

    def fail(self, message: str) -> None:
        self.errors.append(message)

    def expect_keys(self, section: str, mapping: dict, allowed: set[str]) -> None:
        unknown = set(mapping) - allowed
        for key in sorted(unknown):
            self.fail(f"{section}: unknown key {key!r} (allowed: {sorted(allowed)})")

    def enum(self, section: str, value: Any, allowed: tuple, fallback):
        if value not in allowed:
            self.fail(f"{section}: {value!r} is not one of {list(allowed)}")
            return fallback
        return value

    def raise_if_failed(self) -> None:
        if self.errors:
            raise ConfigurationError(
                "invalid configuration:\n  - " + "\n  - ".join(self.errors)
            )


def _as_mapping(v: _Validator, section: str, value: Any) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        v.fail(f"{section}: expected a mapping, got {type(value).__name__}")
        return {}
    return value


def load_config(source: IO[str] | str) -> ExperimentConfig:
    """Parse and validate a YAML experiment config, applying all defaults."""
    text = source if isinstance(source, str) else source.read()
    try:
        raw = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a mapping")

    v = _Validator()
    v.expect_keys(
        "config",
        raw,
        {
            "dataset",
            "split",
            "preprocessing",
            "predictor",
            "sampler",
            "tasks",
            "generation",
            "output",
            "master_seed",
        },
    )

    dataset = _load_dataset(v, _as_mapping(v, "dataset", raw.get("dataset")))
    split = _load_split(v, _as_mapping(v, "split", raw.get("split")))
    preprocessing = _load_preprocessing(v, _as_mapping(v, "preprocessing", raw.get("preprocessing")))
    ngram, external = _load_predictor(v, _as_mapping(v, "predictor", raw.get("predictor")))
    sampler = _load_sampler(v, _as_mapping(v, "sampler", raw.get("sampler")), raw)
    tasks = _load_tasks(v, raw.get("tasks"))
    generation = _load_generation(v, _as_mapping(v, "generation", raw.get("generation")))
    output = _load_output(v, _as_mapping(v, "output", raw.get("output")))
    master_seed = raw.get("master_seed", 0)
    if not isinstance(master_seed, int):
        v.fail(f"master_seed: expected an integer, got {master_seed!r}")
        master_seed = 0
    if ngram is not None and ngram.n > preprocessing.n_gram:
        v.fail(
            f"predictor.ngram.n={ngram.n} exceeds the preprocessing window "
            f"n_gram={preprocessing.n_gram}"
        )

    v.raise_if_failed()
    return ExperimentConfig(
        dataset=dataset,
        predictor_ngram=ngram,
        predictor_external=external,
        split=split,
        preprocessing=preprocessing,
        sampler=sampler,
        tasks=tasks,
        generation=generation,
        output=output,
        master_seed=master_seed,
    )


def _load_dataset(v: _Validator, section: dict) -> DatasetConfig:
    v.expect_keys("dataset", section, {"path", "format", "columns", "timestamp_format"})
    path = section.get("path")
    if not path:
        v.fail("dataset: 'path' is required")
        path = ""
    fmt = v.enum("dataset.format", section.get("format", "csv"), DATASET_FORMATS, "csv")
    columns = dict(DEFAULT_COLUMNS)
    raw_cols = _as_mapping(v, "dataset.columns", section.get("columns"))
    v.expect_keys("dataset.columns", raw_cols, {"case", "activity", "timestamp", "resource"})
    columns.update({k: str(val) for k, val in raw_cols.items()})
    return DatasetConfig(
        path=str(path),
        format=fmt,
        columns=columns,
        timestamp_format=str(section.get("timestamp_format", "auto")),
    )


def _load_split(v: _Validator, section: dict) -> SplitConfig:
    v.expect_keys("split", section, {"strategy", "fractions", "seed", "path"})
    strategy = v.enum(
        "split.strategy", section.get("strategy", "case_random"), SPLIT_STRATEGIES, "case_random"
    )
    fractions = SplitFractions()
    if "fractions" in section:
        raw = section["fractions"]
        try:
            if isinstance(raw, dict):
                fractions = SplitFractions(**{k: float(val) for k, val in raw.items()})
            elif isinstance(raw, (list, tuple)) and len(raw) == 3:
                fractions = SplitFractions(*[float(x) for x in raw])
            else:
                v.fail(f"split.fractions: expected 3 numbers, got {raw!r}")
        except (TypeError, ValueError) as exc:
            v.fail(f"split.fractions: {exc}")
        except Exception as exc:  # SplitFractions invariant violations
            v.fail(f"split.fractions: {exc}")
    seed = section.get("seed")
    if seed is not None and not isinstance(seed, int):
        v.fail(f"split.seed: expected an integer, got {seed!r}")
        seed = None
    path = section.get("path")
    return SplitConfig(
        strategy=strategy,
        fractions=fractions,
        seed=seed,
        path=str(path) if path else None,
    )


def _load_preprocessing(v: _Validator, section: dict) -> PreprocessingConfig:
    v.expect_keys("preprocessing", section, {"n_gram", "pad", "scale_all_time_features"})
    n_gram = section.get("n_gram", 5)
    if not isinstance(n_gram, int) or n_gram < 1:
        v.fail(f"preprocessing.n_gram: expected an integer >= 1, got {n_gram!r}")
        n_gram = 5
    pad = section.get("pad", "auto")
    if pad in ("auto", None):
        pad_value = None
    elif isinstance(pad, int) and pad >= 2 and pad & (pad - 1) == 0:
        pad_value = pad
    else:
        v.fail(f"preprocessing.pad: expected 'auto' or a power of two, got {pad!r}")
        pad_value = None
    scale_all = bool(section.get("scale_all_time_features", False))
    return PreprocessingConfig(n_gram=n_gram, pad=pad_value, scale_all_time_features=scale_all)


def _load_predictor(
    v: _Validator, section: dict
) -> tuple[NGramPredictorConfig | None, ExternalPredictorConfig | None]:
    v.expect_keys("predictor", section, {"ngram", "external"})
    sources = [key for key in ("ngram", "external") if key in section]
    if len(sources) != 1:
        v.fail("predictor: exactly one of 'ngram' or 'external' is required")
        return NGramPredictorConfig(), None
    if sources == ["ngram"]:
        sub = _as_mapping(v, "predictor.ngram", section["ngram"])
        v.expect_keys("predictor.ngram", sub, {"n", "alpha"})
        n = sub.get("n", 5)
        alpha = sub.get("alpha", 0.0)
        if not isinstance(n, int) or n < 1:
            v.fail(f"predictor.ngram.n: expected an integer >= 1, got {n!r}")
            n = 5
        if not isinstance(alpha, (int, float)) or alpha < 0:
            v.fail(f"predictor.ngram.alpha: expected a number >= 0, got {alpha!r}")
            alpha = 0.0
        return NGramPredictorConfig(n=n, alpha=float(alpha)), None
    sub = _as_mapping(v, "predictor.external", section["external"])
    v.expect_keys("predictor.external", sub, {"command", "timeout"})
    command = sub.get("command")
    if isinstance(command, str):
        command = tuple(command.split())
    elif isinstance(command, list) and all(isinstance(c, str) for c in command):
        command = tuple(command)
    else:
        v.fail(f"predictor.external.command: expected a string or list, got {command!r}")
        command = ()
    timeout = sub.get("timeout", 30.0)
    if not isinstance(timeout, (int, float)) or timeout <= 0:
        v.fail(f"predictor.external.timeout: expected a number > 0, got {timeout!r}")
        timeout = 30.0
    return None, ExternalPredictorConfig(command=command, timeout=float(timeout))


def _load_sampler(v: _Validator, section: dict, raw: dict) -> SamplerConfig:
    v.expect_keys("sampler", section, {"strategy", "temperature", "k", "p", "seed"})
    strategy = v.enum(
        "sampler.strategy", section.get("strategy", "greedy"), SAMPLER_STRATEGIES, "greedy"
    )
    seed = section.get("seed", raw.get("master_seed", 0))
    try:
        return SamplerConfig(
            strategy=strategy,
            temperature=float(section.get("temperature", 1.0)),
            k=section.get("k"),
            p=section.get("p"),
            seed=seed if isinstance(seed, int) else 0,
        )
    except ConfigurationError as exc:
        v.fail(f"sampler: {exc}")
        return SamplerConfig()


def _load_tasks(v: _Validator, raw_tasks: Any) -> tuple[str, ...]:
    if raw_tasks is None:
        return TASKS
    if not isinstance(raw_tasks, list) or not raw_tasks:
        v.fail(f"tasks: expected a non-empty list, got {raw_tasks!r}")
        return TASKS
    tasks = []
    for task in raw_tasks:
        tasks.append(v.enum("tasks", task, TASKS, TASKS[0]))
    return tuple(tasks)


def _load_generation(v: _Validator, section: dict) -> GenerationSettings:
    v.expect_keys(
        "generation",
        section,
        {"max_len", "clamp_negative_delta", "mode", "m", "include_end_in_suffix_metrics"},
    )
    max_len = section.get("max_len")
    if max_len is not None and (not isinstance(max_len, int) or max_len < 1):
        v.fail(f"generation.max_len: expected an integer >= 1, got {max_len!r}")
        max_len = None
    mode = v.enum("generation.mode", section.get("mode", "iterative"), GENERATION_MODES, "iterative")
    m = section.get("m", 1)
    if not isinstance(m, int) or m < 1:
        v.fail(f"generation.m: expected an integer >= 1, got {m!r}")
        m = 1
    return GenerationSettings(
        max_len=max_len,
        clamp_negative_delta=bool(section.get("clamp_negative_delta", True)),
        mode=mode,
        m=m,
        include_end_in_suffix_metrics=bool(section.get("include_end_in_suffix_metrics", False)),
    )


def _load_output(v: _Validator, section: dict) -> OutputConfig:
    v.expect_keys("output", section, {"report_dir", "formats", "emit_per_k"})
    formats = section.get("formats", ["json"])
    if isinstance(formats, str):
        formats = [formats]
    if not isinstance(formats, list) or not formats:
        v.fail(f"output.formats: expected a non-empty list, got {formats!r}")
        formats = ["json"]
    formats = tuple(v.enum("output.formats", f, REPORT_FORMATS, "json") for f in formats)
    return OutputConfig(
        report_dir=str(section.get("report_dir", "reports")),
        formats=formats,
        emit_per_k=bool(section.get("emit_per_k", True)),
    )

"""Benchmarking engine for predictive process mining.

Ingests CSV/XES event logs, produces reproducible splits and prefix/suffix
samples, and evaluates next-activity / next-timestamp / suffix / remaining-
time predictors under one metric suite with leakage-safe preprocessing.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    EmptyLogError,
    FormatError,
    GenerationError,
    InfeasibleSplitError,
    InvalidDistributionError,
    PadOverflowError,
    ParseError,
    PpmBenchError,
    ProtocolError,
    ValidationError,
)
from .eventlog import (
    DatasetStats,
    Event,
    EventLog,
    Trace,
    compute_stats,
    parse_csv,
    parse_xes,
    serialize_csv,
)
from .splitting import (
    SplitAssignment,
    SplitFractions,
    load_split,
    persist_split,
    split_by_case,
    split_combined,
    split_log,
    split_stratified_variants,
    split_time_based,
)
from .preprocessing import (
    END_ID,
    END_TOKEN,
    PAD_ID,
    PAD_TOKEN,
    START_ID,
    START_TOKEN,
    UNK_ID,
    UNK_TOKEN,
    PadPolicy,
    PrefixSample,
    TimeFeatureScaler,
    Vocabulary,
    build_vocabulary,
    compute_pad_size,
    export_samples_jsonl,
    extract_time_features,
    fit_time_scaler,
    make_samples,
    samples_for_split,
)
from .metrics import (
    MetricReport,
    MetricRow,
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
from .sampling import (
    PredictionDistribution,
    SamplerConfig,
    apply_temperature,
    derive_stream,
    sample,
)
from .predictors import (
    ExternalPredictor,
    GroundTruthPredictor,
    LineChannel,
    NGramModel,
    PredictorCapabilities,
    external_handshake,
    external_predict,
    fit_ngram,
    predict_multi,
    predict_next,
)
from .harness import (
    GeneratedSuffix,
    GenerationConfig,
    evaluate_task,
    evaluate_tasks,
    generate_msp,
    generate_suffix,
    remaining_time_iterative,
)
from .config import ExperimentConfig, load_config
from .runner import RunResult, prepare, run_experiment

"""Command-line front end.

Exit codes: 0 success, 1 validation error (bad config, bad file format,
bad arguments), 2 runtime error (missing files, stage failures, protocol
violations).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import PpmBenchError, ValidationError
from .eventlog import compute_stats, parse_csv, parse_xes
from .predictors import LineChannel, external_handshake
from .preprocessing import (
    PadPolicy,
    Vocabulary,
    build_vocabulary,
    export_samples_jsonl,
)
from .runner import prepare, run_experiment
from .splitting import SplitFractions, persist_split, split_log


def _dataset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("dataset", help="path to a CSV or XES event log")
    parser.add_argument("--format", choices=("csv", "xes"), default=None,
                        help="default: by file extension")
    parser.add_argument("--case", default="case_id", help="CSV case-id column")
    parser.add_argument("--activity", default="activity", help="CSV activity column")
    parser.add_argument("--timestamp", default="timestamp", help="CSV timestamp column")
    parser.add_argument("--resource", default=None, help="CSV resource column")
    parser.add_argument("--timestamp-format", default="auto",
                        help="strptime pattern or 'auto'")


def _parse_log(args: argparse.Namespace):
    path = Path(args.dataset)
    if not path.exists():
        raise PpmBenchError(f"dataset file {path} does not exist")
    fmt = args.format or ("xes" if path.suffix.lower() == ".xes" else "csv")
    with open(path, "rb") as handle:
        if fmt == "xes":
            return parse_xes(handle)
        mapping = {"case": args.case, "activity": args.activity, "timestamp": args.timestamp}
        if args.resource:
            mapping["resource"] = args.resource
        return parse_csv(handle, mapping, args.timestamp_format)


def _cmd_stats(args: argparse.Namespace) -> int:
    log = _parse_log(args)
    print(json.dumps(compute_stats(log).to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    log = _parse_log(args)
    try:
        parts = [float(x) for x in args.fractions.split(",")]
    except ValueError as exc:
        raise ValidationError(f"--fractions: {exc}") from None
    if len(parts) != 3:
        raise ValidationError(
            f"--fractions expects three comma-separated numbers, got {args.fractions!r}"
        )
    fractions = SplitFractions(*parts)
    assignment = split_log(log, args.strategy, fractions, args.seed)
    with open(args.out, "w", encoding="utf-8") as handle:
        persist_split(assignment, handle)
    print(f"wrote {args.out}: train={len(assignment.train)} val={len(assignment.val)} "
          f"test={len(assignment.test)} dropped={len(assignment.dropped)}")
    return 0


def _cmd_export_samples(args: argparse.Namespace) -> int:
    with open(args.config, encoding="utf-8") as handle:
        cfg = load_config(handle)
    prepared = prepare(cfg)
    wanted = args.split.split(",") if args.split else ["train", "val", "test"]
    count = 0
    with open(args.out, "w", encoding="utf-8") as handle:
        for label in wanted:
            if label not in prepared.samples:
                raise ValidationError(f"unknown split label {label!r}")
            count += export_samples_jsonl(prepared.samples[label], handle)
    print(f"wrote {count} samples to {args.out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    with open(args.config, encoding="utf-8") as handle:
        cfg = load_config(handle)
    result = run_experiment(cfg, workers=args.workers)
    for path in result.report_paths:
        print(f"wrote {path}")
    return 0


def _cmd_protocol_check(args: argparse.Namespace) -> int:
    if not args.command:
        raise ValidationError("protocol-check needs a predictor command after '--'")
    # A tiny two-activity vocabulary exercises the handshake end to end.
    vocab = _probe_vocabulary()
    channel = LineChannel(args.command)
    try:
        caps = external_handshake(
            channel, vocab, PadPolicy(pad_size=8), n=4, timeout=args.timeout
        )
    finally:
        channel.close()
    print("handshake ok: " + json.dumps({
        "supports_multi_step": caps.supports_multi_step,
        "max_m": caps.max_m,
        "supports_remaining_time": caps.supports_remaining_time,
        "supports_time_delta": caps.supports_time_delta,
    }, sort_keys=True))
    return 0


def _probe_vocabulary() -> Vocabulary:
    from datetime import datetime, timezone

    from .eventlog import Event, Trace

    t0 = datetime(2020, 1, 1, tzinfo=timezone.utc)
    trace = Trace(
        case_id="probe",
        events=(
            Event(case_id="probe", activity="a", timestamp=t0),
            Event(case_id="probe", activity="b", timestamp=t0),
        ),
    )
    return build_vocabulary([trace])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppmbench",
        description="Benchmarking engine for predictive process mining",
    )
    sub = parser.add_subparsers(dest="command_name", required=True)

    p_stats = sub.add_parser("stats", help="dataset statistics as JSON")
    _dataset_args(p_stats)
    p_stats.set_defaults(func=_cmd_stats)

    p_split = sub.add_parser("split", help="create and persist a split")
    _dataset_args(p_split)
    p_split.add_argument("--strategy", required=True,
                         choices=("case_random", "time_based", "combined", "stratified_variants"))
    p_split.add_argument("--fractions", default="0.8,0.1,0.1")
    p_split.add_argument("--seed", type=int, default=0)
    p_split.add_argument("--out", required=True)
    p_split.set_defaults(func=_cmd_split)

    p_export = sub.add_parser("export-samples", help="encoded samples as JSON Lines")
    p_export.add_argument("config")
    p_export.add_argument("--out", required=True)
    p_export.add_argument("--split", default=None, help="comma-separated split labels")
    p_export.set_defaults(func=_cmd_export_samples)

    p_run = sub.add_parser("run", help="run a full experiment from a config")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("protocol-check", help="handshake against an external predictor")
    p_check.add_argument("--timeout", type=float, default=30.0)
    p_check.add_argument("command", nargs=argparse.REMAINDER,
                         help="predictor command line (prefix with --)")
    p_check.set_defaults(func=_cmd_protocol_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None):
        # argparse REMAINDER keeps a leading '--' separator
        args.command = [c for c in args.command if c != "--"] if isinstance(args.command, list) else args.command
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PpmBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

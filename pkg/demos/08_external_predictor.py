"""Plugging an out-of-process predictor into the engine.

Writes a ~30-line predictor speaking the line protocol (see PROTOCOL.md) to
a temp file, then handshakes and evaluates it. Any language works the same
way; the adapter/ package does this in TypeScript. Run from the repo root.
"""

import sys
import tempfile
import textwrap
from pathlib import Path

from ppmbench import (
    ExternalPredictor,
    SplitFractions,
    build_vocabulary,
    compute_pad_size,
    evaluate_task,
    fit_time_scaler,
    parse_csv,
    samples_for_split,
    split_by_case,
)
from ppmbench.harness import GenerationConfig

PREDICTOR_SOURCE = textwrap.dedent(
    """
    import json, sys

    # Hand-written domain knowledge: the usual successor of each step in the
    # bundled order-handling process. The vocabulary arrives at init time,
    # so rules are written against activity names, not ids.
    RULES = {
        "<START>": "receive order",
        "receive order": "check stock",
        "manual review": "check stock",
        "check stock": "ship goods",
        "back-order": "restock",
        "restock": "ship goods",
        "ship goods": "send invoice",
        "send invoice": "payment received",
        "payment received": "<END>",
        "cancel order": "<END>",
        "archive": "<END>",
    }

    token_of, name_of, vocab_size = {}, {}, 0
    for line in sys.stdin:
        msg = json.loads(line)
        if msg["type"] == "init":
            token_of = msg["vocabulary"]
            name_of = {i: name for name, i in token_of.items()}
            vocab_size = len(token_of)
            print(json.dumps({"type": "capabilities", "vocab_size": vocab_size,
                              "supports_multi_step": False, "max_m": 1,
                              "supports_remaining_time": False,
                              "supports_time_delta": False}), flush=True)
        elif msg["type"] == "predict":
            last = next((t for t in reversed(msg["input_ids"]) if t != 0), 1)
            successor = RULES.get(name_of.get(last, ""), "<END>")
            probs = [0.0] * vocab_size
            probs[token_of.get(successor, 2)] = 1.0
            print(json.dumps({"type": "prediction",
                              "request_id": msg["request_id"],
                              "probabilities": [probs] * msg["m"]}), flush=True)
        elif msg["type"] == "shutdown":
            break
    """
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
test_samples = samples_for_split(test, vocab, pad, 4, scaler, "test")

with tempfile.NamedTemporaryFile("w", suffix=".py", delete=False) as handle:
    handle.write(PREDICTOR_SOURCE)
    script = handle.name

with ExternalPredictor([sys.executable, script], vocab, pad, n=4, timeout=15.0) as predictor:
    caps = predictor.capabilities()
    print(f"handshake ok: multi_step={caps.supports_multi_step} max_m={caps.max_m}")
    report = evaluate_task(predictor, test_samples, "next_activity", GenerationConfig())
    print(f"rule-based accuracy on {report.total_samples} samples: "
          f"{report.global_values['accuracy']:.4f}")
    print("per prefix length:")
    for row in report.per_k:
        print(f"  k={row.k:2d} n={row.n_samples:3d} accuracy={row.values['accuracy']:.4f}")

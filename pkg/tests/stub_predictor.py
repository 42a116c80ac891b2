"""Minimal external predictor used by the protocol tests.

Usage: python stub_predictor.py [mode]

Modes: ok (default), bad-sum (1.00005, accepted after renormalization),
very-bad-sum (rejected), nan, wrong-vocab, no-type, wrong-id, slow.
"""

from __future__ import annotations

import json
import sys
import time


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    vocab_size = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            reply({"type": "error", "message": "malformed JSON"})
            continue
        kind = message.get("type")
        if kind == "init":
            vocab_size = len(message["vocabulary"])
            declared = vocab_size + 1 if mode == "wrong-vocab" else vocab_size
            reply(
                {
                    "type": "capabilities",
                    "vocab_size": declared,
                    "supports_multi_step": False,
                    "max_m": 1,
                    "supports_remaining_time": True,
                    "supports_time_delta": True,
                }
            )
        elif kind == "predict":
            if mode == "slow":
                time.sleep(3)
            request_id = message["request_id"]
            if mode == "wrong-id":
                request_id += 1
            m = message.get("m", 1)
            probs = uniform(vocab_size)
            if mode == "bad-sum":
                probs[1] += 0.00005
            elif mode == "very-bad-sum":
                probs[1] += 0.01
            elif mode == "nan":
                probs[1] = float("nan")
            payload = {
                "type": "prediction",
                "request_id": request_id,
                "probabilities": [probs for _ in range(m)],
                "delta_days": [0.5] * m,
                "remaining_days": 1.0,
            }
            if mode == "no-type":
                del payload["type"]
            reply(payload)
        elif kind == "shutdown":
            return 0
    return 0


def uniform(vocab_size: int) -> list[float]:
    probs = [1.0 / (vocab_size - 1)] * vocab_size
    probs[0] = 0.0
    return probs


def reply(message: dict) -> None:
    sys.stdout.write(json.dumps(message) + "\n")
    sys.stdout.flush()


if __name__ == "__main__":
    sys.exit(main())

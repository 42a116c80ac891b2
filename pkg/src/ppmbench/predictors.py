"""Predictor contract, n-gram frequency baseline, and the external bridge.

The baseline estimates next-activity probabilities by (optionally smoothed)
relative frequency over rolling context windows and predicts time targets as
context-conditional means. External predictors are separate processes spoken
to over newline-delimited JSON on stdin/stdout; see PROTOCOL.md for the
frozen message shapes.
"""

from __future__ import annotations

import json
import math
import queue
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import PpmBenchError, ProtocolError
from .preprocessing import END_ID, FEATURE_NAMES, PAD_ID, PadPolicy, PrefixSample, Vocabulary
from .sampling import PredictionDistribution

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class PredictorCapabilities:
    supports_multi_step: bool
    max_m: int
    supports_remaining_time: bool
    supports_time_delta: bool

    def __post_init__(self):
        if self.supports_multi_step and self.max_m < 1:
            raise ProtocolError("multi-step support declared with max_m < 1")


class Predictor(Protocol):
    """Anything that maps a prefix (plus already-generated ids) to distributions."""

    def capabilities(self) -> PredictorCapabilities: ...

    def predict(
        self, sample: PrefixSample, generated: Sequence[int] = (), m: int = 1
    ) -> list[PredictionDistribution]: ...


class _MeanState:
    __slots__ = ("total", "count")

    def __init__(self):
        self.total = 0.0
        self.count = 0

    def add(self, value: float) -> None:
        self.total += value
        self.count += 1

    def mean(self, fallback: float) -> float:
        return self.total / self.count if self.count else fallback


@dataclass
class NGramModel:
    """Rolling-window frequency model over encoded prefix samples."""

    n: int
    alpha: float
    vocab_size: int
    pad_size: int
    counts: dict[tuple[int, ...], dict[int, int]] = field(default_factory=dict)
    delta_means: dict[tuple[int, ...], _MeanState] = field(default_factory=dict)
    remaining_means: dict[tuple[int, ...], _MeanState] = field(default_factory=dict)
    global_mean_delta: float = 0.0
    global_mean_remaining: float = 0.0

    def capabilities(self) -> PredictorCapabilities:
        return PredictorCapabilities(
            supports_multi_step=True,
            max_m=self.pad_size,
            supports_remaining_time=True,
            supports_time_delta=True,
        )

    def _context(self, ids: Sequence[int]) -> tuple[int, ...]:
        window = list(ids)[-self.n :]
        return tuple([PAD_ID] * (self.n - len(window)) + window)

    def _distribution(self, context: tuple[int, ...]) -> np.ndarray:
        probs = np.zeros(self.vocab_size)
        table = self.counts.get(context)
        total = sum(table.values()) if table else 0
        sampleable = self.vocab_size - 1  # PAD is never a legal next activity
        denom = total + self.alpha * sampleable
        if denom <= 0:
            probs[1:] = 1.0 / sampleable  # unseen context, no smoothing: uniform
            return probs
        for token_id in range(1, self.vocab_size):
            count = table.get(token_id, 0) if table else 0
            probs[token_id] = (count + self.alpha) / denom
        return probs

    def predict(
        self, sample: PrefixSample, generated: Sequence[int] = (), m: int = 1
    ) -> list[PredictionDistribution]:
        if len(sample.input_ids) < self.n:
            raise PpmBenchError(
                f"sample window of {len(sample.input_ids)} ids is shorter than n={self.n}"
            )
        if not 1 <= m <= self.pad_size:
            raise PpmBenchError(f"m={m} outside [1, {self.pad_size}]")
        ids = list(sample.input_ids) + list(generated)
        out = []
        for _ in range(m):
            context = self._context(ids)
            probs = self._distribution(context)
            delta = self.delta_means.get(context, _MeanState()).mean(self.global_mean_delta)
            remaining = self.remaining_means.get(context, _MeanState()).mean(
                self.global_mean_remaining
            )
            out.append(
                PredictionDistribution(probs=probs, delta_days=delta, remaining_days=remaining)
            )
            ids.append(int(np.argmax(probs)))  # chained greedy expansion
        return out

    def log_likelihood(self, samples: Iterable[PrefixSample]) -> float:
        """Sum of log P(next activity | context) over samples."""
        total = 0.0
        for sample in samples:
            probs = self._distribution(self._context(sample.input_ids))
            p = probs[sample.next_activity_id]
            total += math.log(p) if p > 0 else -math.inf
        return total


def fit_ngram(
    train_samples: Sequence[PrefixSample],
    n: int,
    alpha: float = 0.0,
    vocab_size: int | None = None,
) -> NGramModel:
    """Count (last n input ids -> next activity) plus per-context time means.

    ``vocab_size`` defaults to the largest id observed in the train samples
    plus one; pass the real vocabulary size when smoothing should cover
    train-unseen ids too.
    """
    if not train_samples:
        raise PpmBenchError("cannot fit an n-gram model on zero samples")
    if n < 1:
        raise PpmBenchError(f"context length must be >= 1, got {n}")
    if alpha < 0:
        raise PpmBenchError(f"smoothing alpha must be >= 0, got {alpha}")
    observed = 0
    pad_size = len(train_samples[0].suffix_ids)
    model = NGramModel(n=n, alpha=alpha, vocab_size=0, pad_size=pad_size)
    delta_total, remaining_total = _MeanState(), _MeanState()
    for sample in train_samples:
        context = model._context(sample.input_ids)
        table = model.counts.setdefault(context, {})
        table[sample.next_activity_id] = table.get(sample.next_activity_id, 0) + 1
        model.delta_means.setdefault(context, _MeanState()).add(sample.next_delta_days)
        model.remaining_means.setdefault(context, _MeanState()).add(sample.remaining_time_days)
        delta_total.add(sample.next_delta_days)
        remaining_total.add(sample.remaining_time_days)
        observed = max(observed, max(sample.input_ids), sample.next_activity_id)
    model.vocab_size = vocab_size if vocab_size is not None else observed + 1
    model.global_mean_delta = delta_total.mean(0.0)
    model.global_mean_remaining = remaining_total.mean(0.0)
    return model


def predict_next(model: NGramModel, sample: PrefixSample) -> PredictionDistribution:
    return model.predict(sample, (), 1)[0]


def predict_multi(model: NGramModel, sample: PrefixSample, m: int) -> list[PredictionDistribution]:
    return model.predict(sample, (), m)


class GroundTruthPredictor:
    """Diagnostic predictor that reads the true targets off each sample.

    Point mass on the next true suffix token with the true time targets; END
    with zero delta once the true suffix is exhausted. Running any task
    against it must produce perfect scores, which pins the whole evaluation
    path end to end.
    """

    def __init__(self, vocab_size: int, pad_size: int):
        self.vocab_size = vocab_size
        self.pad_size = pad_size

    def capabilities(self) -> PredictorCapabilities:
        return PredictorCapabilities(
            supports_multi_step=True,
            max_m=self.pad_size,
            supports_remaining_time=True,
            supports_time_delta=True,
        )

    def predict(
        self, sample: PrefixSample, generated: Sequence[int] = (), m: int = 1
    ) -> list[PredictionDistribution]:
        true_ids = [t for t, real in zip(sample.suffix_ids, sample.suffix_mask) if real]
        true_deltas = [
            d for d, real in zip(sample.suffix_deltas_days, sample.suffix_mask) if real
        ]
        out = []
        for step in range(m):
            position = len(generated) + step
            if position < len(true_ids):
                token, delta = true_ids[position], true_deltas[position]
                remaining = math.fsum(true_deltas[position:])
            else:
                token, delta, remaining = END_ID, 0.0, 0.0
            probs = np.zeros(self.vocab_size)
            probs[token] = 1.0
            out.append(
                PredictionDistribution(probs=probs, delta_days=delta, remaining_days=remaining)
            )
        return out


class LineChannel:
    """Newline-delimited JSON over a child process's stdin/stdout."""

    def __init__(self, command: Sequence[str]):
        try:
            self._proc = subprocess.Popen(
                list(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot start predictor {command!r}: {exc}") from None
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def send(self, message: dict) -> None:
        if self._proc.stdin is None or self._proc.poll() is not None:
            raise ProtocolError("predictor channel is closed")
        try:
            self._proc.stdin.write(json.dumps(message) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ProtocolError(f"predictor channel write failed: {exc}") from None

    def recv(self, timeout: float) -> dict:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ProtocolError(f"predictor reply timed out after {timeout}s") from None
        if line is None:
            raise ProtocolError("predictor closed its output stream")
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"predictor sent malformed JSON: {exc}") from None
        if not isinstance(message, dict):
            raise ProtocolError("predictor reply is not a JSON object")
        return message

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self.send({"type": "shutdown"})
            except ProtocolError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        if self._proc.stdin:
            self._proc.stdin.close()


def external_handshake(
    channel: LineChannel,
    vocab: Vocabulary,
    pad_policy: PadPolicy,
    n: int,
    timeout: float = DEFAULT_TIMEOUT,
) -> PredictorCapabilities:
    """Send the init message and validate the capabilities reply."""
    channel.send(
        {
            "type": "init",
            "protocol": PROTOCOL_VERSION,
            "vocabulary": dict(vocab.token_to_id),
            "pad_size": pad_policy.pad_size,
            "ngram_size": n,
            "feature_names": list(FEATURE_NAMES),
        }
    )
    reply = channel.recv(timeout)
    if reply.get("type") != "capabilities":
        raise ProtocolError(f"expected a 'capabilities' reply, got {reply.get('type')!r}")
    try:
        declared = int(reply["vocab_size"])
        caps = PredictorCapabilities(
            supports_multi_step=bool(reply["supports_multi_step"]),
            max_m=int(reply["max_m"]),
            supports_remaining_time=bool(reply["supports_remaining_time"]),
            supports_time_delta=bool(reply["supports_time_delta"]),
        )
    except KeyError as exc:
        raise ProtocolError(f"capabilities reply lacks field {exc}") from None
    if declared != vocab.size:
        raise ProtocolError(
            f"predictor declared vocab size {declared}, engine has {vocab.size}"
        )
    return caps


def external_predict(
    channel: LineChannel,
    request_id: int,
    input_ids: Sequence[int],
    time_features: Sequence[Sequence[float]],
    m: int,
    vocab_size: int,
    timeout: float = DEFAULT_TIMEOUT,
) -> list[PredictionDistribution]:
    """One predict round trip; vectors off by more than 1e-4 mass are rejected."""
    channel.send(
        {
            "type": "predict",
            "request_id": request_id,
            "input_ids": list(input_ids),
            "time_features": [list(f) for f in time_features],
            "m": m,
        }
    )
    reply = channel.recv(timeout)
    if reply.get("type") == "error":
        raise ProtocolError(f"predictor error: {reply.get('message')}")
    if reply.get("type") != "prediction":
        raise ProtocolError(f"expected a 'prediction' reply, got {reply.get('type')!r}")
    if reply.get("request_id") != request_id:
        raise ProtocolError(
            f"reply id {reply.get('request_id')} does not echo request id {request_id}"
        )
    vectors = reply.get("probabilities")
    if not isinstance(vectors, list) or len(vectors) != m:
        raise ProtocolError(f"expected {m} probability vectors")
    deltas = reply.get("delta_days")
    remaining = reply.get("remaining_days")
    out = []
    for step, vector in enumerate(vectors):
        probs = np.asarray(vector, dtype=np.float64)
        if probs.shape != (vocab_size,):
            raise ProtocolError(
                f"probability vector {step} has length {probs.size}, expected {vocab_size}"
            )
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ProtocolError(f"probability vector {step} contains invalid values")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-4:
            raise ProtocolError(
                f"probability vector {step} sums to {total}, deviation exceeds 1e-4"
            )
        probs = probs / total
        out.append(
            PredictionDistribution(
                probs=probs,
                delta_days=float(deltas[step]) if deltas is not None else None,
                remaining_days=float(remaining) if remaining is not None else None,
            )
        )
    return out


class ExternalPredictor:
    """Engine-side wrapper owning one predictor process end to end."""

    def __init__(
        self,
        command: Sequence[str],
        vocab: Vocabulary,
        pad_policy: PadPolicy,
        n: int,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        self.vocab = vocab
        self.pad_size = pad_policy.pad_size
        self.n = n
        self.timeout = timeout
        self.channel = LineChannel(command)
        try:
            self._capabilities = external_handshake(self.channel, vocab, pad_policy, n, timeout)
        except ProtocolError:
            self.channel.close()
            raise
        self._request_id = 0

    def capabilities(self) -> PredictorCapabilities:
        return self._capabilities

    def predict(
        self, sample: PrefixSample, generated: Sequence[int] = (), m: int = 1
    ) -> list[PredictionDistribution]:
        ids = (list(sample.input_ids) + list(generated))[-len(sample.input_ids) :]
        pad_feature = [0.0] * len(FEATURE_NAMES)
        features = list(sample.input_time_features) + [pad_feature] * len(generated)
        features = features[-len(ids) :]
        self._request_id += 1
        return external_predict(
            self.channel,
            self._request_id,
            ids,
            features,
            m,
            self.vocab.size,
            self.timeout,
        )

    def close(self) -> None:
        self.channel.close()

    def __enter__(self) -> "ExternalPredictor":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

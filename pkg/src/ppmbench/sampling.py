"""Seeded next-token sampling: greedy, random, top-k, and nucleus strategies.

All randomness flows through counter-based Philox streams derived from a
master seed and a stream index, so draws are identical across runs,
platforms, and worker schedules. PAD is never sampleable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidDistributionError
from .preprocessing import PAD_ID

_MASK64 = 2**64 - 1

STRATEGIES = ("greedy", "random", "top_k", "top_p")


def derive_stream(master_seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for (seed, stream); disjoint across stream ids."""
    key = np.array([master_seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SamplerConfig:
    strategy: str = "greedy"
    temperature: float = 1.0
    k: int | None = None
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(
                f"unknown sampler strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        if self.temperature <= 0:
            raise ConfigurationError(f"temperature must be > 0, got {self.temperature}")
        if self.strategy == "top_k" and (self.k is None or self.k < 1):
            raise ConfigurationError("top_k sampling needs k >= 1")
        if self.strategy == "top_p" and (self.p is None or not 0 < self.p <= 1):
            raise ConfigurationError("top_p sampling needs p in (0, 1]")


@dataclass(frozen=True)
class PredictionDistribution:
    """Probability vector over the vocabulary plus optional time estimates."""

    probs: np.ndarray
    delta_days: float | None = None
    remaining_days: float | None = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1:
            raise InvalidDistributionError("probability vector must be 1-dimensional")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidDistributionError("probabilities must be finite and non-negative")
        if abs(float(probs.sum()) - 1.0) > 1e-6:
            raise InvalidDistributionError(f"probabilities sum to {probs.sum()}, expected 1")


def apply_temperature(probs: np.ndarray, temperature: float) -> np.ndarray:
    """Reweight a distribution as probs**(1/T), renormalized; T=1 is identity."""
    if temperature <= 0:
        raise ConfigurationError(f"temperature must be > 0, got {temperature}")
    probs = np.asarray(probs, dtype=np.float64)
    if temperature == 1.0:
        return probs.copy()
    # Work in log space; exact zeros stay zero.
    out = np.zeros_like(probs)
    positive = probs > 0
    logits = np.log(probs[positive]) / temperature
    logits -= logits.max()
    weights = np.exp(logits)
    out[positive] = weights / weights.sum()
    return out


def _descending_order(probs: np.ndarray) -> np.ndarray:
    # Stable sort on -probs keeps ties in ascending-id order.
    return np.argsort(-probs, kind="stable")


def _categorical(probs: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(probs)
    cumulative[-1] = 1.0
    return int(np.searchsorted(cumulative, rng.random(), side="right"))


def sample(
    dist: PredictionDistribution, config: SamplerConfig, rng: np.random.Generator
) -> int:
    """Draw one token id; greedy ignores the rng entirely."""
    probs = dist.probs.copy()
    probs[PAD_ID] = 0.0
    total = probs.sum()
    if total <= 0:
        raise InvalidDistributionError("all probability mass sits on PAD")
    probs /= total

    if config.strategy == "greedy":
        return int(np.argmax(probs))  # first maximum, i.e. lowest id wins ties

    probs = apply_temperature(probs, config.temperature)
    if config.strategy == "top_k":
        order = _descending_order(probs)
        kept = order[: config.k]
        filtered = np.zeros_like(probs)
        filtered[kept] = probs[kept]
        probs = filtered / filtered.sum()
    elif config.strategy == "top_p":
        order = _descending_order(probs)
        cumulative = np.cumsum(probs[order])
        cut = int(np.searchsorted(cumulative, config.p - 1e-12, side="left"))
        kept = order[: cut + 1]
        filtered = np.zeros_like(probs)
        filtered[kept] = probs[kept]
        probs = filtered / filtered.sum()
    return _categorical(probs, rng)


def nucleus_ids(dist: PredictionDistribution, p: float, temperature: float = 1.0) -> set[int]:
    """Ids inside the top-p nucleus after PAD masking (diagnostic helper)."""
    probs = dist.probs.copy()
    probs[PAD_ID] = 0.0
    probs /= probs.sum()
    probs = apply_temperature(probs, temperature)
    order = _descending_order(probs)
    cumulative = np.cumsum(probs[order])
    cut = int(np.searchsorted(cumulative, p - 1e-12, side="left"))
    return {int(i) for i in order[: cut + 1]}

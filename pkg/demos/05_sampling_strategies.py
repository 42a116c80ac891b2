"""Greedy, random, top-k and nucleus sampling with temperature.

All draws flow through counter-based streams derived from (seed, index), so
any run of this script prints identical numbers. Run from the repo root.
"""

from collections import Counter

import numpy as np

from ppmbench import PredictionDistribution, SamplerConfig, apply_temperature, derive_stream, sample

# id 0 is PAD and never sampleable; ids 1..5 carry the mass.
dist = PredictionDistribution(probs=np.array([0.0, 0.45, 0.25, 0.15, 0.10, 0.05]))

print("temperature reshapes the distribution:")
for t in (0.5, 1.0, 2.0):
    out = apply_temperature(dist.probs, t)
    print(f"  T={t:<4} {np.round(out, 3)}")


def tally(config: SamplerConfig, n: int = 5000) -> Counter:
    rng = derive_stream(config.seed)
    return Counter(sample(dist, config, rng) for _ in range(n))


print("\n5000 draws per strategy:")
for config in (
    SamplerConfig(strategy="greedy"),
    SamplerConfig(strategy="random", seed=1),
    SamplerConfig(strategy="random", temperature=2.0, seed=1),
    SamplerConfig(strategy="top_k", k=2, seed=1),
    SamplerConfig(strategy="top_p", p=0.8, seed=1),
):
    counts = tally(config)
    label = config.strategy
    if config.strategy == "top_k":
        label += f"(k={config.k})"
    if config.strategy == "top_p":
        label += f"(p={config.p})"
    if config.temperature != 1.0:
        label += f" T={config.temperature}"
    shares = {i: f"{counts.get(i, 0) / 5000:.3f}" for i in range(1, 6)}
    print(f"  {label:20s} {shares}")

# Greedy ignores the rng entirely; ties break to the lowest id.
tie = PredictionDistribution(probs=np.array([0.0, 0.5, 0.5]))
assert sample(tie, SamplerConfig(strategy="greedy"), derive_stream(99)) == 1
print("\ngreedy tie-break: lowest id wins")

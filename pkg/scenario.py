"""
Stress scenario generation for TiltStress

Scenarios are baseline atoms drawn (or reweighted) under a tilted law. The
draws come from SplitMix64 so that a (seed, law, n) triple reproduces the same
scenario set on any platform:

    state_k = seed + k * 0x9E3779B97F4A7C15              (mod 2^64, k = 1, 2, ...)
    z = (state_k ^ (state_k >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out_k = z ^ (z >> 31)
    u_k = (out_k >> 11) * 2^-53                          in [0, 1)
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd

from errors import InvalidParameter

logger = logging.getLogger("TiltStress.Scenario")


class SplitMix64:
    """Counter-based 64-bit generator; vectorized over the counter"""

    GAMMA = np.uint64(0x9E3779B97F4A7C15)
    MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
    MIX_2 = np.uint64(0x94D049BB133111EB)

    def __init__(self, seed=0):
        self.seed = int(seed)
        self.counter = 0

    def next_u64(self, n):
        k = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        # uint64 array arithmetic wraps mod 2^64
        z = k * self.GAMMA + np.uint64(self.seed % (1 << 64))
        z = (z ^ (z >> np.uint64(30))) * self.MIX_1
        z = (z ^ (z >> np.uint64(27))) * self.MIX_2
        return z ^ (z >> np.uint64(31))

    def uniform(self, n):
        return (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


class ScenarioMethod(Enum):
    RESAMPLE = "RESAMPLE"
    WEIGHTS = "WEIGHTS"


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    draws: np.ndarray
    seed: int
    source: object  # TiltParams
    method: ScenarioMethod
    weights: np.ndarray = None

    def to_frame(self):
        if self.method is ScenarioMethod.WEIGHTS:
            return pd.DataFrame({"value": self.draws, "weight": self.weights})
        return pd.DataFrame({"scenario": self.draws})

    def to_dict(self):
        out = {
            "method": self.method,
            "seed": self.seed,
            "source": self.source.to_dict(),
            "draws": self.draws.tolist(),
        }
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        return out


def importance_weights(t):
    """dQ/dP at every base atom: below_factor at or under a, above_factor over it"""
    return np.where(t.base.values <= t.params.a, t.below_factor, t.above_factor)


def weighted_scenarios(t):
    """The base atoms as scenarios, each carrying its importance weight"""
    return ScenarioSet(
        draws=t.base.values.copy(),
        seed=0,
        source=t.params,
        method=ScenarioMethod.WEIGHTS,
        weights=importance_weights(t),
    )


def sample(t, n, seed):
    """n inverse-CDF draws from the tilted law on a SplitMix64 stream"""
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    n = int(n)
    u = SplitMix64(seed).uniform(n)
    cum = np.cumsum(t.tilted_probs)
    cum[-1] = 1.0
    idx = np.minimum(np.searchsorted(cum, u, side="right"), t.base.size - 1)
    logger.debug(f"Drew {n} scenarios with seed {seed}")
    return ScenarioSet(
        draws=t.base.values[idx],
        seed=int(seed),
        source=t.params,
        method=ScenarioMethod.RESAMPLE,
    )


def empirical_frequencies(scenarios, base):
    """Share of draws landing on each base atom"""
    idx = np.searchsorted(base.values, scenarios.draws)
    counts = np.bincount(idx, minlength=base.size)
    return counts / scenarios.draws.size

"""
Exponential tilt of a baseline law for TiltStress

Q_{lambda,a} reweights P by exp(-I{x <= a} / lambda) / Z: mass at or below
the threshold a is scaled down by exp(-1/lambda), mass above it is kept, and
everything is renormalized by Z(lambda, a) = 1 - (1 - exp(-1/lambda)) F(a).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from config import Config
from dist import DiscreteDistribution
from errors import DepletionUnderflow, InvalidDistribution, InvalidParameter

logger = logging.getLogger("TiltStress.Tilt")


@dataclass(frozen=True)
class TiltParams:
    lam: float
    a: float

    def __post_init__(self):
        lam, a = float(self.lam), float(self.a)
        if not lam > 0:
            raise InvalidParameter(f"lambda must be positive, got {self.lam!r}")
        if not math.isfinite(a):
            raise InvalidParameter(f"a must be finite, got {self.a!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "a", a)

    @property
    def shrink(self):
        """exp(-1/lambda), the density ratio below vs above the threshold"""
        return math.exp(-1.0 / self.lam)

    @property
    def contrast(self):
        """C = 1 - exp(-1/lambda), computed without cancellation"""
        return -math.expm1(-1.0 / self.lam)

    def to_dict(self):
        return {"lambda": self.lam, "a": self.a}


@dataclass(frozen=True, eq=False)
class TiltedMeasure:
    base: DiscreteDistribution
    params: TiltParams
    z: float
    below_factor: float
    above_factor: float
    tilted_probs: np.ndarray

    def __post_init__(self):
        probs = np.ascontiguousarray(self.tilted_probs, dtype=np.float64)
        if probs.shape != self.base.probs.shape:
            raise InvalidDistribution("tilted_probs must match the base atoms")
        if np.any(probs < 0) or abs(math.fsum(probs) - 1.0) > Config.NORMALIZATION_TOL:
            raise InvalidDistribution("tilted_probs must be a probability vector")
        probs.setflags(write=False)
        object.__setattr__(self, "tilted_probs", probs)

    @property
    def values(self):
        return self.base.values

    def as_distribution(self):
        """The tilted law as a DiscreteDistribution (zero-mass atoms dropped)"""
        keep = self.tilted_probs > 0
        probs = self.tilted_probs[keep]
        return DiscreteDistribution(self.base.values[keep], probs / math.fsum(probs))

    def to_dict(self):
        return {
            "lambda": self.params.lam,
            "a": self.params.a,
            "z": self.z,
            "below_factor": self.below_factor,
            "above_factor": self.above_factor,
            "values": self.base.values.tolist(),
            "probs": self.tilted_probs.tolist(),
        }


def normalizer(d, params):
    """Z(lambda, a) = 1 - (1 - exp(-1/lambda)) F(a)"""
    F = d.cdf(params.a)
    return (1.0 - F) + params.shrink * F


def tilt(d, params):
    """Build Q_{lambda,a}; atoms are unchanged, only masses are reweighted"""
    F = d.cdf(params.a)
    q = params.shrink

    if F <= 0.0:
        return TiltedMeasure(d, params, 1.0, q, 1.0, d.probs.copy())
    if F >= 1.0:
        # every atom sits at or below a: the uniform rescale cancels out
        above = 1.0 / q if q > 0 else math.inf
        return TiltedMeasure(d, params, q, 1.0, above, d.probs.copy())
    if q == 0.0:
        raise DepletionUnderflow(
            f"exp(-1/lambda) underflows at lambda={params.lam!r}; "
            "use the depletion limit instead"
        )

    z = normalizer(d, params)
    below, above = q / z, 1.0 / z
    factors = np.where(d.values <= params.a, below, above)
    logger.debug(f"Tilted at a={params.a!r}, lambda={params.lam!r}: Z={z!r}")
    return TiltedMeasure(d, params, z, below, above, d.probs * factors)


def tilted_cdf_at_a(d, params):
    """G_{lambda,a}(a) = exp(-1/lambda) F(a) / Z(lambda, a)"""
    F = d.cdf(params.a)
    if F <= 0.0:
        return 0.0
    if F >= 1.0:
        return 1.0
    q = params.shrink
    return min(q * F / normalizer(d, params), F)


def kl_of_tilt(d, params):
    """D_KL(Q_{lambda,a} || P) = -log Z - G_{lambda,a}(a) / lambda, in nats"""
    F = d.cdf(params.a)
    if F <= 0.0 or F >= 1.0:
        return 0.0
    log_z = math.log1p(-params.contrast * F)
    g = tilted_cdf_at_a(d, params)
    return max(-log_z - g / params.lam, 0.0)

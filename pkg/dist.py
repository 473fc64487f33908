"""
Discrete baseline laws for TiltStress

A DiscreteDistribution is a finite set of strictly increasing atoms with
positive masses. CDFs are right-continuous: F(x) is the mass of atoms <= x.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from config import Config
from errors import InvalidDistribution
from utils import check_probability

logger = logging.getLogger("TiltStress.Dist")


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    values: np.ndarray
    probs: np.ndarray
    cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)

        if values.ndim != 1 or probs.ndim != 1 or values.shape != probs.shape:
            raise InvalidDistribution("values and probs must be 1-D arrays of equal length")
        if values.size == 0:
            raise InvalidDistribution("a distribution needs at least one atom")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(probs)):
            raise InvalidDistribution("values and probs must be finite")
        if not np.all(np.diff(values) > 0):
            raise InvalidDistribution("values must be strictly increasing")
        if np.any(probs <= 0) or np.any(probs > 1):
            raise InvalidDistribution("every prob must lie in (0, 1]")
        total = math.fsum(probs)
        if abs(total - 1.0) > Config.NORMALIZATION_TOL:
            raise InvalidDistribution(f"probs sum to {total!r}, expected 1")

        cum = np.minimum(np.cumsum(probs), 1.0)
        cum[-1] = 1.0
        values.setflags(write=False)
        probs.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cum", cum)

    @classmethod
    def from_samples(cls, values, weights=None):
        """Build a law from samples, merging duplicate values"""
        x = np.asarray(values, dtype=np.float64).ravel()
        if x.size == 0:
            raise InvalidDistribution("no values given")
        if not np.all(np.isfinite(x)):
            raise InvalidDistribution("values must be finite")

        if weights is None:
            w = np.ones_like(x)
        else:
            w = np.asarray(weights, dtype=np.float64).ravel()
            if w.shape != x.shape:
                raise InvalidDistribution("weights must match values in length")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise InvalidDistribution("weights must be finite and nonnegative")
            if not w.sum() > 0:
                raise InvalidDistribution("weights must have a positive sum")

        atoms, inverse = np.unique(x, return_inverse=True)
        mass = np.bincount(inverse.ravel(), weights=w, minlength=atoms.size)
        keep = mass > 0
        atoms, mass = atoms[keep], mass[keep]
        probs = mass / math.fsum(mass)
        if atoms.size < x.size:
            logger.debug(f"Merged {x.size} samples into {atoms.size} atoms")
        return cls(atoms, probs)

    @classmethod
    def from_dict(cls, data):
        """Build from the {"values": [...], "probs": [...]} form"""
        try:
            values, probs = data["values"], data["probs"]
        except (KeyError, TypeError) as e:
            raise InvalidDistribution(f"expected keys 'values' and 'probs': {e}") from e
        try:
            values = np.asarray(values, dtype=np.float64)
            probs = np.asarray(probs, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise InvalidDistribution(f"values and probs must be lists of numbers: {e}") from e
        if values.ndim != 1 or probs.ndim != 1:
            raise InvalidDistribution("values and probs must be flat lists")
        if values.shape != probs.shape:
            raise InvalidDistribution("values and probs must have equal length")
        # explicit atom lists may still carry ties or unnormalized masses
        return cls.from_samples(values, probs)

    def to_dict(self):
        return {"values": self.values.tolist(), "probs": self.probs.tolist()}

    @property
    def size(self):
        return int(self.values.size)

    def cdf(self, x):
        """F(x) = mass of atoms <= x; accepts a scalar or an array"""
        idx = np.searchsorted(self.values, x, side="right")
        padded = np.concatenate(([0.0], self.cum))
        out = padded[idx]
        return float(out) if np.ndim(out) == 0 else out

    def quantile(self, p):
        """Smallest atom v with F(v) >= p, for p in (0, 1]"""
        p = check_probability(p, "p")
        idx = int(np.searchsorted(self.cum, p, side="left"))
        return float(self.values[min(idx, self.size - 1)])

    def mean(self):
        return float(np.dot(self.values, self.probs))


def from_samples(values, weights=None):
    return DiscreteDistribution.from_samples(values, weights)


def cdf(d, x):
    return d.cdf(x)


def quantile(d, p):
    return d.quantile(p)


def sup_diff(p, q):
    """
    max_a [F(a) - G(a)] over the union of both supports.

    F - G is a right-continuous step function that only moves at atoms, and it
    is 0 below both supports and at the largest atom, so the union of atoms
    covers every value it takes and the maximum is never negative. Returns
    (threshold, value) with the smallest maximizing atom as threshold.
    """
    grid = np.union1d(p.values, q.values)
    diff = np.asarray(p.cdf(grid)) - np.asarray(q.cdf(grid))
    best = int(np.argmax(diff))
    return float(grid[best]), float(min(max(diff[best], 0.0), 1.0))

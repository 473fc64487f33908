"""
First-order stochastic dominance checks for TiltStress
"""

import logging

import numpy as np

from config import Config
from errors import MismatchedSupport

logger = logging.getLogger("TiltStress.Dominance")


def tilted_cdf(t, x):
    """
    CDF of a tilted measure, piecewise in the threshold a:

        G(x) = below * F(x)                          x <= a
        G(x) = below * F(a) + above * (F(x) - F(a))  x >  a
    """
    F = np.asarray(t.base.cdf(x), dtype=np.float64)
    Fa = t.base.cdf(t.params.a)
    below = t.below_factor * F
    with np.errstate(invalid="ignore"):
        gained = np.where(F > Fa, t.above_factor * (F - Fa), 0.0)
    above = t.below_factor * Fa + gained
    out = np.where(np.asarray(x) <= t.params.a, below, np.minimum(above, 1.0))
    return float(out) if out.ndim == 0 else out


def cdf_gap(base, probs):
    """F - G at every base atom, for any mass vector G lives on"""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != base.probs.shape:
        raise MismatchedSupport("masses must be given on the base atoms")
    G = np.cumsum(probs)
    G[-1] = min(G[-1], 1.0)
    return base.cum - G


def check_fsd(base, t):
    """
    Does the tilted law first-order dominate the base, i.e. F >= G everywhere?

    Both CDFs only move at atoms, so checking the atoms is exact. Returns
    (ok, max_violation) with max_violation = max(0, max_x G(x) - F(x)).
    """
    if base.size != t.base.size or not np.array_equal(base.values, t.base.values):
        raise MismatchedSupport("tilted measure is not built on the base atoms")
    gaps = cdf_gap(base, t.tilted_probs)
    worst = float(gaps.min())
    ok = worst >= -Config.FSD_TOL
    if not ok:
        logger.debug(f"FSD violated by {-worst!r}")
    return ok, max(0.0, -worst)

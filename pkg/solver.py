"""
Dual optimization layer for TiltStress

For a threshold a and multiplier lambda the tilted law gives the dual
objective phi_lambda(a) = F(a) - G_{lambda,a}(a). Everything here is built on
two monotone maps:

  lambda -> KL(Q_{lambda,a} || P)      strictly decreasing (radius calibration)
  lambda -> max_a phi_lambda(a)        nonincreasing (boundary / level search)

so every calibration is a bracketed one-dimensional root find.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import pandas as pd
from scipy import optimize

from config import Config
from dominance import cdf_gap, check_fsd
from errors import (
    BracketFailure,
    DepletionUnderflow,
    FlatThreshold,
    InvalidParameter,
    NoBoundary,
    NonPositiveEps,
    TargetUnreachable,
)
from tilt import TiltParams, kl_of_tilt, tilt, tilted_cdf_at_a

logger = logging.getLogger("TiltStress.Solver")


class LambdaMarker(Enum):
    DEPLETION = "DEPLETION"


DEPLETION = LambdaMarker.DEPLETION


@dataclass(frozen=True)
class StressReport:
    a_star: float
    lam: object  # float, math.inf (no tilt) or DEPLETION
    value: float
    g_at_a: float
    kl: float
    exceeds_half: bool
    fsd_ok: bool
    fsd_max_violation: float

    @property
    def is_depletion(self):
        return self.lam is DEPLETION

    def to_dict(self):
        return {
            "a_star": self.a_star,
            "lambda": self.lam,
            "value": self.value,
            "g_at_a": self.g_at_a,
            "kl": self.kl,
            "exceeds_half": self.exceeds_half,
            "fsd_ok": self.fsd_ok,
            "fsd_max_violation": self.fsd_max_violation,
        }


@dataclass(frozen=True)
class SweepRow:
    lam: float
    a_star: float
    phi_star: float
    kl: float

    def to_dict(self):
        return {"lambda": self.lam, "a_star": self.a_star, "phi_star": self.phi_star, "kl": self.kl}


def _contrast(lam):
    if not lam > 0:
        raise InvalidParameter(f"lambda must be positive, got {lam!r}")
    return -math.expm1(-1.0 / lam)


def h(x, lam):
    """h(x) = C x (1 - x) / (1 - C x) with C = 1 - exp(-1/lambda)"""
    if not 0.0 <= x <= 1.0:
        raise InvalidParameter(f"x must lie in [0, 1], got {x!r}")
    C = _contrast(lam)
    if x == 0.0 or x == 1.0:
        return 0.0
    return C * x * (1.0 - x) / (1.0 - C * x)


def _h_vec(x, C):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = C * x * (1.0 - x) / (1.0 - C * x)
    return np.where((x <= 0.0) | (x >= 1.0), 0.0, out)


def x_star(lam):
    """Interior maximizer (1 + exp(-1/(2 lambda)))^-1 of h, inside (1/2, 1)"""
    _contrast(lam)
    return 1.0 / (1.0 + math.exp(-0.5 / lam))


def phi(d, lam, a):
    """phi_lambda(a) = F(a) - G_{lambda,a}(a) in closed form"""
    return h(d.cdf(a), lam)


def maximize_phi(d, lam):
    """Best atom for a fixed lambda; the smallest atom wins ties"""
    values = _h_vec(d.cum, _contrast(lam))
    best = int(np.argmax(values))
    return float(d.values[best]), float(values[best])


def phi_limit(d):
    """lambda -> 0+ limit of max_a phi_lambda(a): the largest F(a) below 1"""
    return float(d.cum[-2]) if d.size > 1 else 0.0


def depletion_cap(F):
    """Largest KL reachable by tilting at a threshold with CDF value F"""
    return -math.log1p(-F)


def depletion_probs(d, a):
    """Masses of the conditional law P(. | X > a)"""
    F = d.cdf(a)
    if F >= 1.0:
        raise FlatThreshold(f"no mass above a={a!r}")
    probs = np.where(d.values > a, d.probs, 0.0)
    return probs / math.fsum(probs)


def _bracket_root(f, lo, hi, what):
    """Expand [lo, hi] geometrically until f(lo) >= 0 >= f(hi) (f decreasing)"""
    lo_limit, hi_limit = Config.LAMBDA_BRACKET_LIMIT
    growth = Config.BRACKET_GROWTH
    f_lo, f_hi = f(lo), f(hi)
    while f_lo < 0 and lo > lo_limit:
        lo = max(lo / growth, lo_limit)
        f_lo = f(lo)
    while f_hi > 0 and hi < hi_limit:
        hi = min(hi * growth, hi_limit)
        f_hi = f(hi)
    if f_lo < 0 or f_hi > 0:
        raise BracketFailure(f"{what}: no sign change on [{lo!r}, {hi!r}]")
    logger.debug(f"{what}: bracket [{lo!r}, {hi!r}]")
    return lo, f_lo, hi, f_hi


def _brentq(f, lo, hi, what, xtol=Config.ROOT_XTOL):
    root, result = optimize.brentq(
        f, lo, hi,
        xtol=xtol, rtol=Config.ROOT_RTOL,
        maxiter=Config.MAX_ITERATIONS, full_output=True, disp=False,
    )
    if not result.converged:
        logger.warning(f"{what}: stopped after {result.iterations} iterations")
    else:
        logger.debug(f"{what}: converged in {result.iterations} iterations")
    return root


def _find_root(f, lo, hi, what):
    lo, f_lo, hi, f_hi = _bracket_root(f, lo, hi, what)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    return _brentq(f, lo, hi, what)


def solve_lambda(d, a, eps):
    """
    Unique lambda(a) with KL(Q_{lambda,a} || P) = eps.

    Any eps > 0 below the cap has one; tiny radii give very large lambda.

    Returns DEPLETION when eps reaches -log(1 - F(a)), the supremum of the KL
    a tilt at a can spend; the optimizer is then P(. | X > a).
    """
    if not eps > 0:
        raise NonPositiveEps(f"eps must be positive, got {eps!r}")
    F = d.cdf(a)
    if F <= 0.0 or F >= 1.0:
        raise FlatThreshold(f"F(a)={F!r} at a={a!r}: tilting has no effect")

    cap = depletion_cap(F)
    if eps >= cap:
        logger.debug(f"eps={eps!r} >= cap {cap!r} at a={a!r}: depletion")
        return DEPLETION

    # searched in the rate s = 1/lambda: KL is 0 at s = 0 and rises to the cap
    def gap(s):
        if s == 0.0:
            return -eps
        return kl_of_tilt(d, TiltParams(1.0 / s, a)) - eps

    what = f"lambda(a={a!r}, eps={eps!r})"
    hi = 1.0 / Config.LAMBDA_BRACKET[0]
    hi_limit = 1.0 / Config.LAMBDA_BRACKET_LIMIT[0]
    f_hi = gap(hi)
    while f_hi < 0 and hi < hi_limit:
        hi = min(hi * Config.BRACKET_GROWTH, hi_limit)
        f_hi = gap(hi)
    if f_hi < 0:
        raise BracketFailure(f"{what}: KL stays below eps up to lambda={1.0 / hi!r}")
    if f_hi == 0:
        return 1.0 / hi
    s = _brentq(gap, 0.0, hi, what, xtol=Config.RATE_XTOL)
    return math.inf if s == 0.0 else float(1.0 / s)


def _fsd_of(d, a, lam):
    if lam is DEPLETION:
        gaps = cdf_gap(d, depletion_probs(d, a))
        return bool(gaps.min() >= -Config.FSD_TOL), float(max(0.0, -gaps.min()))
    if math.isinf(lam):
        return True, 0.0
    try:
        return check_fsd(d, tilt(d, TiltParams(lam, a)))
    except DepletionUnderflow:
        return _fsd_of(d, a, DEPLETION)


def _report(d, a, lam, g, kl):
    value = d.cdf(a) - g
    fsd_ok, violation = _fsd_of(d, a, lam)
    return StressReport(
        a_star=float(a),
        lam=lam,
        value=float(value),
        g_at_a=float(g),
        kl=float(kl),
        exceeds_half=bool(value > 0.5),
        fsd_ok=fsd_ok,
        fsd_max_violation=violation,
    )


def _untilted_report(d):
    a = float(d.values[0])
    return _report(d, a, math.inf, d.cdf(a), 0.0)


def value_eps(d, eps):
    """
    V_eps = max_a max_{Q in KL ball} [F(a) - G(a)].

    Scans every atom with 0 < F(a) < 1: the candidate is F(a) under
    depletion, otherwise phi at (lambda(a), a). Ties go to the smallest a.
    """
    if eps is None or not eps >= 0 or math.isinf(eps):
        raise NonPositiveEps(f"eps must be finite and nonnegative, got {eps!r}")
    if eps == 0:
        return _untilted_report(d)

    best = None
    for a, F in zip(d.values[:-1], d.cum[:-1]):
        lam = solve_lambda(d, a, eps)
        if lam is DEPLETION:
            g, kl = 0.0, depletion_cap(F)
        else:
            params = TiltParams(lam, a)
            g, kl = tilted_cdf_at_a(d, params), kl_of_tilt(d, params)
        value = F - g
        if best is None or value > best[0]:
            best = (value, a, lam, g, kl)

    if best is None:
        return _untilted_report(d)
    _, a, lam, g, kl = best
    logger.debug(f"V_eps at eps={eps!r}: a*={a!r}, value={best[0]!r}")
    return _report(d, a, lam, g, kl)


def stress_report(d, lam):
    """Report for a fixed multiplier: the maximizing atom and its tilt"""
    a, _ = maximize_phi(d, lam)
    params = TiltParams(lam, a)
    return _report(d, a, lam, tilted_cdf_at_a(d, params), kl_of_tilt(d, params))


def lambda_at_level(d, level, bracket=None):
    """
    lambda at which max_a phi_lambda(a) crosses `level`.

    max_a phi_lambda(a) is nonincreasing in lambda, so the level is exceeded
    exactly for lambda below the returned value.
    """
    if not 0.0 < level < 1.0:
        raise InvalidParameter(f"level must lie in (0, 1), got {level!r}")
    limit = phi_limit(d)
    if limit <= level:
        raise NoBoundary(
            f"max phi tends to {limit!r} as lambda -> 0 and never exceeds {level!r}"
        )

    lo, hi = bracket if bracket is not None else Config.LAMBDA_BRACKET
    if not 0 < lo < hi:
        raise InvalidParameter(f"bracket must satisfy 0 < lo < hi, got {(lo, hi)!r}")

    def excess(lam):
        return maximize_phi(d, lam)[1] - level

    root = float(_find_root(excess, lo, hi, f"lambda at level {level!r}"))
    miss = abs(excess(root))
    if miss > Config.BOUNDARY_TOL:
        logger.warning(f"Level crossing off by {miss!r} at lambda={root!r}")
    return root


def lambda_boundary(d, bracket=None):
    """lambda at which max_a phi_lambda(a) crosses 1/2"""
    return lambda_at_level(d, 0.5, bracket)


def eps_crit(d, p_dagger, tol=Config.DEFAULT_EPS_TOL):
    """Smallest KL radius (within tol) whose robust value reaches p_dagger"""
    if p_dagger is None or not 0.5 <= p_dagger < 1.0:
        raise InvalidParameter(f"target must lie in [1/2, 1), got {p_dagger!r}")
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol!r}")

    ceiling = phi_limit(d)
    if p_dagger > ceiling:
        raise TargetUnreachable(
            f"target {p_dagger!r} exceeds the largest reachable value {ceiling!r}"
        )

    def shortfall(eps):
        return value_eps(d, eps).value - p_dagger

    hi = depletion_cap(ceiling)
    if shortfall(hi) == 0:
        return hi
    return float(optimize.bisect(shortfall, 0.0, hi, xtol=tol, maxiter=Config.MAX_ITERATIONS))


def severity_sweep(d, lambdas):
    """One row per lambda: (a*, phi*, KL at a*)"""
    lambdas = [float(lam) for lam in lambdas]
    if any(not lam > 0 for lam in lambdas):
        raise InvalidParameter("lambdas must be positive")
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise InvalidParameter("lambdas must be strictly increasing")

    rows = []
    for lam in lambdas:
        a, phi_star = maximize_phi(d, lam)
        rows.append(SweepRow(lam, a, phi_star, kl_of_tilt(d, TiltParams(lam, a))))
    return rows


def sweep_frame(rows):
    return pd.DataFrame(
        [[r.lam, r.a_star, r.phi_star, r.kl] for r in rows],
        columns=["lambda", "a_star", "phi_star", "kl"],
    )

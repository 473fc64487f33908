import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LN2, LN3, distributions, interior_thresholds, uniform
from dist import DiscreteDistribution
from errors import (
    FlatThreshold,
    InfeasibleProblem,
    InvalidParameter,
    NoBoundary,
    NonPositiveEps,
    TargetUnreachable,
)
from oracle import brute_force_V, grid_argmax_h, grid_level_crossing, min_kl_for_target
from solver import (
    DEPLETION,
    eps_crit,
    h,
    lambda_at_level,
    lambda_boundary,
    maximize_phi,
    phi,
    phi_limit,
    severity_sweep,
    solve_lambda,
    stress_report,
    sweep_frame,
    value_eps,
    x_star,
)
from tilt import TiltParams, kl_of_tilt, tilted_cdf_at_a

HALF = 1.0 / LN2  # exp(-1/lambda) = 0.5
QUARTER = 1.0 / (2 * LN2)  # exp(-1/lambda) = 0.25, C = 0.75
KL_HALF = -math.log(0.75) - LN2 / 3


class TestPhi:
    def test_half_half(self, uniform01):
        assert phi(uniform01, HALF, 0.0) == pytest.approx(1 / 6, abs=1e-12)
        assert phi(uniform01, HALF, 0.0) == pytest.approx(0.5 - 1 / 3, abs=1e-12)

    def test_vanishes_without_mass_below(self, uniform01):
        assert phi(uniform01, HALF, -1.0) == 0.0

    def test_vanishes_with_all_mass_below(self, uniform01):
        assert phi(uniform01, HALF, 1.0) == 0.0

    @given(interior_thresholds(), st.floats(0.01, 100.0))
    def test_dual_identity(self, case, lam):
        d, a = case
        gap = d.cdf(a) - tilted_cdf_at_a(d, TiltParams(lam, a))
        assert abs(phi(d, lam, a) - gap) <= 1e-12
        assert 0.0 <= phi(d, lam, a) < 1.0


class TestH:
    def test_closed_form(self):
        assert h(2 / 3, QUARTER) == pytest.approx(1 / 3, abs=1e-12)

    @pytest.mark.parametrize("x", [0.0, 1.0])
    def test_endpoints(self, x):
        assert h(x, QUARTER) == 0.0

    def test_rejects_x_outside_unit_interval(self):
        with pytest.raises(InvalidParameter):
            h(1.5, QUARTER)

    @given(distributions(), st.floats(0.01, 100.0), st.floats(-25, 25))
    def test_h_of_cdf_is_phi(self, d, lam, a):
        assert h(d.cdf(a), lam) == phi(d, lam, a)


class TestXStar:
    def test_two_thirds(self):
        assert x_star(1 / (2 * LN2)) == pytest.approx(2 / 3, abs=1e-12)

    def test_three_quarters(self):
        assert x_star(1 / (2 * LN3)) == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("lam", [0.2, 0.4551, 0.7213, 2.0])
    def test_grid_search_agrees(self, lam):
        assert abs(grid_argmax_h(lam, 1e-4) - x_star(lam)) <= 2e-4

    @given(st.floats(0.05, 1e4))
    def test_strictly_inside(self, lam):
        assert 0.5 < x_star(lam) < 1.0


class TestMaximizePhi:
    def test_uniform_three_points(self):
        a, value = maximize_phi(uniform(1, 2, 3), QUARTER)
        assert a == 2.0
        assert value == pytest.approx(1 / 3, abs=1e-12)

    def test_single_atom(self):
        assert maximize_phi(uniform(7), 1.0)[1] == 0.0

    def test_strong_tilt_approaches_half(self, uniform01):
        a, value = maximize_phi(uniform01, 0.01)
        assert a == 0.0
        assert value == pytest.approx(0.5, abs=1e-9)

    @given(distributions(), st.floats(0.01, 100.0))
    def test_dominates_every_atom(self, d, lam):
        a, best = maximize_phi(d, lam)
        assert best == phi(d, lam, a)
        for v in d.values:
            assert best >= phi(d, lam, v)


class TestSolveLambda:
    def test_recovers_lambda(self, uniform01):
        lam = solve_lambda(uniform01, 0.0, 0.0566328)
        assert lam == pytest.approx(1.442695, abs=1e-5)

    def test_exact_round_trip(self, uniform01):
        lam = solve_lambda(uniform01, 0.0, KL_HALF)
        assert lam == pytest.approx(HALF, abs=1e-8)

    def test_depletion_past_the_cap(self, uniform01):
        assert solve_lambda(uniform01, 0.0, 0.7) is DEPLETION

    def test_depletion_at_the_cap(self, uniform01):
        assert solve_lambda(uniform01, 0.0, -math.log1p(-0.5)) is DEPLETION

    @pytest.mark.parametrize("a", [-1.0, 1.0, 5.0])
    def test_flat_threshold(self, uniform01, a):
        with pytest.raises(FlatThreshold):
            solve_lambda(uniform01, a, 0.1)

    @pytest.mark.parametrize("eps", [0.0, -0.1])
    def test_non_positive_eps(self, uniform01, eps):
        with pytest.raises(NonPositiveEps):
            solve_lambda(uniform01, 0.0, eps)

    @pytest.mark.parametrize("eps", [1e-13, 1e-15, 1e-16])
    def test_tiny_radius_gives_large_lambda(self, uniform01, eps):
        lam = solve_lambda(uniform01, 0.0, eps)
        assert lam > 1e5
        assert kl_of_tilt(uniform01, TiltParams(lam, 0.0)) == pytest.approx(eps, rel=1e-4)

    @given(interior_thresholds(), st.floats(0.1, 50.0))
    def test_round_trip(self, case, lam0):
        d, a = case
        eps = kl_of_tilt(d, TiltParams(lam0, a))
        lam = solve_lambda(d, a, eps)
        assert lam is not DEPLETION
        assert abs(kl_of_tilt(d, TiltParams(lam, a)) - eps) <= 1e-10


class TestValueEps:
    def test_log_two_reaches_half(self, uniform01):
        report = value_eps(uniform01, LN2)
        assert report.value == pytest.approx(0.5, abs=1e-9)
        assert report.a_star == 0.0

    def test_depletion_reaches_half(self, uniform01):
        report = value_eps(uniform01, 0.7)
        assert report.value == pytest.approx(0.5, abs=1e-12)
        assert report.a_star == 0.0
        assert report.is_depletion
        assert report.g_at_a == 0.0
        assert report.kl == pytest.approx(LN2, abs=1e-12)
        assert not report.exceeds_half
        assert report.fsd_ok

    def test_interior_tilt(self, uniform01):
        report = value_eps(uniform01, 0.0566328)
        assert report.value == pytest.approx(1 / 6, abs=1e-6)
        assert report.lam == pytest.approx(1.4427, abs=1e-4)
        assert report.kl <= 0.0566328 + 1e-9
        assert report.fsd_ok and report.fsd_max_violation == 0.0

    def test_zero_radius(self, uniform1234):
        report = value_eps(uniform1234, 0.0)
        assert report.value == 0.0
        assert report.kl == 0.0

    def test_single_atom(self):
        assert value_eps(uniform(3), 0.5).value == 0.0

    def test_rejects_negative_radius(self, uniform01):
        with pytest.raises(NonPositiveEps):
            value_eps(uniform01, -1.0)

    @pytest.mark.parametrize("eps", [1e-15, 1e-16])
    def test_tiny_radius(self, eps):
        for d in (uniform(0, 1), uniform(0, 1, 2)):
            report = value_eps(d, eps)
            assert 0.0 <= report.value < 1e-6
            assert report.kl == pytest.approx(eps, rel=1e-4)
            assert report.lam > 1e6
            assert report.fsd_ok

    def test_monotone_down_to_tiny_radii(self):
        d = uniform(0, 1, 2)
        values = [value_eps(d, eps).value for eps in (0.0, 1e-16, 1e-15, 1e-13, 1e-9, 0.1)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
        assert values[1] > 0.0

    def test_report_schema(self, uniform01):
        out = value_eps(uniform01, 0.1).to_dict()
        assert list(out) == [
            "a_star", "lambda", "value", "g_at_a", "kl",
            "exceeds_half", "fsd_ok", "fsd_max_violation",
        ]

    def test_exceeds_half_flag(self):
        d = uniform(0, 1, 2, 3)
        report = value_eps(d, 1.0)
        assert report.value > 0.5
        assert report.exceeds_half

    @settings(max_examples=30)
    @given(distributions(max_atoms=5), st.floats(0.001, 2.0), st.floats(0.001, 2.0))
    def test_monotone_in_radius(self, d, e1, e2):
        lo, hi = sorted((e1, e2))
        assert value_eps(d, lo).value <= value_eps(d, hi).value + 1e-12

    @settings(max_examples=30)
    @given(distributions(max_atoms=5), st.floats(0.001, 2.0))
    def test_report_invariants(self, d, eps):
        report = value_eps(d, eps)
        assert report.kl <= eps + 1e-9
        assert abs(report.value - (d.cdf(report.a_star) - report.g_at_a)) <= 1e-12
        assert report.exceeds_half == (report.value > 0.5)
        assert report.fsd_ok

    def test_matches_grid_search(self, rng):
        for _ in range(20):
            values = rng.choice(np.arange(-10, 11), size=3, replace=False)
            d = DiscreteDistribution.from_samples(values, rng.dirichlet([2.0, 2.0, 2.0]))
            for eps in (0.05, 0.2, 0.5):
                dual = value_eps(d, eps).value
                grid = brute_force_V(d, eps, 0.005)
                assert abs(dual - grid) <= 0.01
                assert grid <= dual + 1e-9


class TestStressReport:
    def test_fixed_lambda(self):
        report = stress_report(uniform(1, 2, 3), QUARTER)
        assert report.a_star == 2.0
        assert report.value == pytest.approx(1 / 3, abs=1e-12)
        assert report.fsd_ok


class TestLambdaBoundary:
    def test_continuous_uniform_discretization(self):
        d = DiscreteDistribution.from_samples(np.arange(10_000) / 10_000)
        lam = lambda_boundary(d)
        assert lam == pytest.approx(0.4551, abs=1e-2)
        assert abs(maximize_phi(d, lam)[1] - 0.5) <= 1e-8
        assert maximize_phi(d, lam * 0.99)[1] > 0.5

    def test_agrees_with_grid_bisection(self):
        d = DiscreteDistribution.from_samples(np.arange(10_000) / 10_000)
        oracle = grid_level_crossing(np.arange(1, 10_000) / 10_000, 0.5)
        assert lambda_boundary(d) == pytest.approx(oracle, abs=1e-3)
        assert oracle == pytest.approx(1 / (2 * LN3), abs=1e-2)

    def test_two_points_never_cross(self, uniform01):
        with pytest.raises(NoBoundary):
            lambda_boundary(uniform01)

    def test_single_atom(self):
        with pytest.raises(NoBoundary):
            lambda_boundary(uniform(1))

    def test_no_boundary_is_infeasible(self, uniform01):
        with pytest.raises(InfeasibleProblem):
            lambda_boundary(uniform01)

    def test_bracket_is_expanded(self):
        d = uniform(*range(10))
        lam = lambda_boundary(d, bracket=(50.0, 100.0))
        assert abs(maximize_phi(d, lam)[1] - 0.5) <= 1e-8

    def test_other_levels(self):
        d = uniform(*range(20))
        low, high = lambda_at_level(d, 0.6), lambda_at_level(d, 0.4)
        assert low < high
        assert abs(maximize_phi(d, low)[1] - 0.6) <= 1e-8

    def test_phi_limit(self, uniform1234):
        assert phi_limit(uniform1234) == 0.75
        assert phi_limit(uniform(1)) == 0.0


class TestEpsCrit:
    def test_four_point_uniform(self):
        d = uniform(0, 1, 2, 3)
        eps = eps_crit(d, 0.5, 1e-6)
        assert eps == pytest.approx(0.5 * LN3, abs=5e-3)
        assert eps == pytest.approx(min_kl_for_target(d, 0.5), abs=1e-5)

    def test_unreachable(self, uniform01):
        with pytest.raises(TargetUnreachable):
            eps_crit(uniform01, 0.75, 1e-6)

    @pytest.mark.parametrize("target", [1e-9, 0.3, 1.0])
    def test_rejects_target_outside_range(self, uniform1234, target):
        with pytest.raises(InvalidParameter):
            eps_crit(uniform1234, target, 1e-6)

    def test_value_reaches_target(self):
        d = uniform(*range(8))
        eps = eps_crit(d, 0.6, 1e-8)
        assert value_eps(d, eps + 1e-6).value >= 0.6 - 1e-9
        assert value_eps(d, max(eps - 1e-4, 1e-9)).value < 0.6


class TestSeveritySweep:
    def test_single_row(self):
        rows = severity_sweep(uniform(1, 2, 3), [QUARTER])
        assert len(rows) == 1
        assert rows[0].a_star == 2.0
        assert rows[0].phi_star == pytest.approx(1 / 3, abs=1e-12)

    @given(distributions())
    def test_phi_star_nonincreasing(self, d):
        rows = severity_sweep(d, [0.5, 1.0, 2.0])
        phis = [r.phi_star for r in rows]
        assert all(b <= a for a, b in zip(phis, phis[1:]))

    def test_empty(self, uniform01):
        assert severity_sweep(uniform01, []) == []

    @pytest.mark.parametrize("lambdas", [[1.0, 1.0], [2.0, 1.0], [-1.0, 1.0]])
    def test_rejects_bad_grid(self, uniform01, lambdas):
        with pytest.raises(InvalidParameter):
            severity_sweep(uniform01, lambdas)

    def test_frame(self):
        frame = sweep_frame(severity_sweep(uniform(1, 2, 3), [0.5, 1.0]))
        assert list(frame.columns) == ["lambda", "a_star", "phi_star", "kl"]
        assert len(frame) == 2

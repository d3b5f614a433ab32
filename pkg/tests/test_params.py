import dataclasses
import math

import pytest

from escapesim import precision as pm
from escapesim.errors import DomainError, PrecisionError, SolverError
from escapesim.geometry import Point2
from escapesim.params import (
    ParameterSet,
    StartConfiguration,
    certify,
    certify_cascade,
    delta_level,
    derive_cascade,
    eps_level,
    solve_phi,
    solve_sigma,
)

from oracle_cascade import rederive


class TestEpsLevel:
    def test_direct_formula(self):
        assert eps_level(1.0, 1) == 0.5
        assert eps_level(0.5, 2) == 0.375

    def test_strictly_increasing_toward_eps(self):
        vals = [eps_level(0.5, n) for n in range(1, 40)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(v < 0.5 for v in vals)
        assert vals[-1] == pytest.approx(0.5, rel=1e-9)

    def test_bad_level(self):
        with pytest.raises(DomainError):
            eps_level(0.5, 0)


class TestDeltaLevel:
    def test_both_terms_tie(self):
        assert delta_level([1.0], 2) == 0.25

    def test_small_safety_binds(self):
        assert delta_level([1.0, 0.01], 3) == 0.0025

    def test_power_cap_binds(self):
        assert delta_level([8.0], 2) == 0.25

    def test_empty_list_rejected(self):
        with pytest.raises(DomainError):
            delta_level([], 2)

    def test_nonpositive_safety_rejected(self):
        with pytest.raises(DomainError):
            delta_level([1.0, -0.5], 3)


class TestSolvePhi:
    def test_worked_example(self):
        phi = solve_phi(4.0, 1.0, math.pi / 3)
        assert phi == pytest.approx(0.599366, abs=5e-6)
        # closed-form check: rho*sin(phi - theta) = -2r*sin(theta)
        assert 2 * math.sin(phi - math.pi / 3) == pytest.approx(-math.sqrt(3) / 4 * 2, rel=1e-10)

    def test_residual_within_tolerance(self):
        phi = solve_phi(4.0, 1.0, math.pi / 3)
        val = 4.0 * math.sin(phi) / (4.0 * math.cos(phi) - 2.0)
        assert abs(val - math.tan(math.pi / 3)) / math.tan(math.pi / 3) <= 1e-12

    def test_small_theta_gives_small_phi(self):
        prev = None
        for theta in (1e-2, 1e-4, 1e-6):
            phi = solve_phi(4.0, 1.0, theta)
            assert 0 < phi < 10 * theta
            if prev is not None:
                assert phi < prev
            prev = phi

    def test_infeasible_theta_raises(self):
        # tan(theta) < 0 has no solution on the admissible window
        with pytest.raises(SolverError):
            solve_phi(4.0, 1.0, math.atan2(math.sin(math.pi / 2), math.cos(math.pi / 2) * 4 - 2))

    def test_rho_not_above_2r_raises(self):
        with pytest.raises(SolverError):
            solve_phi(2.0, 1.0, 0.5)


class TestSolveSigma:
    def test_worked_example(self):
        phi = solve_phi(4.0, 1.0, math.pi / 3)
        sigma = solve_sigma(1.0, 4.0, 0.5, phi)
        # 0.99 x the constraint-boundary supremum (~0.179)
        assert sigma == pytest.approx(0.99 * 0.179, rel=0.02)

    def test_hard_cap_respected(self):
        for eps_n, phi in ((0.1, 0.3), (0.5, 0.6), (0.9, 1.2)):
            sigma = solve_sigma(1.0, 2 / eps_n, eps_n, phi)
            assert sigma < 1.0 / (3 + eps_n)

    def test_resubstitution_satisfied_with_slack(self):
        phi = solve_phi(4.0, 1.0, math.pi / 3)
        sigma = solve_sigma(1.0, 4.0, 0.5, phi)
        lhs = 2 * math.asin(2.5 * sigma / (2 * (1 - sigma))) + sigma / 4.0
        assert lhs <= phi


class TestDeriveCascade:
    def test_level1_base_case(self, worked_start):
        lvl1 = derive_cascade(worked_start, 1)[0]
        assert lvl1.eps_n == 0.25
        assert lvl1.sigma_n == 1.0
        assert lvl1.c_n == 1.0
        assert lvl1.ell is None and lvl1.p is None and lvl1.r is None
        assert lvl1.delta_n is None

    def test_level2_bookkeeping(self, worked_start):
        lvl2 = derive_cascade(worked_start, 2)[1]
        assert lvl2.delta_n == 0.25
        assert lvl2.ell == 1.25
        assert lvl2.p == 10

    def test_matches_independent_rederivation(self, worked_start):
        # level 3 underflows the float64 guard, so the deep cascade runs extended
        cascade = derive_cascade(worked_start, 3, mode=pm.EXTENDED)
        oracle = rederive(0.5, (0.0, 0.0), [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)], 3)
        for ps, want in zip(cascade, oracle):
            for key, got in ps.to_json_dict().items():
                if got is None:
                    assert key not in want
                    continue
                expect = want[key]
                if key in ("level", "p"):
                    assert got == int(expect)
                else:
                    assert got == pytest.approx(float(expect), rel=1e-10), key

    def test_monotone_shrinkage(self, worked_start):
        cascade = derive_cascade(worked_start, 3, mode=pm.EXTENDED)
        assert cascade[1].sigma_n < cascade[0].sigma_n
        assert cascade[1].c_n < cascade[0].c_n
        assert cascade[2].delta_n < cascade[1].delta_n

    def test_deterministic_bit_identical(self, worked_start):
        a = derive_cascade(worked_start, 2)
        b = derive_cascade(worked_start, 2)
        for x, y in zip(a, b):
            assert x == y

    def test_precision_guard_trips_at_level3_standard(self, worked_start):
        # sigma_3 ~ 1.16e-10 < 1e6 ulp(1.0) ~ 2.22e-10
        with pytest.raises(PrecisionError) as exc:
            derive_cascade(worked_start, 3)
        assert exc.value.level == 3

    def test_extended_mode_reaches_level3(self, worked_start):
        cascade = derive_cascade(worked_start, 3, mode=pm.EXTENDED)
        assert len(cascade) == 3
        assert pm.to_float(cascade[2].sigma_n) == pytest.approx(1.16e-10, rel=0.05)

    def test_delta_override(self, worked_start):
        cascade = derive_cascade(worked_start, 2, delta_override=[0.125])
        assert cascade[1].delta_n == 0.125
        assert cascade[1].p == 20
        with pytest.raises(DomainError):
            derive_cascade(worked_start, 2, delta_override=[-1.0])

    def test_needs_enough_lions(self, worked_start):
        with pytest.raises(DomainError):
            derive_cascade(worked_start, 4)


class TestCertify:
    def test_derived_cascade_passes(self, worked_start):
        cascade = derive_cascade(worked_start, 2)
        for v in certify_cascade(cascade, worked_start):
            assert v.passed, v.details
            assert v.measured_margin >= -1e-12

    def test_doubled_sigma_fails_window_constraint(self, worked_start):
        lvl1, lvl2 = derive_cascade(worked_start, 2)
        bad = dataclasses.replace(lvl2, sigma_n=2 * lvl2.sigma_n)
        v = certify(bad, lvl1, worked_start)
        assert not v.passed
        assert "sigma window constraint" in v.details or "sigma < r/(3+eps)" in v.details

    def test_negated_safety_fails(self, worked_start):
        lvl1, lvl2 = derive_cascade(worked_start, 2)
        bad = dataclasses.replace(lvl2, c_n=-lvl2.c_n)
        v = certify(bad, lvl1, worked_start)
        assert not v.passed
        assert v.first_violation_time == 0.0


class TestStartConfiguration:
    def test_lion_on_man_rejected(self):
        with pytest.raises(DomainError):
            StartConfiguration(Point2(1.0, 2.0), (Point2(1.0, 2.0),), 0.5)

    def test_eps_range_enforced(self):
        with pytest.raises(DomainError):
            StartConfiguration(Point2(0, 0), (Point2(1, 0),), 1.5)
        with pytest.raises(DomainError):
            StartConfiguration(Point2(0, 0), (Point2(1, 0),), 0.0)

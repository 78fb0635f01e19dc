import numpy as np
import pytest

from ergm_phase import BracketError, DegenerateError, DomainError, ModelParams, Regime, critical_point
from ergm_phase.curve import (
    CurvePoint,
    NEAR_CRITICAL,
    classify_point,
    curve_residuals,
    feasible_start,
    limit_slope_at_critical,
    q_prime,
    solve_q,
    trace_curve,
)
from ergm_phase.model import DEFAULT_CURVE_TOL


@pytest.fixture(scope="module")
def trace_p3():
    return trace_curve(3, -1.0, -3.0, 0.05)


class TestClassifyPoint:
    @pytest.mark.parametrize("b1,b2,regime", [(0, 0, Regime.OFF_CURVE), (-2.5, 2.5, Regime.ON_CURVE),
                                              (-2, 2, Regime.CRITICAL)])
    def test_examples(self, b1, b2, regime):
        assert classify_point(ModelParams(b1, b2)).regime is regime

    def test_tolerance_widens_critical_set(self):
        prm = ModelParams(-2 + 1e-6, 2)
        assert classify_point(prm).regime is not Regime.CRITICAL
        assert classify_point(prm, curve_tol=1e-5).regime is Regime.CRITICAL


class TestSolveQ:
    @pytest.mark.parametrize("b1", [-2.5, -4.0, -2.0005, -9.0])
    def test_p2_line(self, b1):
        pt = solve_q(b1, 2)
        assert pt.beta2 == pytest.approx(-b1, abs=1e-8)
        assert pt.q_prime == pytest.approx(-1, abs=1e-10)

    def test_p3_example(self):
        pt = solve_q(-1.2, 3)
        assert pt.residual < 1e-10
        assert -1 < pt.q_prime < -0.75

    @pytest.mark.parametrize("b1,p", [(-2.5, 2), (-1.2, 3), (-3.0, 3), (-1.5, 4), (-3.5, 5)])
    def test_invariants(self, b1, p):
        pt = solve_q(b1, p)
        b1c, b2c = critical_point(p)
        c = (p - 1) / p
        assert pt.beta1 < b1c and pt.beta2 > b2c
        assert pt.x1_star < c < pt.x2_star
        assert pt.q_prime < 0
        assert max(curve_residuals(pt)) < 1e-9
        assert classify_point(pt.params).regime is Regime.ON_CURVE

    def test_guess_does_not_change_answer(self):
        a = solve_q(-1.7, 3)
        b = solve_q(-1.7, 3, guess=a.beta2 + 0.3)
        assert b.beta2 == pytest.approx(a.beta2, abs=1e-9)

    @pytest.mark.parametrize("b1", [-2.0, -1.99995, 0.0])
    def test_refuses_near_critical(self, b1):
        with pytest.raises(BracketError):
            solve_q(b1, 2)

    @pytest.mark.parametrize("b1,p", [(-2.3, 2), (-1.4, 3), (-2.6, 3)])
    def test_perturbation_flips_side(self, b1, p):
        pt = solve_q(b1, p)
        c = (p - 1) / p
        shift = 10 * DEFAULT_CURVE_TOL
        below = classify_point(ModelParams(b1, pt.beta2 - shift, p))
        above = classify_point(ModelParams(b1, pt.beta2 + shift, p))
        assert below.regime is Regime.OFF_CURVE and above.regime is Regime.OFF_CURVE
        assert below.x_star < c < above.x_star


class TestQPrime:
    def test_p2(self):
        pt = solve_q(-2.5, 2)
        assert q_prime(pt) == pytest.approx(-1 / (pt.x1_star + pt.x2_star), rel=1e-14)
        assert q_prime(pt) == pytest.approx(-1, abs=1e-10)

    def test_degenerate(self):
        pt = CurvePoint(-2, 2, 2, 0.5, 0.5 + 1e-10, 0.0, 0.0)
        with pytest.raises(DegenerateError):
            q_prime(pt)

    def test_limit_near_critical(self):
        b1c, _ = critical_point(3)
        pt = solve_q(b1c - 2e-4, 3)
        assert pt.q_prime == pytest.approx(limit_slope_at_critical(3), abs=5e-3)
        assert limit_slope_at_critical(3) == -0.75


class TestTraceCurve:
    def test_p2_line(self):
        pts = trace_curve(2, -2.2, -5.0, 0.1)
        assert len(pts) == 29
        assert max(abs(pt.beta1 + pt.beta2) for pt in pts) < 1e-8

    def test_p3_slope_bounds(self, trace_p3):
        qp = np.array([pt.q_prime for pt in trace_p3])
        assert np.all((qp > -1) & (qp < -0.75))

    def test_p3_convexity(self, trace_p3):
        qp = np.array([pt.q_prime for pt in trace_p3])
        # points come by decreasing beta1, so q' must be non-increasing along the list
        assert np.all(np.diff(qp) <= 0)

    def test_p3_central_differences(self, trace_p3):
        b1 = np.array([pt.beta1 for pt in trace_p3])
        q = np.array([pt.beta2 for pt in trace_p3])
        qp = np.array([pt.q_prime for pt in trace_p3])
        fd = (q[:-2] - q[2:]) / (b1[:-2] - b1[2:])
        np.testing.assert_allclose(fd, qp[1:-1], atol=1e-4)

    def test_maximizer_drift(self, trace_p3):
        x1 = np.array([pt.x1_star for pt in trace_p3])
        x2 = np.array([pt.x2_star for pt in trace_p3])
        # beta1 decreases along the list: x1* decreases and x2* increases
        assert np.all(np.diff(x1) < 0)
        assert np.all(np.diff(x2) > 0)

    def test_single_point(self):
        assert len(trace_curve(2, -3.0, -3.0, 0.1)) == 1

    def test_argument_checks(self):
        with pytest.raises(DomainError):
            trace_curve(2, -3, -4, 0.0)
        with pytest.raises(DomainError):
            trace_curve(2, -4, -3, 0.1)
        with pytest.raises(DomainError):
            trace_curve(2, -2.0 + NEAR_CRITICAL / 2, -3, 0.1)


class TestFeasibleStart:
    def test_already_feasible(self):
        assert feasible_start(2, -2.5, 0.1) == -2.5

    def test_grid_aligned(self):
        start = feasible_start(2, -1.0, 0.1)
        assert start == pytest.approx(-2.1)
        assert start < -2 - NEAR_CRITICAL

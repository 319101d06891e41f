import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parapuzzle import dynamics
from parapuzzle.errors import (
    DegenerateFixedPoint,
    InvalidInput,
    LandedOnAlpha,
    NoConvergence,
    WrongPeriod,
)

# independent oracles: the nonzero period-3 centers solve c^3+2c^2+c+1 = 0,
# and the tip parameter solves c^3+2c^2+2c+2 = 0 (both derived by eliminating
# the radical from the defining equations)
PERIOD3_CENTER = float(np.real(
    [r for r in np.roots([1, 2, 1, 1]) if abs(r.imag) < 1e-12][0]))
TIP_D = float(np.real(
    [r for r in np.roots([1, 2, 2, 2]) if abs(r.imag) < 1e-12][0]))


class TestFixedPoints:
    @pytest.mark.parametrize("c,alpha,beta", [
        (0.0, 0.0, 1.0),
        (-2.0, -1.0, 2.0),
        (-1.0, (1 - math.sqrt(5)) / 2, (1 + math.sqrt(5)) / 2),
    ])
    def test_closed_forms(self, c, alpha, beta):
        pair = dynamics.fixed_points(c)
        assert pair.alpha == pytest.approx(alpha, abs=1e-12)
        assert pair.beta == pytest.approx(beta, abs=1e-12)
        assert pair.alpha_multiplier == pytest.approx(2 * alpha, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateFixedPoint):
            dynamics.fixed_points(0.25)

    def test_out_of_bound_parameter(self):
        with pytest.raises(InvalidInput):
            dynamics.fixed_points(9.0)

    @given(st.complex_numbers(max_magnitude=2.0, allow_nan=False,
                              allow_infinity=False))
    @settings(max_examples=200, deadline=None)
    def test_fixed_point_identities(self, c):
        if abs(1 - 4 * c) < 1e-6:
            return
        pair = dynamics.fixed_points(c)
        for z in (pair.alpha, pair.beta):
            assert abs(z * z + c - z) < 1e-10
        aprime = dynamics.cofixed_point(c)
        assert abs(aprime * aprime + c - pair.alpha) < 1e-10

    def test_cofixed_values(self):
        assert dynamics.cofixed_point(-2.0) == pytest.approx(1.0)
        assert dynamics.cofixed_point(-1.0) == pytest.approx((math.sqrt(5) - 1) / 2)
        # degenerate coincidence at c = 0: the co-fixed point equals alpha
        assert dynamics.cofixed_point(0.0) == dynamics.fixed_points(0.0).alpha == 0.0


class TestCriticalOrbit:
    def test_zero(self):
        orbit = dynamics.critical_orbit(0.0, 5)
        assert np.allclose(orbit.points, 0.0)
        assert orbit.escaped_at is None
        assert len(orbit) == 6

    def test_chebyshev(self):
        orbit = dynamics.critical_orbit(-2.0, 4)
        assert np.allclose(orbit.points, [0, -2, 2, 2, 2])
        assert orbit.escaped_at is None

    def test_escape_index(self):
        orbit = dynamics.critical_orbit(1.0, 10, escape_radius=4.0)
        assert orbit.escaped_at == 3          # 0, 1, 2, 5
        assert len(orbit) == 4
        assert orbit.points[3] == pytest.approx(5.0)

    def test_bit_determinism(self):
        a = dynamics.critical_orbit(-1.7548, 200)
        b = dynamics.critical_orbit(-1.7548, 200)
        assert np.array_equal(a.points, b.points)

    def test_input_validation(self):
        with pytest.raises(InvalidInput):
            dynamics.critical_orbit(0.0, 0)
        with pytest.raises(InvalidInput):
            dynamics.critical_orbit(0.0, 5, escape_radius=1.0)


class TestSolveCenter:
    def test_period_1_and_2(self):
        assert abs(dynamics.solve_center(1, 0.1)) < 1e-13
        assert dynamics.solve_center(2, -0.9) == pytest.approx(-1.0, abs=1e-12)

    def test_period_3_against_polynomial_roots(self):
        c = dynamics.solve_center(3, -1.8)
        assert c.real == pytest.approx(PERIOD3_CENTER, abs=1e-12)
        z = 0j
        for _ in range(3):
            z = z * z + c
        assert abs(z) < 1e-12

    def test_rerun_stability(self):
        c = dynamics.solve_center(3, -1.8)
        c2 = dynamics.solve_center(3, c)
        assert abs(c2 - c) < 1e-13

    def test_wrong_period(self):
        with pytest.raises(WrongPeriod):
            dynamics.solve_center(4, -1.0001)

    def test_no_convergence(self):
        with pytest.raises(NoConvergence):
            dynamics.solve_center(3, 7.9)


class TestSolveMisiurewicz:
    def test_tip_value_against_cubic(self):
        mu = dynamics.solve_misiurewicz(2, 1, 1, -1.5)
        assert mu.real == pytest.approx(TIP_D, abs=1e-12)
        assert abs(mu.imag) < 1e-13
        pair = dynamics.fixed_points(mu)
        z = 0j
        for _ in range(3):
            z = z * z + mu
        # the defining identity, one iterate later: f^3(0) = alpha
        assert abs(z - pair.alpha) < 1e-12

    def test_outside_wake_seed(self):
        with pytest.raises((NoConvergence, LandedOnAlpha)):
            dynamics.solve_misiurewicz(2, 1, 1, 0.2)

    def test_limb_third(self):
        mu = dynamics.solve_misiurewicz(3, 1, 1, -0.2 + 0.8j)
        pair = dynamics.fixed_points(mu)
        z = 0j
        for _ in range(3):
            z = z * z + mu
        assert abs(z + pair.alpha) < 1e-12
        assert mu.imag > 0.3  # genuinely in the upper limb

    def test_input_validation(self):
        with pytest.raises(InvalidInput):
            dynamics.solve_misiurewicz(2, 2, 1, -1.5)
        with pytest.raises(InvalidInput):
            dynamics.solve_misiurewicz(4, 2, 1, -1.5)


def test_real_centers_catalog():
    centers = dynamics.real_centers_up_to(8)
    assert any(abs(c - PERIOD3_CENTER) < 1e-10 for c in centers)
    assert any(abs(c + 1.0) < 1e-10 for c in centers)
    assert all(-2.0 <= c <= -0.74 for c in centers)
    # each center annihilates the critical point at some period <= 8
    for c in centers:
        z = 0.0
        ok = False
        for _ in range(8):
            z = z * z + c
            if abs(z) < 1e-9:
                ok = True
                break
        assert ok

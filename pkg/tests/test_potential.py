import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parapuzzle import potential
from parapuzzle.errors import InvalidInput
from parapuzzle.potential import Angle


class TestAngle:
    def test_reduction_and_parse(self):
        assert Angle(2, 6) == Angle(1, 3)
        assert Angle.parse("5/12").turns() == pytest.approx(5 / 12)
        assert Angle(7, 3) == Angle(1, 3)  # wrapped mod 1

    def test_doubling(self):
        assert Angle(1, 3).double() == Angle(2, 3)
        assert Angle(2, 3).double() == Angle(1, 3)
        assert Angle(1, 7).doubled(3) == Angle(1, 7)

    def test_halves(self):
        h = Angle(1, 3).halves()
        assert set(h) == {Angle(1, 6), Angle(5, 6)}
        for a in h:
            assert a.double() == Angle(1, 3)

    def test_period(self):
        assert Angle(1, 3).period_under_doubling() == 2
        assert Angle(1, 7).period_under_doubling() == 3
        assert Angle(1, 6).period_under_doubling() is None  # strictly preperiodic

    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=1, max_value=10_000))
    @settings(max_examples=300, deadline=None)
    def test_doubling_is_exact(self, num, den):
        a = Angle(num, den)
        assert 0 <= a.num < a.den
        assert math.gcd(a.num, a.den) == 1
        d = a.double()
        assert (2 * a.num) % a.den * d.den == d.num * a.den


class TestGreen:
    def test_identity_map_values(self):
        val = potential.green_dynamical(0.0, 2.0)
        assert val.g == pytest.approx(math.log(2), rel=1e-12)
        assert val.level == pytest.approx(2.0, rel=1e-12)
        assert potential.green_dynamical(0.0, 0.5).g == 0.0

    @pytest.mark.parametrize("z,expected", [
        (3.0, math.log((3 + math.sqrt(5)) / 2)),
        (2.5, math.log(2.0)),
    ])
    def test_chebyshev_conjugacy(self, z, expected):
        # for c = -2, z = w + 1/w conjugates to w^2, so G = log|w|
        val = potential.green_dynamical(-2.0, z)
        assert val.g == pytest.approx(expected, rel=1e-10)

    def test_parameter_values(self):
        assert potential.green_parameter(-3.0).g > 0
        assert potential.green_parameter(-1.0).g == 0.0
        assert potential.green_parameter(0.26).g > 0
        # definitionally the dynamical Green of the critical value
        a = potential.green_parameter(-3.0).g
        b = potential.green_dynamical(-3.0, -3.0).g
        assert a == b

    @given(st.complex_numbers(max_magnitude=1.5, allow_nan=False,
                              allow_infinity=False),
           st.floats(min_value=2.2, max_value=6.0))
    @settings(max_examples=60, deadline=None)
    def test_functional_equation(self, c, r):
        z = r + 0.3j
        g1 = potential.green_dynamical(c, z)
        g2 = potential.green_dynamical(c, z * z + c)
        if g1.escaped and g1.g > 1e-6:
            assert g2.g == pytest.approx(2 * g1.g, rel=1e-8)


class TestTraceRay:
    def test_identity_plane_straight_ray(self):
        tr = potential.trace_ray("dynamical", Angle(0, 1), math.log(4.0), 0.0, c=0.0)
        pts = np.asarray(tr.points)
        assert np.all(np.abs(pts.imag) < 1e-9)
        assert np.all(np.diff(np.abs(pts)) < 0)
        assert tr.landed
        assert abs(tr.landing_point - 1.0) < 1e-9

    def test_identity_ray_half(self):
        tr = potential.trace_ray("dynamical", Angle(1, 2), math.log(4.0), 0.0, c=0.0)
        assert tr.landed and abs(tr.landing_point + 1.0) < 1e-9

    def test_chebyshev_rays(self):
        tr = potential.trace_ray("dynamical", Angle(1, 2), math.log(4.0), 0.0, c=-2.0)
        assert tr.landed and abs(tr.landing_point + 2.0) < 1e-6
        tr0 = potential.trace_ray("dynamical", Angle(0, 1), math.log(4.0), 0.0, c=-2.0)
        assert tr0.landed and abs(tr0.landing_point - 2.0) < 1e-6

    def test_parameter_ray_half_lands_at_minus_two(self):
        tr = potential.trace_ray("parameter", Angle(1, 2), math.log(4.0), 0.0)
        assert tr.landed
        assert abs(tr.landing_point + 2.0) < 1e-6

    def test_parameter_ray_zero_stays_real_monotone(self):
        tr = potential.trace_ray("parameter", Angle(0, 1), math.log(4.0), 1e-6)
        pts = np.asarray(tr.points)
        assert np.all(np.abs(pts.imag) < 1e-9)
        assert np.all(pts.real > 0.25)
        assert np.all(np.diff(pts.real) < 0)

    def test_potentials_strictly_decreasing(self):
        tr = potential.trace_ray("dynamical", Angle(1, 3), math.log(4.0), 1e-3,
                                 c=-1.8 + 0.02j)
        assert np.all(np.diff(tr.potentials) < 0)

    def test_ray_potential_consistency(self):
        c = -1.77 + 0.05j
        tr = potential.trace_ray("dynamical", Angle(1, 3), math.log(4.0), 1e-3, c=c)
        for g, z in list(zip(tr.potentials, tr.points))[::7]:
            assert abs(potential.green_dynamical(c, z).g - g) < 1e-6

    def test_doubling_covariance(self):
        c = -0.4 + 0.35j
        for g in (0.9, 0.3, 0.05):
            z = potential.point_on_ray("dynamical", Angle(1, 5), g, c=c)
            w = potential.point_on_ray("dynamical", Angle(2, 5), 2 * g, c=c)
            assert abs((z * z + c) - w) < 1e-6

    def test_input_validation(self):
        with pytest.raises(InvalidInput):
            potential.trace_ray("dynamical", Angle(0, 1), 0.1, 0.2, c=0.0)
        with pytest.raises(InvalidInput):
            potential.trace_ray("nowhere", Angle(0, 1), 1.0, 0.0)
        with pytest.raises(InvalidInput):
            potential.trace_ray("dynamical", Angle(0, 1), 1.0, 0.0)  # missing c


def test_equipotential_loop_closed_and_consistent():
    loop = potential.equipotential_loop("parameter", math.log(4.0), 64)
    assert loop[0] == loop[-1]
    for z in loop[::16]:
        assert potential.green_parameter(complex(z)).g == pytest.approx(
            math.log(4.0), abs=1e-6)

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abfringe.constants import CONSTANTS
from abfringe.core import (DegeneratePathWarning, Event, QuadratureError, TimedPath,
                           curve_integral, fd_curl, fd_time_derivative, line_integral,
                           polygon_area, simpson_rule, split_at_radius, surface_flux)
from abfringe.fields import Solenoid, Waveform, magnetic_field, vector_potential

from oracles import riemann_flux_uniform_inside


def const_field(v):
    v = np.asarray(v, float)
    return lambda x, t: np.broadcast_to(v, np.shape(x)).copy()


def solenoid_A(R=1.0, B=1.0):
    s = Solenoid(R, Waveform.static(B))
    return s, (lambda x, t: vector_potential(s, x, t))


def test_constants_consistent():
    assert CONSTANTS.planck_h == pytest.approx(2 * math.pi * CONSTANTS.hbar, rel=1e-12)
    assert CONSTANTS.hbar == pytest.approx(1.0546e-27, rel=1e-4)
    assert CONSTANTS.c == pytest.approx(2.998e10, rel=1e-4)
    assert CONSTANTS.e == pytest.approx(4.803e-10, rel=1e-4)
    assert CONSTANTS.m_e == pytest.approx(9.109e-28, rel=1e-4)


def test_simpson_weights_integrate_cubic_exactly():
    u, w = simpson_rule(3)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert (w * u ** 3).sum() == pytest.approx(0.25, abs=1e-15)


class TestTimedPath:
    def test_needs_two_events(self):
        with pytest.raises(ValueError):
            TimedPath([Event((0, 0, 0), 0.0)])

    def test_times_must_not_decrease(self):
        with pytest.raises(ValueError):
            TimedPath.from_arrays([[0, 0, 0], [1, 0, 0]], [1.0, 0.0])

    def test_closed_path_must_close(self):
        with pytest.raises(ValueError):
            TimedPath.from_arrays([[0, 0, 0], [1, 0, 0]], [0.0, 1.0], closed=True)
        # times may differ at the closing point
        TimedPath.from_arrays([[0, 0, 0], [1, 0, 0], [0, 0, 0]], [0.0, 1.0, 2.0], closed=True)

    def test_non_finite_event_rejected(self):
        with pytest.raises(ValueError):
            Event((0, math.nan, 0), 0.0)


class TestLineIntegral:
    def test_constant_field_straight_segment(self):
        path = TimedPath.from_arrays([[0, 0, 0], [2, 0, 0]], [0.0, 1.0])
        assert line_integral(const_field([1, 0, 0]), path) == pytest.approx(2.0, abs=1e-14)

    def test_solenoid_loop_encloses_flux(self):
        # polygon outside the solenoid: A_out is a pure gradient there, so the
        # polygon integral equals the enclosed flux pi R^2 B exactly
        _, A = solenoid_A(1.0, 1.0)
        ang = np.linspace(0, 2 * np.pi, 65)
        pts = np.column_stack([2 * np.cos(ang), 2 * np.sin(ang), np.zeros_like(ang)])
        pts[-1] = pts[0]
        path = TimedPath.from_arrays(pts, 0.0, closed=True)
        assert line_integral(A, path) == pytest.approx(math.pi, rel=1e-12)

    def test_zero_length_path_is_zero_and_flagged(self):
        path = TimedPath.from_arrays([[1, 1, 1], [1, 1, 1]], [0.0, 1.0])
        with pytest.warns(DegeneratePathWarning):
            assert line_integral(const_field([3, 4, 5]), path) == 0.0

    def test_nan_sampler_raises(self):
        path = TimedPath.from_arrays([[0, 0, 0], [1, 0, 0]], [0.0, 1.0])
        with pytest.raises(QuadratureError):
            line_integral(lambda x, t: np.full(np.shape(x), np.nan), path)

    def test_time_is_interpolated(self):
        # F = (t, 0, 0) along x from 0 to 1 while t runs 0 -> 2: integral = 1
        path = TimedPath.from_arrays([[0, 0, 0], [1, 0, 0]], [0.0, 2.0])
        F = lambda x, t: np.stack([t, 0 * t, 0 * t], axis=-1)
        assert line_integral(F, path) == pytest.approx(1.0, abs=1e-14)

    def test_simpson_convergence_order(self):
        # square loop hugging the solenoid: integrand smooth but far from polynomial
        _, A = solenoid_A(1.0, 1.0)
        sq = np.array([[1.2, -1.2, 0], [1.2, 1.2, 0], [-1.2, 1.2, 0], [-1.2, -1.2, 0],
                       [1.2, -1.2, 0]])
        path = TimedPath.from_arrays(sq, 0.0, closed=True)
        errs = [abs(line_integral(A, path, n_sub=n) - math.pi) for n in (1, 2, 4, 8)]
        for coarse, fine in zip(errs, errs[1:]):
            if fine > 1e-12:
                assert coarse / fine >= 4.0

    def test_wall_split_inserts_crossings(self):
        path = TimedPath.from_arrays([[-2, 0.3, 0], [2, 0.3, 0]], [0.0, 1.0])
        split = split_at_radius(path, 1.0)
        rho = np.hypot(split.positions[:, 0], split.positions[:, 1])
        assert len(split.events) == 4
        assert np.allclose(rho[1:3], 1.0, atol=1e-14)
        assert np.all(np.diff(split.times) >= 0)

    def test_wall_split_makes_chord_through_solenoid_exact(self):
        # A . dx for a chord crossing the solenoid: compare against a very fine
        # brute-force midpoint sum
        s, A = solenoid_A(1.0, 2.0)
        a, b = np.array([-3.0, 0.4, 0.0]), np.array([2.5, 0.7, 0.0])
        path = TimedPath.from_arrays([a, b], [0.0, 0.0])
        n = 400_000
        u = (np.arange(n) + 0.5) / n
        pts = a + u[:, None] * (b - a)
        brute = float(np.sum(A(pts, 0.0) @ (b - a)) / n)
        assert line_integral(A, path, wall_radius=1.0) == pytest.approx(brute, rel=1e-8)


class TestSurfaceFlux:
    def test_uniform_field(self):
        got = surface_flux(const_field([0, 0, 3.0]), (1, 2, 3), (0, 0, 1), 0.7, 0.0)
        assert got == pytest.approx(math.pi * 0.49 * 3.0, rel=1e-13)

    def test_solenoid_flux_confined(self):
        s = Solenoid(1.0, Waveform.static(1.0))
        B = lambda x, t: magnetic_field(s, x, t)
        got = surface_flux(B, (0, 0, 0), (0, 0, 1), 2.0, 0.0, r_breaks=(1.0,))
        assert got == pytest.approx(math.pi, rel=1e-12)
        oracle = riemann_flux_uniform_inside(1.0, 1.0, 2.0)
        assert got == pytest.approx(oracle, rel=1e-5)

    def test_orthogonal_normal(self):
        got = surface_flux(const_field([0, 0, 3.0]), (0, 0, 0), (1, 0, 0), 1.0, 0.0)
        assert abs(got) < 1e-14

    def test_normal_is_normalized(self):
        a = surface_flux(const_field([0, 0, 1.0]), (0, 0, 0), (0, 0, 5), 1.0, 0.0)
        assert a == pytest.approx(math.pi, rel=1e-13)

    def test_zero_radius(self):
        assert surface_flux(const_field([0, 0, 1.0]), (0, 0, 0), (0, 0, 1), 0.0, 0.0) == 0.0


class TestFiniteDifferences:
    def test_curl_inside_solenoid(self):
        s, A = solenoid_A(1.0, 2.0)
        h = 1e-4
        curl = fd_curl(A, (0.5, 0.0, 0.0), 0.0, h)
        assert np.allclose(curl, [0, 0, 2.0], atol=1e-8)

    def test_curl_outside_solenoid(self):
        s, A = solenoid_A(1.0, 2.0)
        curl = fd_curl(A, (0.0, 2.0, 0.3), 0.0, 1e-4)
        assert np.allclose(curl, 0.0, atol=1e-8)

    def test_static_time_derivative(self):
        s, A = solenoid_A(1.0, 2.0)
        assert np.allclose(fd_time_derivative(A, (1.5, 0.2, 0.0), 3.0, 1e-3), 0.0)

    def test_curl_of_gradient_vanishes(self):
        grad = lambda x, t: np.stack([2 * x[..., 0] * x[..., 1], x[..., 0] ** 2 + np.cos(x[..., 2]),
                                      -x[..., 1] * np.sin(x[..., 2])], axis=-1)
        # gradient of x^2 y + y cos z
        curl = fd_curl(grad, (0.3, -0.7, 1.1), 0.0, 1e-4)
        assert np.allclose(curl, 0.0, atol=1e-8)

    def test_curl_error_is_second_order(self):
        A = lambda x, t: np.stack([-np.sin(x[..., 1]), np.sin(x[..., 0]), 0 * x[..., 0]], axis=-1)
        p = np.array([0.4, 0.9, 0.0])
        exact = np.cos(p[0]) + np.cos(p[1])
        e1 = abs(fd_curl(A, p, 0.0, 1e-2)[2] - exact)
        e2 = abs(fd_curl(A, p, 0.0, 5e-3)[2] - exact)
        assert e1 / e2 == pytest.approx(4.0, rel=0.01)

    def test_batched_points(self):
        s, A = solenoid_A(1.0, 2.0)
        pts = np.array([[0.5, 0, 0], [0, 2.0, 0]])
        curl = fd_curl(A, pts, 0.0, 1e-4)
        assert curl.shape == (2, 3)
        assert np.allclose(curl, [[0, 0, 2.0], [0, 0, 0]], atol=1e-8)


def test_stokes_on_smooth_field():
    # A = (-y^3, x^3, 0): curl_z = 3(x^2 + y^2); oint over circle radius a = 3 pi a^4 / 2
    A = lambda x, t: np.stack([-x[..., 1] ** 3, x[..., 0] ** 3, 0 * x[..., 0]], axis=-1)
    a = 0.8

    def circle(u):
        ang = 2 * np.pi * u
        x = a * np.stack([np.cos(ang), np.sin(ang), 0 * ang], axis=-1)
        dx = 2 * np.pi * a * np.stack([-np.sin(ang), np.cos(ang), 0 * ang], axis=-1)
        return x, np.zeros_like(u), dx

    line = curve_integral(A, circle, 64)
    flux = surface_flux(lambda x, t: fd_curl(A, x, t, 1e-5), (0, 0, 0), (0, 0, 1), a, 0.0)
    assert line == pytest.approx(1.5 * np.pi * a ** 4, rel=1e-12)
    assert flux == pytest.approx(line, rel=1e-8)


def test_polygon_area_square():
    assert polygon_area([[0, 0], [1, 0], [1, 1], [0, 1]]) == pytest.approx(1.0)


vecs = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3).map(np.array)


@settings(max_examples=50, deadline=None)
@given(vecs, vecs)
def test_cross_product_anticommutes(a, b):
    assert np.allclose(np.cross(a, b), -np.cross(b, a))
    assert np.linalg.norm(a) >= 0

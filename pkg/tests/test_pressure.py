"""Pressure curves, transition detection, classifier, skew products."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import thermofractal as tf
from thermofractal.errors import BudgetError, DomainError
from thermofractal.pressure import (detect_transition,
                                    left_slope_at_transition,
                                    periodic_orbit_pressure, pressure_at,
                                    pressure_curve, skew_pressure)


def test_doubling_affine(doubling_curve):
    exact = (1.0 - doubling_curve.t_grid) * math.log(2)
    assert np.max(np.abs(doubling_curve.P_values - exact)) < 1e-8


def test_pwl_closed_form(pwl_curve):
    t = pwl_curve.t_grid
    exact = np.log(3.0 ** -t + 1.5 ** -t)
    assert np.max(np.abs(pwl_curve.P_values - exact)) < 1e-8
    assert np.all(pwl_curve.sigma2 > 0)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.1, 0.9), min_size=2, max_size=4))
def test_pwl_pressure_matches_closed_form_random(weights):
    w = np.asarray(weights) + 0.05
    w = w / w.sum()
    spec = tf.make_piecewise_linear(1.0 / w)
    for t in (-0.7, 0.0, 0.8):
        exact = math.log(float(np.sum(w ** t)))
        assert pressure_at(spec, t, 64).value == pytest.approx(exact, abs=1e-8)


def test_expanding_maps_have_no_transition(doubling_curve, pwl_curve):
    assert doubling_curve.t0_estimate is None
    assert pwl_curve.t0_estimate is None


def test_mp_transition_frozen(mp_curve):
    assert mp_curve.plateau == 0.0
    assert mp_curve.t0_estimate == pytest.approx(0.9675, abs=5e-3)
    # pressure sits on the plateau past the transition
    past = mp_curve.t_grid >= 1.0
    assert np.max(np.abs(mp_curve.P_values[past])) < 0.05
    assert mp_curve.check_invariants() == []


def test_pressure_interp_and_clamp(mp_curve):
    assert mp_curve.pressure_clamped(1.7) == 0.0
    assert mp_curve.pressure_clamped(5.0) == 0.0   # beyond the grid
    with pytest.raises(DomainError):
        mp_curve.pressure(5.0)
    with pytest.raises(DomainError):
        mp_curve.pressure(-2.0)


def test_convergence_in_n():
    spec = tf.make_manneville_pomeau(0.5)
    ref = pressure_at(spec, 0.5, 4096).value
    errs = [abs(pressure_at(spec, 0.5, N).value - ref)
            for N in (256, 512, 1024)]
    assert errs[0] > errs[1] > errs[2]


def test_detect_transition_refinement_width(mp_curve):
    t0 = detect_transition(mp_curve)
    grid_step = mp_curve.t_grid[1] - mp_curve.t_grid[0]
    assert abs(t0 - mp_curve.t0_estimate) <= grid_step


def test_classifier_kink_vs_smooth(mp_curve):
    diag = left_slope_at_transition(mp_curve)
    assert diag.classifier == "kink"
    assert diag.limit_slope < -0.02
    c2 = pressure_curve(tf.make_c2_intermittent(0.5), -1.0, 2.0, 0.02, 2048)
    diag2 = left_slope_at_transition(c2)
    assert diag2.classifier == "smooth"
    assert diag2.shape_exponent > diag.shape_exponent


def test_periodic_orbit_pressure_exact():
    d = tf.make_doubling()
    assert periodic_orbit_pressure(d, 0.5, 8) == pytest.approx(
        0.5 * math.log(2), abs=1e-12)
    p = tf.make_piecewise_linear([3.0, 1.5])
    assert periodic_orbit_pressure(p, 0.5, 10) == pytest.approx(
        math.log(3.0 ** -0.5 + 1.5 ** -0.5), abs=1e-12)


def test_periodic_orbit_pressure_vs_spectral(mp_curve):
    spec = mp_curve.spec
    assert periodic_orbit_pressure(spec, 0.0, 10) == pytest.approx(
        math.log(2), abs=1e-12)
    po = periodic_orbit_pressure(spec, 0.5, 12)
    assert abs(po - mp_curve.pressure(0.5)) < 5e-3


def test_periodic_orbit_budget():
    with pytest.raises(BudgetError):
        periodic_orbit_pressure(tf.make_doubling(), 0.0, 25)


def test_skew_factorized_vs_2d():
    sk = tf.make_skew_product(tf.BaseEndoSpec(2),
                              fiber=tf.make_manneville_pomeau(0.5))
    assert skew_pressure(sk, 0.0, 64, "factorized") == pytest.approx(
        math.log(4), abs=1e-12)
    assert skew_pressure(sk, 0.0, 64, "2d") == pytest.approx(
        math.log(4), abs=1e-10)
    diff = abs(skew_pressure(sk, 0.5, 64, "factorized")
               - skew_pressure(sk, 0.5, 64, "2d"))
    assert diff < 1e-3


def test_skew_x_dependent_fiber():
    sk = tf.make_skew_product(tf.BaseEndoSpec(3),
                              fiber_rule=tf.C2FiberRule(0.5, 0.25))
    assert skew_pressure(sk, 0.0, 32, "2d") == pytest.approx(
        math.log(6), abs=1e-10)


def test_skew_2d_budget():
    sk = tf.make_skew_product(tf.BaseEndoSpec(2),
                              fiber=tf.make_manneville_pomeau(0.5))
    with pytest.raises(BudgetError):
        skew_pressure(sk, 0.0, 2 ** 14, "2d")


def test_skew_curve_plateau():
    sk = tf.make_skew_product(tf.BaseEndoSpec(2),
                              fiber=tf.make_manneville_pomeau(0.5))
    curve = pressure_curve(sk, -0.5, 2.0, 0.02, 1024)
    assert curve.plateau == pytest.approx(math.log(2))
    assert curve.h_top == pytest.approx(math.log(4))
    assert curve.pressure(0.0) == pytest.approx(math.log(4), abs=1e-3)
    assert curve.t0_estimate == pytest.approx(0.97, abs=0.02)

"""Shared fixtures: moderately sized pressure curves reused across tests."""

import pytest

import thermofractal as tf
from thermofractal.pressure import pressure_curve


@pytest.fixture(scope="session")
def mp_map():
    return tf.make_manneville_pomeau(0.5)


@pytest.fixture(scope="session")
def pwl_map():
    return tf.make_piecewise_linear([3.0, 1.5])


@pytest.fixture(scope="session")
def doubling_map():
    return tf.make_doubling()


@pytest.fixture(scope="session")
def mp_curve(mp_map):
    """mp p = 0.5 on [-1, 2], N = 2048; the workhorse intermittent curve."""
    return pressure_curve(mp_map, -1.0, 2.0, 0.02, 2048)


@pytest.fixture(scope="session")
def pwl_curve(pwl_map):
    return pressure_curve(pwl_map, -3.0, 3.0, 0.02, 512)


@pytest.fixture(scope="session")
def doubling_curve(doubling_map):
    return pressure_curve(doubling_map, -2.0, 2.0, 0.02, 512)


@pytest.fixture(scope="session")
def mp_rate(mp_curve):
    from thermofractal.multifractal import rate_function
    return rate_function(mp_curve)


@pytest.fixture(scope="session")
def pwl_rate(pwl_curve):
    from thermofractal.multifractal import rate_function
    return rate_function(pwl_curve)

import numpy as np
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hsmirnov.distance import (arc_area, arc_length, bilipschitz_constants, cc_distance_estimate,
                               norm_bracket)
from hsmirnov.group import dilate, group_inv, group_mul, homogeneous_norm


def test_same_point():
    b = cc_distance_estimate([1, 2, 3], [1, 2, 3])
    assert b.lower == 0 and b.upper == 0


def test_horizontal_segment():
    b = cc_distance_estimate([0, 0, 0], [1, 0, 0])
    assert b.upper <= 1 + 1e-6 and b.lower >= 1 - 1e-3


def test_vertical_unit():
    b = cc_distance_estimate([0, 0, 0], [0, 0, 1])
    target = 2 * np.sqrt(np.pi)
    assert b.contains(target)
    assert b.width <= 0.02 * target


def test_arc_family_against_quadrature():
    """Area and length of the lifted arc by direct quadrature of the parametrised circle."""
    d, theta = 1.3, 1.1
    r = d / (2 * np.sin(theta))
    s = np.linspace(-theta, theta, 20001)
    # arc through (-d/2, 0) and (d/2, 0), bulging upward
    x = r * np.sin(s)
    y = r * np.cos(s) - r * np.cos(theta)
    dx, dy = np.gradient(x, s), np.gradient(y, s)
    length = np.trapezoid(np.hypot(dx, dy), s)
    area = abs(np.trapezoid(0.5 * (x * dy - y * dx), s))
    assert abs(length - arc_length(theta, d)) < 1e-6
    assert abs(area - arc_area(theta, d)) < 1e-6
    assert abs(arc_area(1e-5, d) - d * d * 1e-5 / 6) < 1e-12


def test_bilipschitz_constants():
    m, M = bilipschitz_constants()
    assert 0.99 <= m <= 1.0
    assert abs(M - 2 * np.sqrt(np.pi)) < 1e-9


pts = arrays(float, 3, elements=st.floats(-3, 3, allow_nan=False))


@given(pts, pts)
def test_bracket_consistent_with_norm(p, q):
    m, M = bilipschitz_constants()
    r = float(homogeneous_norm(group_mul(group_inv(p), q)))
    b = cc_distance_estimate(p, q)
    assert b.lower <= b.upper + 1e-12
    assert b.lower <= M * r * (1 + 1e-9) + 1e-12
    assert b.upper >= m * r * (1 - 1e-9) - 1e-12
    nb = norm_bracket(p, q)
    assert nb.lower <= b.upper + 1e-9 and b.lower <= nb.upper + 1e-9


@given(pts, pts)
def test_left_invariance_and_homogeneity(p, q):
    g = np.array([0.3, -1.2, 0.7])
    b = cc_distance_estimate(p, q)
    bt = cc_distance_estimate(group_mul(g, p), group_mul(g, q))
    assert abs(b.upper - bt.upper) <= 1e-6 * (1 + b.upper)
    bd = cc_distance_estimate(dilate(2.0, p), dilate(2.0, q))
    assert abs(bd.upper - 2 * b.upper) <= 1e-5 * (1 + b.upper)


def test_higher_n_reduces_to_chord(rng):
    p = np.zeros(5)
    q = np.array([0.6, 0.0, 0.8, 0.0, 0.3])
    b2 = cc_distance_estimate(p, q)
    b1 = cc_distance_estimate(np.zeros(3), np.array([1.0, 0.0, 0.3]))
    assert abs(b2.upper - b1.upper) < 1e-9 and abs(b2.lower - b1.lower) < 1e-9

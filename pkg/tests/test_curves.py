import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsmirnov.calculus import HVectorField, ScalarField
from hsmirnov.curves import (CurveCharge, HorizontalCurve, act, boundary_pairing, chord_area_increment,
                             d_infinity, hermite_area_increment, length, riemann_sum, variation)
from hsmirnov.dictionaries import Box, scalar_dictionary
from hsmirnov.fixtures import rotational_field
from hsmirnov.flow import FlowConfig, integrate
from hsmirnov.group import INFINITY, group_inv, group_mul, homogeneous_norm

ROT = rotational_field()


def line(M=64, l=1.0):
    t = np.linspace(0, l, M + 1)
    return HorizontalCurve(np.stack([t, 0 * t, 0 * t], 1), np.tile([1.0, 0.0], (M + 1, 1)), l)


def spiral(M=1024):
    t = np.linspace(0, 2 * np.pi, M + 1)
    return HorizontalCurve(np.stack([np.cos(t), np.sin(t), t / 2], 1),
                           np.stack([-np.sin(t), np.cos(t)], 1), 2 * np.pi)


def constant(p, M=16):
    return HorizontalCurve(np.tile(p, (M + 1, 1)), np.zeros((M + 1, 2)), 1.0)


def test_validation_and_immutability():
    with pytest.raises(ValueError):
        HorizontalCurve(np.zeros((3, 3)), np.zeros((2, 2)), 1.0)
    with pytest.raises(ValueError):
        HorizontalCurve(np.zeros((3, 3)), np.zeros((3, 2)), 0.0)
    c = line()
    with pytest.raises(ValueError):
        c.samples[0, 0] = 5.0


def test_length_examples():
    assert length(constant([1.0, 2.0, 3.0])) == 0
    assert abs(length(line()) - 1) < 1e-14
    assert abs(length(spiral()) - 2 * np.pi) < 1e-6


def test_act_examples():
    zero = HVectorField(lambda p: np.zeros(p.shape[:-1] + (2,)), 1)
    one = HVectorField(lambda p: np.broadcast_to([1.0, 0.0], p.shape[:-1] + (2,)), 1)
    assert act(line(), zero) == 0
    assert abs(act(line(), one) - 1) < 1e-14
    assert abs(act(spiral(), ROT) - 2 * np.pi) < 1e-6
    assert abs(CurveCharge(spiral())(ROT) - 2 * np.pi) < 1e-6


def test_variation_examples():
    c = line(M=100)
    assert variation(c, lambda p: False) == 0
    assert abs(variation(c) - length(c)) < 1e-14
    assert abs(variation(c, lambda p: p[0] > 0.5) - 0.5) <= c.dt
    s = spiral()
    assert abs(CurveCharge(s).variation() - 2 * np.pi) < 1e-8


def test_boundary_pairing_examples():
    x1 = ScalarField(lambda p: p[..., 0])
    zf = ScalarField(lambda p: p[..., -1])
    assert abs(boundary_pairing(constant([0.2, 0.1, 1.0]), zf)) < 1e-14
    assert abs(boundary_pairing(line(), x1) + 1) < 1e-8
    assert abs(boundary_pairing(spiral(), zf) + np.pi) < 1e-6
    assert abs(CurveCharge(line()).divergence(x1) + 1) < 1e-8


def test_boundary_pairing_second_order():
    """|boundary_pairing - (psi(start) - psi(end))| <= C dt^2 over the scalar dictionary."""
    tests = scalar_dictionary(Box(np.array([0.0, 0.0, 0.5]), np.array([1.0, 1.0]), 1.0))
    errs = {}
    for dt in (0.1, 0.05):
        c = integrate([1, 0, 0], ROT, FlowConfig(dt, 2.0))
        errs[dt] = max(abs(boundary_pairing(c, f) - (f(c.start) - f(c.end))) for f in tests)
    assert errs[0.05] <= 2.0 * 0.05 ** 2
    assert errs[0.1] / errs[0.05] > 3.0


def test_riemann_sums_converge():
    s = spiral(M=2048)
    exact = act(s, ROT)
    errs = [abs(riemann_sum(s, ROT, m) - exact) for m in (8, 16, 32, 64)]
    assert all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < errs[0]
    assert abs(riemann_sum(s, ROT, s.M) - exact) < 1e-5
    # a partition that does not divide the grid uses the interpolant
    assert abs(riemann_sum(s, ROT, 48) - 48 * np.sin(2 * np.pi / 48)) < 1e-6
    with pytest.raises(ValueError):
        riemann_sum(s, ROT, 0)


@settings(max_examples=30)
@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.sampled_from([4, 8, 16]))
def test_riemann_sum_continuity_in_d_infinity(a, b, c, m):
    """|S_m(g) - S_m(g')| <= 2 m M delta + omega(delta) L_m with Phi = (-y, x), omega(d) = d."""
    s = spiral(M=256)
    shifted = HorizontalCurve(group_mul(np.array([a, b, c]), s.samples), s.velocities, s.l)
    delta = d_infinity(s, shifted)
    Mphi = np.linalg.norm(ROT(np.concatenate([s.samples, shifted.samples])), axis=1).max()
    pts = s.samples[::s.M // m]
    Lm = np.sum(np.linalg.norm(np.diff(pts[:, :2], axis=0), axis=1))
    bound = 2 * m * Mphi * delta + delta * Lm
    assert abs(riemann_sum(s, ROT, m) - riemann_sum(shifted, ROT, m)) <= bound + 1e-12


def test_d_infinity():
    s = spiral(M=64)
    assert d_infinity(s, s) == 0
    p, q = np.array([0.1, 0.2, 0.3]), np.array([-1.0, 0.5, 2.0])
    assert abs(d_infinity(constant(p), constant(q)) - homogeneous_norm(group_mul(group_inv(p), q))) < 1e-15
    far = d_infinity(s, INFINITY, compactified=True)
    assert 0 < far <= 2
    assert d_infinity(s, INFINITY) == float("inf")
    assert d_infinity(s, s, compactified=True) == 0
    with pytest.raises(ValueError):
        d_infinity(s, spiral(M=32))


def test_contact_rules():
    c = integrate([0.3, 0.2, 0.0], ROT, FlowConfig(0.1, 1.0))
    assert np.abs(c.contact_residuals).max() < 1e-14
    # the chord rule alone is only second order
    assert 1e-6 < np.abs(c.chord_residuals).max() < 1e-2
    h0, h1 = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    v = np.array([1.0, 0.0])
    assert hermite_area_increment(h0, h1, v, v, 1.0) == chord_area_increment(h0, h1) == 0


def test_interpolant_consistent_with_samples():
    c = integrate([0.5, 0.0, 0.2], ROT, FlowConfig(0.05, 1.0))
    pts, vel = c.at(c.times)
    assert np.abs(pts - c.samples).max() < 1e-14 and np.abs(vel - c.velocities).max() < 1e-14
    fine = c.resample(4 * c.M)
    assert np.abs(fine.contact_residuals).max() < 1e-13
    exact = lambda t: np.stack([0.5 * np.cos(t), 0.5 * np.sin(t), 0.2 + t / 8], -1)
    assert np.abs(fine.samples - exact(fine.times)).max() < 1e-6


def test_consecutive_samples_within_dt():
    from hsmirnov.distance import cc_distance_estimate
    c = integrate([0.2, 0.9, 0.0], ROT, FlowConfig(0.1, 1.0))
    for a, b in zip(c.samples[:-1], c.samples[1:]):
        assert cc_distance_estimate(a, b).lower <= c.dt * (1 + 1e-6)


def test_var_le_length_on_dictionary_flows(rng):
    for _ in range(5):
        seed = rng.normal(size=3) * 0.5
        c = integrate(seed, HVectorField(lambda p: np.stack([np.cos(p[..., 2]), np.sin(p[..., 0])], -1) * 0.7, 1),
                      FlowConfig(0.05, 1.0))
        assert variation(c, lambda p: p[0] > 0) <= length(c) + 1e-14

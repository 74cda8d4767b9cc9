import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsmirnov.calculus import HVectorField, Mollifier
from hsmirnov.curves import length
from hsmirnov.dictionaries import Box, scalar_dictionary
from hsmirnov.fixtures import constant_field, figure_eight, linear_field, rotational_field, single_atom
from hsmirnov.flow import (FlowConfig, FlowMap, GronwallError, HorizonError, SpeedBoundError, flow_at,
                           gronwall_certificate, gronwall_rate, integrate, integrate_batch,
                           liouville_residual)

ZERO = HVectorField(lambda p: np.zeros(p.shape[:-1] + (2,)), 1, 0.0, "zero")


def rot_exact(t):
    return np.array([np.cos(t), np.sin(t), t / 2])


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(dt=0, t_max=1)
    with pytest.raises(ValueError):
        FlowConfig(dt=2, t_max=1)
    with pytest.raises(ValueError):
        FlowConfig(dt=0.1, t_max=1, method="euler")
    c = FlowConfig(dt=0.3, t_max=1)
    assert c.steps == 4 and abs(c.step - 0.25) < 1e-15
    assert FlowConfig(dt=0.1, t_max=1).steps == 10


def test_constant_field_straight_line():
    c = integrate([0, 0, 0], constant_field([1.0, 0.0]), FlowConfig(0.01, 1.0))
    assert np.allclose(c.samples[:, 0], c.times, atol=1e-14)
    assert np.all(c.samples[:, 1:] == 0)


def test_zero_field_constant_curve():
    c = integrate([0.3, -1, 2], ZERO, FlowConfig(0.1, 1.0))
    assert np.all(c.samples == [0.3, -1, 2])


def test_rotational_closed_form():
    c = integrate([1, 0, 0], rotational_field(), FlowConfig(0.01, 2 * np.pi))
    assert np.abs(c.end - [1, 0, np.pi]).max() <= 1e-6
    assert np.abs(c.samples - rot_exact(c.times).T).max() < 1e-6
    assert abs(length(c) - 2 * np.pi) < 1e-6


def test_rotational_convergence_order():
    errs = []
    for dt in (0.1, 0.05, 0.025):
        c = integrate([1, 0, 0], rotational_field(), FlowConfig(dt, 2 * np.pi))
        errs.append(np.linalg.norm(c.end - [1, 0, np.pi]))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.5), orders


def test_flow_at_and_semigroup():
    fmap = FlowMap(rotational_field(), FlowConfig(0.01, 2 * np.pi))
    assert np.array_equal(flow_at([1, 0, 0], 0.0, fmap), [1, 0, 0])
    assert np.abs(flow_at([1, 0, 0], np.pi, fmap) - [-1, 0, np.pi / 2]).max() <= 1e-6
    x = np.array([0.4, -0.7, 0.2])
    for s, t in ((0.5, 1.0), (1.3, 0.4), (2.0, 2.0)):
        lhs = flow_at(flow_at(x, s, fmap), t, fmap)
        assert np.abs(lhs - flow_at(x, s + t, fmap)).max() <= 1e-6
    # backward flow undoes forward flow
    assert np.abs(flow_at(flow_at(x, 1.0, fmap), -1.0, fmap) - x).max() <= 1e-6
    with pytest.raises(HorizonError):
        flow_at(x, 7.0, fmap)
    assert fmap.trajectory(x) is fmap.trajectory(x.copy())


def test_semigroup_on_mollified_field():
    from hsmirnov.calculus import MollifiedCharge
    mu = figure_eight(400)
    field = MollifiedCharge(mu, Mollifier(1, 0.1)).field()
    fmap = FlowMap(field, FlowConfig(0.005, 1.0))
    x = mu.points[17] + np.array([0.01, 0.0, 0.0])
    lhs = flow_at(flow_at(x, 0.3, fmap), 0.4, fmap)
    assert np.abs(lhs - flow_at(x, 0.7, fmap)).max() <= 1e-6


def test_discrete_horizontality_and_speed():
    c = integrate([0.5, 0.2, 0.1], rotational_field(), FlowConfig(0.05, 0.5))
    assert np.abs(c.contact_residuals).max() <= 1e-12
    assert c.speeds.max() <= 1 + 1e-9


def test_speed_bound_error():
    fast = constant_field([3.0, 4.0])
    with pytest.raises(SpeedBoundError):
        integrate([0, 0, 0], fast, FlowConfig(0.1, 1.0))
    # the rotational field leaves the unit disc
    with pytest.raises(SpeedBoundError):
        integrate([0.9, 0, 0], linear_field([[2, 0, 0], [0, 2, 0]]), FlowConfig(0.1, 1.0))


def test_batch_matches_single(rng):
    seeds = rng.normal(size=(5, 3)) * 0.5
    field = rotational_field()
    S, V = integrate_batch(seeds, field, 1.0, 20, speed_tol=None)
    for k, s in enumerate(seeds):
        S1, V1 = integrate_batch(s[None], field, 1.0, 20, speed_tol=None)
        assert np.array_equal(S[k], S1[0]) and np.array_equal(V[k], V1[0])


@settings(max_examples=30)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.floats(0, 2 * np.pi))
def test_mollified_flow_stays_horizontal(x, y, z, ang):
    field = HVectorField(lambda p: np.stack([np.cos(ang + p[..., 2]), np.sin(ang + p[..., 0])], -1) / np.sqrt(2),
                         1)
    c = integrate([x, y, z], field, FlowConfig(0.05, 1.0))
    assert np.abs(c.contact_residuals).max() <= 1e-10 * (1 + np.abs(c.samples).max() ** 2)
    assert c.speeds.max() <= 1 + 1e-9


# --- Gronwall --------------------------------------------------------------------

def test_gronwall_rate_documented():
    assert gronwall_rate(1.0) >= 8.0
    assert gronwall_rate(2.0) == 2 * gronwall_rate(1.0)


def test_gronwall_fixtures():
    cfg = FlowConfig(0.01, 1.0)
    const = integrate([0, 0, 0], ZERO, cfg)
    assert gronwall_certificate(const, 0.0, 0.0).holds
    spiral = integrate([1, 0, 0], rotational_field(), FlowConfig(0.01, 2 * np.pi))
    rep = gronwall_certificate(spiral, 1.0, gronwall_rate(1.0))
    assert rep.holds and rep.min_slack >= 0
    line = integrate([0, 0, 0], constant_field([1.0, 0.0]), cfg)
    assert np.allclose(np.sum(line.samples[:, :2] ** 2, 1) ** 2 + line.samples[:, 2] ** 2, line.times ** 4)
    assert gronwall_certificate(line, 1.0, 4.0).holds
    assert not gronwall_certificate(line, 1.0, 0.0).holds


def test_gronwall_check_in_integrate():
    bad = HVectorField(lambda p: np.broadcast_to([1.0, 0.0], p.shape[:-1] + (2,)), 1, growth_bound=1e-3)
    with pytest.raises(GronwallError):
        integrate([0, 0, 0], bad, FlowConfig(0.1, 3.0, gronwall_check=True))
    integrate([1, 0, 0], rotational_field(), FlowConfig(0.1, 3.0, gronwall_check=True))


# --- Liouville -----------------------------------------------------------------------

def test_liouville_t_zero():
    mu = figure_eight(100)
    tests = scalar_dictionary(Box.around(mu.points, 0.1))
    assert liouville_residual(mu, Mollifier(1, 0.1), [0.0], tests, grid=0.05) == 0.0


@pytest.mark.slow
def test_liouville_invariance_and_control():
    mu = figure_eight(400)
    J = Mollifier(1, 0.1)
    tests = scalar_dictionary(Box.around(mu.points, 0.1))
    assert liouville_residual(mu, J, [0.5, 1.0], tests, grid=0.04, dt=0.02) <= 1e-3
    src = single_atom()
    tests_src = scalar_dictionary(Box.around(np.zeros((1, 3)), 0.1))
    assert liouville_residual(src, J, [0.5, 1.0], tests_src, grid=0.02, dt=0.01) > 1e-1

"""
섭동 w 의 RK4 흐름과 Jacobian, 추정 검사 테스트
"""
import math

import numpy as np
import pytest

from transport_selection.errors import StepSizeError, TimeDomainError
from transport_selection.fields import builtin_field, zero_field
from transport_selection.flow import (
    estimate_checks,
    flow_w,
    flow_w_between,
    inverse_flow_w,
    pushforward_density_range,
)
from transport_selection.utils import gauss_nodes, rk4_step, split_times, tensor_gauss


def test_swirl_core_is_rigid_rotation():
    w = builtin_field("swirl", omega=1.0)
    result = flow_w(w, 1.5, np.array([0.1, 0.0]))
    np.testing.assert_allclose(result.endpoint, [0.1 * math.cos(0.5), 0.1 * math.sin(0.5)],
                               atol=1e-10)
    assert result.jacobian_det == pytest.approx(1.0, abs=1e-10)


def test_compression_core_scales_exponentially():
    w = builtin_field("compression", alpha=0.5)
    result = flow_w(w, 2.0, np.array([0.05, 0.0]))
    assert result.endpoint[0] == pytest.approx(0.05 * math.exp(0.5), rel=1e-9)
    assert result.jacobian_det == pytest.approx(math.e, rel=1e-8)
    back = flow_w(w, 0.0, np.array([0.05, 0.0]))
    assert back.jacobian_det == pytest.approx(1 / math.e, rel=1e-8)


def test_inverse_flow_round_trip():
    w = builtin_field("shear", beta=1.0)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.7, 0.7, size=(50, 2))
    forward = flow_w(w, 0.4, pts).endpoint
    np.testing.assert_allclose(inverse_flow_w(w, 0.4, forward), pts, atol=1e-9)


def test_flow_composes_over_intermediate_times():
    w = builtin_field("compression", "oscillating", {"amplitude": 1.0}, alpha=0.8)
    x = np.array([[0.3, -0.2], [0.0, 0.5]])
    direct = flow_w_between(w, 0.2, 1.7, x).endpoint
    via = flow_w_between(w, 0.9, 1.7, flow_w_between(w, 0.2, 0.9, x).endpoint).endpoint
    np.testing.assert_allclose(direct, via, atol=1e-9)


def test_zero_field_flow_is_identity():
    x = np.array([[0.3, 0.4]])
    result = flow_w(zero_field(), 0.0, x)
    np.testing.assert_array_equal(result.endpoint, x)
    np.testing.assert_array_equal(result.jacobian_det, [1.0])


def test_step_halving_validation():
    w = builtin_field("compression", alpha=2.0)
    x = np.array([0.1, 0.1])
    assert flow_w(w, 0.0, x, h=1e-2, tol=1e-6).endpoint.shape == (2,)
    with pytest.raises(StepSizeError):
        flow_w(w, 0.0, x, h=0.5, tol=1e-12)


def test_times_outside_domain_rejected():
    with pytest.raises(TimeDomainError):
        flow_w(builtin_field("swirl"), 2.5, np.array([0.0, 0.0]))


def test_pushforward_of_swirl_is_uniform():
    lo, hi, tol = pushforward_density_range(builtin_field("swirl"), 0.0, n_mc=20000)
    assert 1.0 - tol <= lo <= hi <= 1.0 + tol


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["swirl", "compression"])
def test_estimate_checks_pass(kind):
    report = estimate_checks(builtin_field(kind), h=2e-3, n_mc=10000)
    assert report.passed
    frame = report.to_frame()
    assert set(frame["t"]) == {0.0, 0.5, 1.5, 2.0}
    assert frame["passed"].all()


# ----------------------------------------------------------------------
# utils
# ----------------------------------------------------------------------
def test_rk4_step_is_fourth_order():
    state = (np.array([1.0]),)
    out = rk4_step(lambda t, s: (s[0],), 0.0, state, 0.1)
    assert out[0][0] == pytest.approx(math.exp(0.1), abs=1e-6)


def test_gauss_rules_integrate_polynomials():
    t, w = gauss_nodes(3, 0.0, 2.0)
    assert np.sum(w * t**5) == pytest.approx(2.0**6 / 6)
    pts, weights = tensor_gauss((0.0, 0.0, 1.0, 2.0), 4, 2)
    assert np.sum(weights) == pytest.approx(2.0)
    assert np.sum(weights * pts[:, 0] ** 2 * pts[:, 1]) == pytest.approx(2.0 / 3.0)


def test_split_times():
    assert split_times(0.0, 2.0, [1.0, 0.5, 3.0]) == [0.0, 0.5, 1.0, 2.0]
    assert split_times(2.0, 0.0, [1.0, 0.5]) == [2.0, 1.0, 0.5, 0.0]

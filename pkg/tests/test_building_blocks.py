"""
Building block 벡터장 v, u_λ, b_λ, truncation, 흐름 함수 테스트
"""
from fractions import Fraction

import numpy as np
import pytest

from transport_selection.errors import ConstructionError, SingularTimeError, TimeDomainError
from transport_selection.fields import (
    FieldSpec,
    Orientation,
    Side,
    SpaceBump,
    StageIndex,
    eval_b,
    eval_trunc,
    eval_u,
    eval_v,
    sampler_for,
    stage_at,
    stage_schedule,
    stream_function,
    sup_norm,
    tv_estimate,
    weak_divergence,
)
from transport_selection.fields.building_blocks import local_coordinates
from transport_selection.fields.total_variation import v_total_variation_on_square

F = Fraction


# ----------------------------------------------------------------------
# v and u_λ
# ----------------------------------------------------------------------
def test_v_on_each_region():
    assert eval_v((F(1, 4), F(0))) == (0, 1)
    assert eval_v((F(0), F(1, 4))) == (-1, 0)
    assert eval_v((F(-1, 4), F(1, 8))) == (0, -1)


def test_v_vanishes_on_diagonals_and_outside():
    assert eval_v((F(1, 4), F(1, 4))) == (0, 0)
    assert eval_v((F(1, 4), F(-1, 4))) == (0, 0)
    assert eval_v((F(3, 4), F(0))) == (0, 0)
    assert eval_v((F(1, 2), F(0))) == (0, 0)


def test_orientation_reverses_v():
    assert eval_v((F(1, 4), F(0)), Orientation.CW) == (0, -1)
    assert Orientation.parse("clockwise") is Orientation.CW
    with pytest.raises(ConstructionError):
        Orientation.parse("sideways")


def test_v_array_matches_exact():
    rng = np.random.default_rng(3)
    pts = rng.integers(-40, 40, size=(64, 2)) / 64 + 1 / 256
    values = eval_v(pts)
    for p, v in zip(pts, values):
        exact = eval_v((F(p[0]), F(p[1])))
        assert tuple(v) == pytest.approx(tuple(float(c) for c in exact))


def test_u_only_moves_filled_squares():
    # (1, 1) has an even index sum: filled
    assert eval_u(0, (F(5, 4), F(1))) == (0, 1)
    # (1, 0) is empty
    assert eval_u(0, (F(5, 4), F(0))) == (0, 0)
    assert eval_u(1, (F(1, 8), F(0))) == (0, F(1, 2))


@pytest.mark.parametrize("lam", [0, 1, 2])
def test_u_is_periodic(lam):
    rng = np.random.default_rng(lam)
    pts = rng.uniform(-1, 1, size=(200, 2))
    period = 2.0 ** (1 - lam)
    np.testing.assert_allclose(eval_u(lam, pts), eval_u(lam, pts + [period, 0.0]), atol=1e-12)
    np.testing.assert_allclose(eval_u(lam, pts), eval_u(lam, pts + [0.0, period]), atol=1e-12)


def test_sup_norm():
    assert sup_norm(FieldSpec.building_block(0)) == 2
    assert sup_norm(2) == F(1, 2)


# ----------------------------------------------------------------------
# time stages
# ----------------------------------------------------------------------
def test_stage_lookup():
    assert stage_at(0) == StageIndex(0, Side.FORWARD)
    assert stage_at(F(1, 2)) == StageIndex(1, Side.FORWARD)
    assert stage_at(F(3, 4)) == StageIndex(2, Side.FORWARD)
    assert stage_at(1) is None
    assert stage_at(F(5, 4)) == StageIndex(1, Side.BACKWARD)
    assert stage_at(2) == StageIndex(0, Side.BACKWARD)
    assert StageIndex(2, Side.FORWARD).interval == (F(3, 4), F(7, 8))


def test_time_outside_domain_rejected():
    with pytest.raises(TimeDomainError):
        eval_b(0, F(5, 2), (F(0), F(0)))
    with pytest.raises(TimeDomainError):
        stage_at(-0.1)


def test_b_is_staged_and_reflected():
    x = (F(1, 16), F(0))
    assert eval_b(0, F(1, 4), x) == eval_u(0, x)
    assert eval_b(0, F(1, 2), x) == eval_u(0, (F(1, 8), F(0)))
    assert eval_b(0, 1, x) == (0, 0)
    forward = eval_b(0, F(5, 8), x)
    assert eval_b(0, F(11, 8), x) == tuple(-c for c in forward)
    assert eval_b(0, F(11, 8), x, reflection_sign=1) == forward


def test_truncation_windows():
    sym = FieldSpec.trunc_sym(0, 1)
    asym = FieldSpec.trunc_asym(0, 1)
    assert sym.truncation_window == (F(1, 2), F(3, 2))
    assert asym.truncation_window == (F(7, 8), F(3, 2))
    x = (F(1, 16), F(0))
    assert eval_trunc(sym, F(3, 4), x) == (0, 0)
    assert eval_trunc(asym, F(3, 4), x) == eval_b(0, F(3, 4), x)
    assert eval_trunc(sym, F(7, 4), x) == eval_b(0, F(7, 4), x)
    with pytest.raises(ConstructionError):
        eval_trunc(FieldSpec.building_block(0), 0, x)


def test_stage_schedule_of_symmetric_truncation():
    segments = stage_schedule(FieldSpec.trunc_sym(0, 1), 0, 2)
    assert [(s.start, s.end, s.sign) for s in segments] == [
        (0, F(1, 2), 1),
        (F(3, 2), 2, -1),
    ]


def test_stage_schedule_of_asymmetric_truncation():
    segments = stage_schedule(FieldSpec.trunc_asym(0, 1), 0, 2)
    forward = [s for s in segments if s.stage.side is Side.FORWARD]
    assert [s.stage.k for s in forward] == [0, 1, 2]
    assert forward[-1].end == F(7, 8)
    assert sum(s.duration for s in segments) == F(7, 8) + F(1, 2)


def test_untruncated_schedule_through_one_is_singular():
    with pytest.raises(SingularTimeError):
        stage_schedule(FieldSpec.building_block(0), 0, F(3, 2))
    assert len(stage_schedule(FieldSpec.building_block(0), 0, F(3, 4))) == 2


# ----------------------------------------------------------------------
# stream function, divergence, total variation
# ----------------------------------------------------------------------
@pytest.mark.parametrize("lam,stage", [(0, 0), (1, 1)])
def test_stream_function_generates_u(lam, stage):
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1, 1, size=(400, 2))
    _, xi, _ = local_coordinates(lam + stage, pts)
    a1, a2 = np.abs(xi[:, 0]), np.abs(xi[:, 1])
    keep = (np.abs(a1 - a2) > 1e-3) & (np.abs(np.maximum(a1, a2) - 0.5) > 1e-3)
    pts = pts[keep]
    eps = 1e-7 * 2.0 ** -(lam + stage)
    d1 = (stream_function(lam, stage, pts + [eps, 0]) - stream_function(lam, stage, pts - [eps, 0]))
    d2 = (stream_function(lam, stage, pts + [0, eps]) - stream_function(lam, stage, pts - [0, eps]))
    grad_perp = np.column_stack([-d2, d1]) / (2 * eps)
    expected = eval_u(lam, pts * 2.0**stage)
    np.testing.assert_allclose(grad_perp, expected, atol=1e-5)


def test_stream_function_exact_values():
    assert stream_function(0, 0, (F(1, 4), F(0))) == F(1, 8)
    assert stream_function(0, 0, (F(5, 4), F(0))) == F(1, 2)
    assert stream_function(0, 0, (F(1, 4), F(0)), Orientation.CW) == -F(1, 8)


def test_b_is_weakly_divergence_free():
    sampler = sampler_for(FieldSpec.building_block(0))
    tests = [SpaceBump((0.6, 0.9), 0.45), SpaceBump((1.2, 0.4), 0.3), SpaceBump((1.0, 1.0), 0.8)]
    window = (0.013, 0.007, 2.013, 2.007)
    gaps = weak_divergence(sampler, 0.25, window, tests, n=400)
    np.testing.assert_allclose(gaps, 0.0, atol=1e-2)


def test_total_variation_of_v():
    def field(pts):
        return eval_v(pts)

    estimate = tv_estimate(field, (-0.5, -0.5, 0.5, 0.5), 1 / 200)
    assert estimate == pytest.approx(v_total_variation_on_square(), rel=0.05)


def test_space_bump_gradient():
    bump = SpaceBump((0.2, -0.1), 0.5)
    pts = np.array([[0.3, 0.0], [0.1, -0.3], [0.5, 0.1]])
    eps = 1e-6
    fd = np.column_stack([
        (bump.value(pts + [eps, 0]) - bump.value(pts - [eps, 0])) / (2 * eps),
        (bump.value(pts + [0, eps]) - bump.value(pts - [0, eps])) / (2 * eps),
    ])
    np.testing.assert_allclose(bump.gradient(pts), fd, atol=1e-6)
    assert bump.value(np.array([[0.2, -0.1]]))[0] == pytest.approx(1.0)
    assert bump.value(np.array([[0.8, -0.1]]))[0] == 0.0

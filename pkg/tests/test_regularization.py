"""
Mollified 벡터장, 흐름 Z / Y, 정규화된 해 테스트
"""
import logging

import numpy as np
import pytest

from transport_selection.errors import ConstructionError
from transport_selection.dyadic import chessboard
from transport_selection.fields import FieldSpec, Orientation, builtin_field, eval_b, zero_field
from transport_selection.regularization import (
    MollifiedField,
    RegularizedSolution,
    StageStream,
    anchor_compressibility,
    anchor_envelope,
    assemble_regularized,
    flow_Y,
    flow_Z,
    mollify_space,
)


# ----------------------------------------------------------------------
# mollified stage fields
# ----------------------------------------------------------------------
def test_mollified_field_needs_truncation():
    with pytest.raises(ConstructionError):
        MollifiedField(FieldSpec.building_block(0), 8)
    with pytest.raises(ConstructionError):
        MollifiedField(FieldSpec.trunc_sym(0, 1), 0)


def test_stage_stream_nodes(caplog):
    assert StageStream(0, 0, 8, Orientation.CCW).nodes == 64
    assert StageStream(1, 2, 1, Orientation.CCW).nodes == 16
    with caplog.at_level(logging.WARNING):
        assert StageStream(0, 0, 1024, Orientation.CCW).nodes == 1024
    assert "capped" in caplog.text


def test_space_mollification_keeps_field_away_from_kinks():
    spec = FieldSpec.trunc_sym(0, 1)
    pts = np.array([[0.25, 0.05], [0.05, -0.3], [-0.35, 0.1], [1.2, 0.95]])
    np.testing.assert_allclose(mollify_space(spec, 64, 0.25, pts),
                               np.asarray(eval_b(0, 0.25, pts), dtype=float), atol=1e-4)


def test_mollified_field_is_divergence_free():
    mf = MollifiedField(FieldSpec.trunc_asym(0, 1), 8)
    pts = np.random.default_rng(0).uniform(-1, 1, size=(100, 2))
    for t in (0.1, 0.49, 0.8, 1.7):
        J = mf.jacobian(t, pts)
        np.testing.assert_allclose(J[:, 0, 0] + J[:, 1, 1], 0.0, atol=1e-12)


def test_time_blending_weights():
    mf = MollifiedField(FieldSpec.trunc_sym(0, 1), 8)
    assert [term.weight for term in mf.terms(0.3)] == pytest.approx([1.0])
    assert [term.weight for term in mf.terms(0.5)] == pytest.approx([0.5], abs=1e-6)
    assert mf.terms(1.0) == []
    pts = np.array([[0.3, 0.1]])
    np.testing.assert_array_equal(mf.value(1.0, pts), 0.0)
    sharp = MollifiedField(FieldSpec.trunc_sym(0, 1), 8, time_mollify=False)
    assert len(sharp.terms(0.5)) == 0
    assert len(sharp.terms(2.0)) == 1


def test_assembled_field_is_w_inside_truncation_window():
    w = builtin_field("swirl")
    spec = FieldSpec.mollified(0, w, 1, 8)
    pts = np.random.default_rng(1).uniform(-0.8, 0.8, size=(20, 2))
    np.testing.assert_allclose(assemble_regularized(spec, 1.0, pts), w.value(1.0, pts),
                               atol=1e-12)
    zero = FieldSpec.mollified(0, zero_field(), 1, 8)
    np.testing.assert_allclose(assemble_regularized(zero, 0.3, pts),
                               MollifiedField(zero.exact_part, 8).value(0.3, pts))


# ----------------------------------------------------------------------
# flows
# ----------------------------------------------------------------------
def test_flow_Z_preserves_area():
    mf = MollifiedField(FieldSpec.trunc_asym(0, 1), 8)
    pts = np.random.default_rng(2).uniform(-1, 1, size=(6, 2))
    result = flow_Z(mf, 0.0, 0.5, pts)
    np.testing.assert_allclose(result.jacobian_det, 1.0, atol=1e-4)
    back = flow_Z(mf, 0.5, 0.0, result.endpoint)
    np.testing.assert_allclose(back.endpoint, pts, atol=1e-5)


def test_flow_Y_anchors():
    spec = FieldSpec.mollified(0, builtin_field("swirl"), 1, 8)
    pts = np.array([[0.2, 0.1], [0.4, -0.3]])
    np.testing.assert_allclose(flow_Y(spec, 1, 1.0, pts).endpoint, pts, atol=1e-12)
    with pytest.raises(ConstructionError):
        flow_Y(spec, 2, 1.0, pts)


def test_anchor_compressibility_of_incompressible_perturbation():
    spec = FieldSpec.mollified(0, builtin_field("swirl"), 1, 8)
    assert anchor_envelope(spec.w) == pytest.approx((1.0, 1.0))
    frame = anchor_compressibility(spec, (0.5, 2.0), np.array([[0.1, 0.2], [-0.3, 0.4]]))
    assert frame["passed"].all()
    lo, hi = anchor_envelope(builtin_field("compression", alpha=0.2))
    assert lo < 1.0 < hi


# ----------------------------------------------------------------------
# regularised solutions
# ----------------------------------------------------------------------
def test_regularized_solution_starts_from_datum():
    sol = RegularizedSolution(FieldSpec.mollified(0, zero_field(), 1, 8), level=3)
    pts = np.random.default_rng(3).uniform(0, 2, size=(40, 2))
    np.testing.assert_array_equal(sol.density(0.0, pts), chessboard(0, pts).astype(float))
    assert sol.l1_distance_to_exact(0.0, 0.5) == 0.0
    np.testing.assert_array_equal(sol.l1_distances([0.5, 1.0], 0.0), 0.0)


def test_regularized_solution_rejects_unmollified_specs():
    with pytest.raises(ConstructionError):
        RegularizedSolution(FieldSpec.perturbed(0, zero_field(), q=1))

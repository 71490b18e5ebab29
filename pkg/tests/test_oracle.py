"""
유한체적 oracle 과 약해 잔차 테스트
"""
from fractions import Fraction

import numpy as np
import pytest

from transport_selection.errors import ConstructionError
from transport_selection.dyadic import CellGrid, chessboard_grid, period_window
from transport_selection.fields import (
    FieldSpec,
    SpaceBump,
    SpaceTimeBump,
    builtin_field,
    sampler_for,
)
from transport_selection.oracle import (
    FVState,
    exact_stream,
    fv_advance,
    fv_concordance,
    fv_snapshots,
    residual_battery,
    residual_table,
    sign_bump,
    snapshot_density,
    stage_breakpoints,
    time_nodes,
    unmixing_series,
    weak_residual,
)


# ----------------------------------------------------------------------
# finite volume
# ----------------------------------------------------------------------
def test_cfl_number_is_validated():
    grid = chessboard_grid(0, 3)
    with pytest.raises(ConstructionError):
        FVState.from_grid(grid, cfl=1.5)
    state = FVState.from_grid(grid)
    assert state.h == 1 / 8
    assert state.mass == pytest.approx(2.0)


def test_stream_fluxes_keep_constants():
    start = FVState.from_grid(CellGrid.constant(4, period_window(0), Fraction(1, 2)))
    end = fv_advance(start, None, 0.25, stream=exact_stream(FieldSpec.building_block(0)),
                     breakpoints=stage_breakpoints())
    np.testing.assert_allclose(end.grid.values, 0.5, atol=1e-12)
    assert end.time == 0.25


def test_upwind_conserves_mass():
    start = FVState.from_grid(chessboard_grid(0, 4))
    sampler = sampler_for(FieldSpec.building_block(0))
    states = fv_snapshots(start, sampler, [0.25, 0.5], breakpoints=stage_breakpoints())
    assert [s.time for s in states] == [0.25, 0.5]
    for state in states:
        assert state.mass == pytest.approx(start.mass, abs=1e-12)


def test_advance_rejects_bad_requests():
    start = FVState.from_grid(chessboard_grid(0, 3), time=0.5)
    with pytest.raises(ConstructionError):
        fv_advance(start, None, 0.75)
    with pytest.raises(ConstructionError):
        fv_advance(start, sampler_for(FieldSpec.building_block(0)), 0.25)


def test_exact_stream():
    with pytest.raises(ConstructionError):
        exact_stream(FieldSpec.perturbed(0, builtin_field("swirl")))
    stream = exact_stream(FieldSpec.trunc_sym(0, 1))
    pts = np.array([[0.25, 0.0], [0.1, 0.3]])
    np.testing.assert_array_equal(stream(1.0, pts), 0.0)
    np.testing.assert_array_equal(stream(0.75, pts), 0.0)
    np.testing.assert_allclose(stream(0.25, pts)[0], 0.125)
    np.testing.assert_allclose(stream(1.75, pts), -stream(0.25, pts))


def test_stage_breakpoints():
    assert stage_breakpoints(2) == (0.0, 0.5, 0.75, 1.25, 1.5, 2.0)


@pytest.mark.slow
def test_upwind_converges_to_exact_state():
    frame = fv_concordance(0, levels=(4, 5))
    assert frame["l1"].iloc[1] < frame["l1"].iloc[0]
    assert frame["mass_drift"].abs().max() < 1e-9


# ----------------------------------------------------------------------
# weak form
# ----------------------------------------------------------------------
def test_snapshot_density_is_periodic():
    states = [FVState.from_grid(chessboard_grid(0, 2)),
              FVState.from_grid(chessboard_grid(0, 2, complement=True), time=1.0)]
    density = snapshot_density(states)
    pts = np.array([[0.3, 0.2], [1.6, 0.1]])
    np.testing.assert_array_equal(density(0.1, pts), [0.0, 1.0])
    np.testing.assert_array_equal(density(0.9, pts), [1.0, 0.0])
    np.testing.assert_array_equal(density(0.1, pts + 2.0), density(0.1, pts))
    with pytest.raises(ConstructionError):
        snapshot_density([])


def test_time_nodes_split_at_breakpoints():
    phi = SpaceTimeBump(SpaceBump((1.0, 1.0), 0.5), 0.5, 0.2)
    nodes, weights = time_nodes(phi, (0.5,), order=3)
    assert len(nodes) == 6
    assert weights.sum() == pytest.approx(0.4)
    assert np.all((nodes > 0.3) & (nodes < 0.7))


def test_weak_residual_needs_interior_support():
    phi = SpaceTimeBump(SpaceBump((1.0, 1.0), 0.5), 0.1, 0.2)
    with pytest.raises(ConstructionError):
        weak_residual(unmixing_series(0), sampler_for(FieldSpec.building_block(0)), phi)


def test_battery_is_seeded():
    first = residual_battery(0, seed=3)
    assert first == residual_battery(0, seed=3)
    assert len(first) == 10
    assert [phi.t_center for phi in first[2::3]] == [1.0, 1.0, 1.0]
    for phi in first:
        a, b = phi.time_support
        assert 0.0 < a < b < 2.0
        x0, y0, x1, y1 = phi.space.bounding_box
        assert 0.0 <= x0 and x1 <= 2.0 and 0.0 <= y0 and y1 <= 2.0
    assert sign_bump(1).t_center == 1.25


def ones(x):
    return np.ones(len(x))


def test_unmixing_series_pairings():
    series = unmixing_series(0, h=2.0**-6)
    assert series.pair(1.0, ones, (0.0, 0.0, 1.0, 1.0)) == pytest.approx(0.5)
    assert series.pair(0.0, ones, (0.0, 0.0, 2.0, 2.0)) == pytest.approx(2.0)
    assert series.pair(0.5, ones, (0.0, 0.0, 2.0, 2.0)) == pytest.approx(2.0)
    assert series.pair(0.0, ones, (0.0, 0.0, 1.0, 1.0)) == pytest.approx(0.0)


@pytest.mark.slow
def test_unmixing_solution_has_small_residual():
    frame = residual_table(0, reflection_signs=(-1,))
    assert len(frame) == 11
    assert frame["residual"].abs().max() <= 5e-3

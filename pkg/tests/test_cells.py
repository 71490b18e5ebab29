"""
체크포인트 시각의 정확한 밀도 진화 테스트

Unmixing / mixed / truncation 해의 격자 상태, 점별 밀도, observation (O), weak* 간격
"""
from fractions import Fraction
import logging

import numpy as np
import pytest

from transport_selection.errors import AlignmentError, ConstructionError
from transport_selection.dyadic import (
    CellGrid,
    chessboard_grid,
    grids_equal,
    is_block_checker,
    l1_distance,
    Window,
    period_window,
)
from transport_selection.evolution import (
    Dictionary,
    SolutionKind,
    SolutionVariant,
    checkpoint_times,
    density_points,
    observation_O_check,
    pointwise_density,
    required_level,
    solution_grid,
    weak_star_gap,
)
from transport_selection.fields import Orientation

F = Fraction
HALF = F(1, 2)


# ----------------------------------------------------------------------
# variants
# ----------------------------------------------------------------------
def test_variant_parsing():
    assert SolutionVariant.parse("trunc_asym:3") == SolutionVariant.trunc_asym(3)
    assert SolutionVariant.parse("Unmixing").kind is SolutionKind.UNMIXING
    with pytest.raises(ConstructionError):
        SolutionVariant.parse("trunc_sym")
    with pytest.raises(ConstructionError):
        SolutionVariant.parse("mixed:2")
    with pytest.raises(ConstructionError):
        SolutionVariant.parse("stirred")


def test_checkpoint_times():
    times = checkpoint_times(0, SolutionVariant.unmixing(), depth=2)
    assert times == [0, F(1, 2), F(3, 4), 1, F(5, 4), F(3, 2), 2]


# ----------------------------------------------------------------------
# mixing identities
# ----------------------------------------------------------------------
@pytest.mark.parametrize("lam", [0, 1, 2])
def test_half_time_state_is_complement_of_finer_chessboard(lam):
    state = solution_grid(lam, SolutionVariant.unmixing(), HALF)
    assert grids_equal(state, chessboard_grid(lam + 1, complement=True))


@pytest.mark.parametrize("lam", [0, 1])
@pytest.mark.parametrize("k", range(0, 6))
def test_mixing_checkpoints(lam, k):
    window = period_window(lam)
    state = solution_grid(lam, SolutionVariant.unmixing(), 1 - F(1, 2**k), window=window)
    expected = chessboard_grid(lam + k, window=window, complement=k % 2 == 1)
    assert grids_equal(state, expected)


def test_mixing_checkpoints_clockwise():
    state = solution_grid(0, SolutionVariant.unmixing(), F(3, 4), orientation=Orientation.CW)
    assert grids_equal(state, chessboard_grid(2))


def test_unmixing_is_time_symmetric():
    for t in (F(1, 2), F(3, 4), F(7, 8)):
        forward = solution_grid(0, SolutionVariant.unmixing(), t)
        backward = solution_grid(0, SolutionVariant.unmixing(), 2 - t)
        assert grids_equal(forward, backward)
    assert grids_equal(solution_grid(0, SolutionVariant.unmixing(), 2), chessboard_grid(0))


def test_singular_time_returns_weak_star_limit(caplog):
    with caplog.at_level(logging.WARNING):
        state = solution_grid(0, SolutionVariant.unmixing(), 1)
    assert state.is_limit
    assert set(state.to_frame()["value"]) == {"1/2"}
    assert "weak* limit" in caplog.text


def test_mixed_solution_stays_mixed_after_one():
    state = solution_grid(1, SolutionVariant.mixed(), F(3, 2))
    assert not state.is_limit
    assert state.value(0, 0) == HALF


def test_state_mass_is_conserved():
    for t in checkpoint_times(1, SolutionVariant.trunc_asym(2)):
        state = solution_grid(1, SolutionVariant.trunc_asym(2), t)
        assert state.total_mass() == HALF


def test_non_checkpoint_time_rejected():
    with pytest.raises(AlignmentError):
        solution_grid(0, SolutionVariant.unmixing(), F(1, 4))


@pytest.mark.parametrize("variant,t,window", [
    (SolutionVariant.unmixing(), HALF, Window(F(0), F(0), F(1), F(1))),
    (SolutionVariant.unmixing(), HALF, Window(F(1, 2), F(1), F(3, 2), F(1))),
    (SolutionVariant.unmixing(), F(7, 8), Window(F(1, 4), F(0), F(3, 4), F(5, 4))),
    (SolutionVariant.trunc_asym(1), F(2), Window(F(0), F(1, 2), F(1), F(1, 2))),
])
def test_partial_window_matches_pointwise(variant, t, window):
    grid = solution_grid(0, variant, t, window=window)
    (o1, o2), shape = window.cells(grid.level)
    assert grid.origin == (o1, o2)
    assert grid.shape == shape
    side = grid.cell_side
    for i in range(o1, o1 + shape[0]):
        for j in range(o2, o2 + shape[1]):
            centre = ((i + HALF) * side, (j + HALF) * side)
            assert pointwise_density(0, variant, t, centre).value == grid.value(i, j)


def test_partial_window_agrees_with_full_period():
    full = solution_grid(1, SolutionVariant.trunc_sym(2), F(3, 2))
    part = solution_grid(1, SolutionVariant.trunc_sym(2), F(3, 2),
                         window=Window(F(1, 4), F(1, 2), F(1, 2), F(1, 4)))
    (o1, o2), (n1, n2) = part.origin, part.shape
    np.testing.assert_array_equal(part.values, full.values[o1:o1 + n1, o2:o2 + n2])


def test_window_off_the_cell_grid_rejected():
    with pytest.raises(AlignmentError):
        solution_grid(0, SolutionVariant.unmixing(), HALF,
                      window=Window(F(0), F(0), F(1, 8), F(1, 8)))
    with pytest.raises(AlignmentError):
        solution_grid(0, SolutionVariant.unmixing(), F(3, 4),
                      window=Window(F(1, 3), F(0), F(1), F(1)))


def test_depth_limit():
    with pytest.raises(ConstructionError):
        solution_grid(0, SolutionVariant.unmixing(), 1 - F(1, 2**6), max_depth=4)
    assert required_level(0, SolutionVariant.unmixing(), F(7, 8)) == 3
    assert required_level(2, SolutionVariant.unmixing(), 0) == 2


# ----------------------------------------------------------------------
# truncations
# ----------------------------------------------------------------------
@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_truncation_dichotomy(q):
    lam = 0
    sym = solution_grid(lam, SolutionVariant.trunc_sym(q), 2)
    asym = solution_grid(lam, SolutionVariant.trunc_asym(q), 2)
    assert grids_equal(sym, chessboard_grid(lam))
    assert is_block_checker(asym, lam + q + 2)
    assert l1_distance(sym, asym) == HALF


@pytest.mark.parametrize("lam,q", [(0, 1), (0, 2), (1, 2)])
def test_observation_O(lam, q):
    report = observation_O_check(lam, SolutionVariant.trunc_asym(q))
    assert report.passed
    assert [row.q_prime for row in report.rows] == list(range(1, q + 1))
    frame = report.to_frame()
    assert frame["passed"].all()
    assert set(frame["min_average"]) == {"1/2"}


def test_observation_O_needs_asymmetric_truncation():
    with pytest.raises(ConstructionError):
        observation_O_check(0, SolutionVariant.trunc_sym(2))


def test_weak_star_gap_against_dictionary():
    window = period_window(0)
    q = 2
    asym = solution_grid(0, SolutionVariant.trunc_asym(q), 2)
    mixed = CellGrid.constant(0, window, HALF, is_limit=True)
    assert weak_star_gap(asym, mixed, Dictionary(q + 1, window)) == 0
    assert weak_star_gap(asym, mixed, Dictionary(q + 2, window)) == HALF
    datum = chessboard_grid(0)
    assert weak_star_gap(datum, mixed, Dictionary(0, window)) == HALF
    assert Dictionary(2, window).levels == range(-1, 3)


# ----------------------------------------------------------------------
# pointwise densities
# ----------------------------------------------------------------------
def _centres(level, lam):
    side = F(1, 2**level)
    n = int(2 ** (1 - lam) / side)
    return [((i + HALF) * side, (j + HALF) * side) for i in range(n) for j in range(n)]


@pytest.mark.parametrize("variant,t", [
    (SolutionVariant.unmixing(), F(3, 4)),
    (SolutionVariant.unmixing(), F(5, 4)),
    (SolutionVariant.trunc_asym(1), F(2)),
    (SolutionVariant.trunc_sym(2), F(3, 2)),
])
def test_pointwise_density_matches_grid(variant, t):
    lam = 1
    grid = solution_grid(lam, variant, t)
    for x in _centres(grid.level, lam):
        i = int(x[0] / grid.cell_side)
        j = int(x[1] / grid.cell_side)
        assert pointwise_density(lam, variant, t, x).value == grid.value(i, j)


def test_density_points_matches_pointwise():
    lam, variant, t = 0, SolutionVariant.unmixing(), F(5, 4)
    pts = [x for x in _centres(4, lam)]
    values = density_points(lam, variant, t, np.array([[float(a), float(b)] for a, b in pts]))
    exact = [float(pointwise_density(lam, variant, t, x).value) for x in pts]
    np.testing.assert_array_equal(values, exact)


def test_densities_at_one():
    x = (F(1, 8), F(3, 8))
    limit = pointwise_density(0, SolutionVariant.unmixing(), 1, x)
    assert limit == (HALF, True)
    assert pointwise_density(0, SolutionVariant.mixed(), F(3, 2), x) == (HALF, False)
    pts = np.array([[0.1, 0.2], [1.3, 0.7]])
    np.testing.assert_array_equal(density_points(0, SolutionVariant.unmixing(), 1, pts), 0.5)
    np.testing.assert_array_equal(density_points(0, SolutionVariant.mixed(), 1.5, pts), 0.5)


def test_unmixing_density_reflects_after_one():
    pts = np.random.default_rng(8).uniform(0, 2, size=(500, 2))
    after = density_points(0, SolutionVariant.unmixing(), 1.375, pts)
    before = density_points(0, SolutionVariant.unmixing(), 0.625, pts)
    np.testing.assert_array_equal(after, before)

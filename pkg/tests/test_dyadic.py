"""
Dyadic 산술, 정사각형 족, CellGrid 테스트
"""
from fractions import Fraction

import numpy as np
import pytest

from transport_selection.errors import AlignmentError, ConstructionError
from transport_selection.dyadic import (
    CellGrid,
    DyadicRational,
    Family,
    SquareId,
    cell_average,
    chessboard,
    chessboard_grid,
    grids_equal,
    is_block_checker,
    l1_distance,
    period_window,
    square_of,
)
from transport_selection.dyadic.rationals import dyadic, log2_exact, pow2


# ----------------------------------------------------------------------
# rationals
# ----------------------------------------------------------------------
def test_dyadic_equality_ignores_representation():
    assert DyadicRational(2, 2) == DyadicRational(1, 1)
    assert hash(DyadicRational(2, 2)) == hash(Fraction(1, 2))
    assert dyadic(0.375) == Fraction(3, 8)


def test_dyadic_arithmetic_stays_exact():
    a = dyadic(Fraction(3, 4))
    b = dyadic(Fraction(1, 8))
    assert a + b == Fraction(7, 8)
    assert a - b == Fraction(5, 8)
    assert (a * b).value == Fraction(3, 32)
    assert a.scale(-3) == Fraction(3, 32)
    assert 1 - a == Fraction(1, 4)


@pytest.mark.parametrize("value", [Fraction(1, 3), Fraction(5, 6), "x"])
def test_non_dyadic_values_rejected(value):
    with pytest.raises(ConstructionError):
        dyadic(value)


def test_pow2_and_log2():
    assert pow2(-3) == Fraction(1, 8)
    assert pow2(4) == 16
    assert log2_exact(Fraction(1, 16)) == -4
    assert log2_exact(Fraction(8)) == 3
    assert log2_exact(Fraction(3, 4)) is None


# ----------------------------------------------------------------------
# lattice
# ----------------------------------------------------------------------
def test_chessboard_values():
    assert chessboard(0, (Fraction(1, 2), Fraction(1, 2))) == 0
    assert chessboard(0, (Fraction(3, 2), Fraction(1, 2))) == 1
    assert chessboard(1, (Fraction(1, 2), Fraction(0))) == 1
    # negative coordinates use the floor
    assert chessboard(0, (Fraction(-1, 2), Fraction(1, 2))) == 1


def test_chessboard_array_matches_exact():
    rng = np.random.default_rng(1)
    pts = rng.integers(-64, 64, size=(50, 2)) / 16 + 1 / 32
    values = chessboard(2, pts)
    exact = [chessboard(2, (Fraction(p[0]), Fraction(p[1]))) for p in pts]
    np.testing.assert_array_equal(values, exact)


def test_square_families():
    s1 = square_of((Fraction(3, 8), Fraction(1, 8)), 2)
    assert s1 == SquareId(2, (1, 0), Family.S1)
    s2 = square_of((Fraction(3, 8), Fraction(1, 8)), 2, Family.S2)
    assert s2.lower == (Fraction(3, 8), Fraction(1, 8))
    assert s2.contains((Fraction(3, 8), Fraction(1, 8)))
    assert s2.center == (Fraction(1, 2), Fraction(1, 4))


def test_cell_range_requires_whole_cells():
    square = SquareId(1, (0, 0), Family.S2)
    assert square.cell_range(3) == ((2, 6), (2, 6))
    with pytest.raises(ConstructionError):
        square.cell_range(1)


# ----------------------------------------------------------------------
# grids
# ----------------------------------------------------------------------
def test_period_window_cells():
    window = period_window(1)
    assert window.area == 1
    assert window.cells(3) == ((0, 0), (8, 8))
    with pytest.raises(AlignmentError):
        period_window(0).cells(-2)


def test_chessboard_grid_mass_is_half():
    for lam in range(3):
        grid = chessboard_grid(lam, lam + 2)
        assert grid.total_mass() == period_window(lam).area / 2


def test_refined_grid_equals_original():
    coarse = chessboard_grid(1)
    fine = coarse.refine(4)
    assert fine.level == 4
    assert grids_equal(coarse, fine)
    with pytest.raises(AlignmentError):
        fine.refine(2)


def test_chessboard_refinements_are_half_apart():
    a = chessboard_grid(0, 3, period_window(0))
    b = chessboard_grid(1, 3, period_window(0))
    assert l1_distance(a, b) == Fraction(1, 2)
    assert l1_distance(a, chessboard_grid(0, 3, period_window(0), complement=True)) == 1


def test_cell_average_is_exact():
    grid = chessboard_grid(2, 2, period_window(0))
    assert cell_average(grid, SquareId(1, (0, 0))) == Fraction(1, 2)
    assert cell_average(grid, SquareId(2, (0, 0))) == 0
    with pytest.raises(AlignmentError):
        cell_average(grid, SquareId(3, (0, 0)))


def test_block_checker_detection():
    assert is_block_checker(chessboard_grid(3, 3, period_window(0)), 3)
    assert not is_block_checker(chessboard_grid(2, 3, period_window(0)), 3)


def test_constant_grid_and_frame():
    grid = CellGrid.constant(0, period_window(0), Fraction(1, 2), is_limit=True)
    assert grid.is_limit
    assert grid.value(1, 1) == Fraction(1, 2)
    frame = grid.to_frame()
    assert list(frame.columns) == ["row", "col", "value"]
    assert set(frame["value"]) == {"1/2"}
    assert len(frame) == 4


def test_grids_on_different_windows_rejected():
    with pytest.raises(AlignmentError):
        l1_distance(chessboard_grid(0, 2), chessboard_grid(1, 2))

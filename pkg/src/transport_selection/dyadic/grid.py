"""
Piecewise-constant densities on dyadic windows.

Exact grids store integer numerators over a common denominator, so averages, masses
and distances come back as ``Fraction``. Float grids (finite-volume states) use the
same container with ``denominator == 1``.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import AlignmentError, ConstructionError
from .lattice import Family, SquareId
from .rationals import pow2

Number = Union[Fraction, float]


class Window(NamedTuple):
    """Axis-aligned rectangle [x0, x0 + width) x [y0, y0 + height)."""

    x0: Fraction
    y0: Fraction
    width: Fraction
    height: Fraction

    @property
    def area(self) -> Fraction:
        return self.width * self.height

    def cells(self, level: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Origin index and shape of the level-``level`` cells tiling the window."""
        scale = pow2(level)
        coords = [self.x0 * scale, self.y0 * scale, self.width * scale, self.height * scale]
        if any(c.denominator != 1 for c in coords):
            raise AlignmentError(f"window {self} is not aligned with level {level}")
        x0, y0, w, h = (int(c) for c in coords)
        return (x0, y0), (w, h)


def period_window(lam: int) -> Window:
    """One full period [0, 2^(1-λ))^2 of the chessboard and of u_λ."""
    side = pow2(1 - lam)
    return Window(Fraction(0), Fraction(0), side, side)


@dataclass(frozen=True)
class CellGrid:
    """
    Density constant on the level-``level`` cells of a window.

    Attributes:
        level: cell side is 2^-level
        origin: integer index of the lower-left cell
        values: array indexed [i1 - origin1, i2 - origin2] (axis 0 is x1)
        denominator: cell value = values / denominator
        is_limit: the grid stands for a weak* limit value rather than a pointwise state
    """

    level: int
    origin: Tuple[int, int]
    values: np.ndarray
    denominator: int = 1
    is_limit: bool = False

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ConstructionError(f"values must be 2-D. Got shape {self.values.shape}")
        if self.denominator < 1:
            raise ConstructionError(f"denominator must be positive. Got {self.denominator}")
        if self.is_exact and self.denominator != 1 and self.values.dtype.kind == "f":
            raise ConstructionError("float values cannot carry a denominator")
        if not self.is_exact and not np.all(np.isfinite(self.values)):
            raise ConstructionError("grid values must be finite")

    # ------------------------------------------------------------------
    @classmethod
    def constant(
        cls, level: int, window: Window, value: Fraction, is_limit: bool = False
    ) -> "CellGrid":
        origin, shape = window.cells(level)
        value = Fraction(value)
        values = np.full(shape, value.numerator, dtype=np.int64)
        return cls(level, origin, values, value.denominator, is_limit)

    @property
    def is_exact(self) -> bool:
        return self.values.dtype.kind in "iu"

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def cell_side(self) -> Fraction:
        return pow2(-self.level)

    @property
    def cell_area(self) -> Fraction:
        return self.cell_side**2

    @property
    def window(self) -> Window:
        s = self.cell_side
        return Window(self.origin[0] * s, self.origin[1] * s, self.shape[0] * s, self.shape[1] * s)

    def value(self, i1: int, i2: int) -> Number:
        v = self.values[i1 - self.origin[0], i2 - self.origin[1]]
        return Fraction(int(v), self.denominator) if self.is_exact else float(v)

    def as_float(self) -> np.ndarray:
        return self.values.astype(float) / self.denominator

    def refine(self, level: int) -> "CellGrid":
        """Same density on a finer grid (each cell split into 4^(level - self.level))."""
        if level < self.level:
            raise AlignmentError(f"cannot refine level {self.level} grid to coarser level {level}")
        if level == self.level:
            return self
        m = 1 << (level - self.level)
        values = np.repeat(np.repeat(self.values, m, axis=0), m, axis=1)
        origin = (self.origin[0] * m, self.origin[1] * m)
        return CellGrid(level, origin, values, self.denominator, self.is_limit)

    def total_mass(self) -> Number:
        if self.is_exact:
            return Fraction(int(self.values.sum()), self.denominator) * self.cell_area
        return float(self.values.sum()) * float(self.cell_area)

    def to_frame(self) -> pd.DataFrame:
        """(row, col, value) table; row is the x1 cell index, col the x2 cell index."""
        n1, n2 = self.shape
        rows, cols = np.meshgrid(
            np.arange(n1) + self.origin[0], np.arange(n2) + self.origin[1], indexing="ij"
        )
        if self.is_exact:
            num = self.values.ravel()
            value = [str(Fraction(int(v), self.denominator)) for v in num]
        else:
            value = self.values.ravel()
        return pd.DataFrame({"row": rows.ravel(), "col": cols.ravel(), "value": value})


# ----------------------------------------------------------------------
def cell_average(grid: CellGrid, square: SquareId) -> Number:
    """
    Exact mean of ``grid`` over ``square``.

    Raises:
        AlignmentError: square is not a union of whole grid cells, or leaves the window
    """
    try:
        (i0, i1), (j0, j1) = square.cell_range(grid.level)
    except ConstructionError as exc:
        raise AlignmentError(str(exc)) from exc
    a0, b0 = i0 - grid.origin[0], j0 - grid.origin[1]
    a1, b1 = i1 - grid.origin[0], j1 - grid.origin[1]
    n1, n2 = grid.shape
    if a0 < 0 or b0 < 0 or a1 > n1 or b1 > n2:
        raise AlignmentError(f"square {square} leaves the grid window {grid.window}")
    block = grid.values[a0:a1, b0:b1]
    count = block.size
    if grid.is_exact:
        return Fraction(int(block.sum()), count * grid.denominator)
    return float(block.mean())


def _common(g1: CellGrid, g2: CellGrid) -> Tuple[CellGrid, CellGrid]:
    level = max(g1.level, g2.level)
    r1, r2 = g1.refine(level), g2.refine(level)
    if r1.origin != r2.origin or r1.shape != r2.shape:
        raise AlignmentError(f"grids cover different windows: {g1.window} vs {g2.window}")
    return r1, r2


def l1_distance(g1: CellGrid, g2: CellGrid) -> Number:
    """L1 distance per unit area after refinement to the common level."""
    r1, r2 = _common(g1, g2)
    if r1.is_exact and r2.is_exact:
        diff = np.abs(r1.values * r2.denominator - r2.values * r1.denominator)
        return Fraction(int(diff.sum()), r1.denominator * r2.denominator * diff.size)
    return float(np.mean(np.abs(r1.as_float() - r2.as_float())))


def grids_equal(g1: CellGrid, g2: CellGrid) -> bool:
    """Exact cell-for-cell equality of the densities (levels may differ)."""
    r1, r2 = _common(g1, g2)
    return bool(np.array_equal(r1.values * r2.denominator, r2.values * r1.denominator))


def chessboard_grid(
    lam: int, level: Optional[int] = None, window: Optional[Window] = None, complement: bool = False
) -> CellGrid:
    """ζ̄_λ sampled exactly on level-``level`` cells of ``window`` (default: one period)."""
    level = lam if level is None else level
    if level < lam:
        raise AlignmentError(f"chessboard of level {lam} is not constant on level-{level} cells")
    window = period_window(lam) if window is None else window
    (o1, o2), (n1, n2) = window.cells(level)
    shift = level - lam
    i = (np.arange(n1, dtype=np.int64) + o1) >> shift
    j = (np.arange(n2, dtype=np.int64) + o2) >> shift
    values = np.mod(i[:, None] + j[None, :], 2)
    if complement:
        values = 1 - values
    return CellGrid(level, (o1, o2), values.astype(np.int64))


def is_block_checker(grid: CellGrid, level: int) -> bool:
    """
    True when every aligned 2x2 block of level-``level`` cells holds one of the two
    checker patterns (so every coarser aligned square averages exactly 1/2).
    """
    fine = grid.refine(level)
    if not fine.is_exact:
        return False
    if fine.origin[0] % 2 or fine.origin[1] % 2 or fine.shape[0] % 2 or fine.shape[1] % 2:
        raise AlignmentError("window is not aligned with 2x2 blocks")
    v = fine.values * 1
    a, b = v[0::2, 0::2], v[1::2, 0::2]
    c, d = v[0::2, 1::2], v[1::2, 1::2]
    den = fine.denominator
    binary = np.isin(v, (0, den)).all()
    return bool(binary and np.all(a == d) and np.all(b == c) and np.all(a + b == den))


def dictionary_squares(window: Window, levels) -> list:
    """All S1 squares of the given levels tiling ``window`` (row-major, coarse first)."""
    squares = []
    for level in levels:
        (o1, o2), (n1, n2) = window.cells(level)
        for i in range(o1, o1 + n1):
            for j in range(o2, o2 + n2):
                squares.append(SquareId(level, (i, j), Family.S1))
    return squares

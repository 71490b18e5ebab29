"""
Dyadic lattices, the two square families and the chessboard datum.

Cells are lower-closed and upper-open: a point on a grid line belongs to the cell on
its upper-right, which matches the floor in the chessboard formula.
"""
from enum import Enum
from fractions import Fraction
import math
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np

from ..errors import ConstructionError
from .rationals import exact_point, pow2


class Family(Enum):
    """
    S1: axis-aligned squares with vertices in 2^-j Z^2
    S2: the same squares shifted by half a side in both directions
    """

    S1 = "S1"
    S2 = "S2"


class SquareId(NamedTuple):
    """Square of side 2^-level in family S1 or S2."""

    level: int
    index: Tuple[int, int]
    family: Family = Family.S1

    @property
    def side(self) -> Fraction:
        return pow2(-self.level)

    @property
    def lower(self) -> Tuple[Fraction, Fraction]:
        """Lower-left corner."""
        shift = Fraction(1, 2) if self.family is Family.S2 else Fraction(0)
        s = self.side
        return (self.index[0] + shift) * s, (self.index[1] + shift) * s

    @property
    def center(self) -> Tuple[Fraction, Fraction]:
        x0, y0 = self.lower
        half = self.side / 2
        return x0 + half, y0 + half

    @property
    def area(self) -> Fraction:
        return self.side * self.side

    def contains(self, x: Sequence) -> bool:
        x0, y0 = self.lower
        s = self.side
        return x0 <= x[0] < x0 + s and y0 <= x[1] < y0 + s

    def cell_range(self, grid_level: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """
        Index ranges [i0, i1) x [j0, j1) of the level-``grid_level`` cells tiling the square.

        Raises:
            ConstructionError: if the square is not a union of whole cells
        """
        offset = 1 if self.family is Family.S2 else 0
        if grid_level < self.level + offset:
            raise ConstructionError(
                f"square {self} is not a union of level-{grid_level} cells"
            )
        m = 1 << (grid_level - self.level)
        half = m // 2 if self.family is Family.S2 else 0
        i0 = self.index[0] * m + half
        j0 = self.index[1] * m + half
        return (i0, i0 + m), (j0, j0 + m)


Point = Union[Sequence, np.ndarray]


def chessboard(lam: int, x: Point):
    """
    ζ̄_λ(x) = floor(2^λ x1) + floor(2^λ x2)  (mod 2)

    Exact coordinates give an int in {0, 1}. Arrays of shape (..., 2) give an int array.
    """
    if lam < 0:
        raise ConstructionError(f"lambda must be non-negative. Got {lam}")
    if isinstance(x, np.ndarray):
        scaled = np.floor(np.asarray(x, dtype=float) * 2.0**lam).astype(np.int64)
        return np.mod(scaled[..., 0] + scaled[..., 1], 2)
    xe = exact_point(x)
    if xe is None:
        scale = 2.0**lam
        return (math.floor(float(x[0]) * scale) + math.floor(float(x[1]) * scale)) % 2
    scale = pow2(lam)
    # Python's % already maps negative sums into {0, 1}
    return (math.floor(xe[0] * scale) + math.floor(xe[1] * scale)) % 2


def square_of(x: Sequence, level: int, family: Family = Family.S1) -> SquareId:
    """Square of the requested family and level containing ``x`` (lower-closed)."""
    xe = exact_point(x)
    coords = xe if xe is not None else (Fraction(float(x[0])), Fraction(float(x[1])))
    scale = pow2(level)
    shift = Fraction(1, 2) if family is Family.S2 else Fraction(0)
    index = (math.floor(coords[0] * scale - shift), math.floor(coords[1] * scale - shift))
    return SquareId(level=level, index=index, family=family)

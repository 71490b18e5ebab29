"""
Exact density evolution at checkpoint times.

At the end of a full stage k the exact flow rotates every filled S2 square of side
2^-(λ+k) rigidly by a quarter turn and fixes the empty ones.  On cells of side
2^-L (L > λ + k) that is a permutation of cells, so the chessboard datum can be evolved
exactly with array rotations:

    roll by half a square -> view as blocks -> rot90 the filled blocks -> roll back
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
import logging
import math
from typing import Iterable, List, NamedTuple, Optional

import numpy as np
import pandas as pd

from ..errors import AlignmentError, ConstructionError
from ..dyadic.grid import (
    CellGrid,
    Window,
    cell_average,
    chessboard_grid,
    dictionary_squares,
    period_window,
)
from ..dyadic.lattice import Family, SquareId, chessboard
from ..dyadic.rationals import exact_point, pow2
from ..fields.building_blocks import HALF, Segment, as_fraction, check_time, stage_schedule
from ..fields.types import FieldSpec, Orientation, as_points
from ..flow.exact import flow_between, flow_points

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 8


class SolutionKind(Enum):
    UNMIXING = "unmixing"      # ζ_λ
    MIXED = "mixed"            # ζ̃_λ
    TRUNC_SYM = "trunc_sym"    # ζ_λ^q
    TRUNC_ASYM = "trunc_asym"  # ζ̃_λ^q


class SolutionVariant(NamedTuple):
    """Which of the four exact solutions; ``q`` only for the truncated ones."""

    kind: SolutionKind
    q: Optional[int] = None

    @classmethod
    def unmixing(cls) -> "SolutionVariant":
        return cls(SolutionKind.UNMIXING)

    @classmethod
    def mixed(cls) -> "SolutionVariant":
        return cls(SolutionKind.MIXED)

    @classmethod
    def trunc_sym(cls, q: int) -> "SolutionVariant":
        return cls(SolutionKind.TRUNC_SYM, q)

    @classmethod
    def trunc_asym(cls, q: int) -> "SolutionVariant":
        return cls(SolutionKind.TRUNC_ASYM, q)

    @classmethod
    def parse(cls, text: str) -> "SolutionVariant":
        """'unmixing', 'mixed', 'trunc_sym:2', 'trunc_asym:3'."""
        name, _, q = str(text).strip().lower().partition(":")
        try:
            kind = SolutionKind(name)
        except ValueError as exc:
            raise ConstructionError(f"unknown solution variant {text!r}") from exc
        return cls(kind, int(q) if q else None).validated()

    def validated(self) -> "SolutionVariant":
        truncated = self.kind in (SolutionKind.TRUNC_SYM, SolutionKind.TRUNC_ASYM)
        if truncated and (self.q is None or self.q < 1):
            raise ConstructionError(f"{self.kind.value} needs q >= 1. Got {self.q}")
        if not truncated and self.q is not None:
            raise ConstructionError(f"{self.kind.value} takes no q")
        return self

    @property
    def label(self) -> str:
        return self.kind.value if self.q is None else f"{self.kind.value}:{self.q}"

    def field_spec(self, lam: int, reflection_sign: int = -1,
                   orientation: Orientation = Orientation.CCW) -> FieldSpec:
        """The exact field transporting this solution."""
        self.validated()
        flags = dict(reflection_sign=reflection_sign, orientation=orientation)
        if self.kind is SolutionKind.TRUNC_SYM:
            return FieldSpec.trunc_sym(lam, self.q, **flags)
        if self.kind is SolutionKind.TRUNC_ASYM:
            return FieldSpec.trunc_asym(lam, self.q, **flags)
        return FieldSpec.building_block(lam, **flags)


class PointDensity(NamedTuple):
    value: Fraction
    is_limit: bool = False


# ----------------------------------------------------------------------
# stage programs
# ----------------------------------------------------------------------
class _Program(NamedTuple):
    segments: List[Segment]
    constant: Optional[Fraction]  # the state is this constant (weak* limit or mixed state)
    is_limit: bool


def _program(lam: int, variant: SolutionVariant, t, reflection_sign: int,
             orientation: Orientation) -> _Program:
    """Full stages the exact flow runs from 0 to t, or the constant state."""
    check_time(t)
    t = as_fraction(t)
    variant.validated()
    spec = variant.field_spec(lam, reflection_sign, orientation)
    if variant.kind in (SolutionKind.UNMIXING, SolutionKind.MIXED):
        if t == 1 or (t > 1 and variant.kind is SolutionKind.MIXED):
            return _Program([], HALF, variant.kind is SolutionKind.UNMIXING)
        if t > 1:
            t = 2 - t
    segments = stage_schedule(spec, 0, t)
    for seg in segments:
        if seg.duration != seg.stage.duration:
            raise AlignmentError(
                f"t = {t} ends inside stage {seg.stage.k} ({seg.stage.side.value}); "
                "use pointwise_density for non-checkpoint times"
            )
    return _Program(segments, None, False)


def _rotate_filled(values: np.ndarray, origin, level: int, square_level: int,
                   turns: int) -> np.ndarray:
    """Quarter-turn every filled S2 square of side 2^-square_level, ``turns`` ∈ {1, -1}."""
    m = 1 << (level - square_level)
    if m < 2:
        raise AlignmentError(f"level {level} cannot resolve S2 squares of level {square_level}")
    half = m // 2
    n1, n2 = values.shape
    # np.roll wraps, so the array must span whole periods of the S2 parity pattern
    if origin[0] % (2 * m) or origin[1] % (2 * m) or n1 % (2 * m) or n2 % (2 * m):
        raise AlignmentError("window does not consist of whole periods")
    rolled = np.roll(values, (half, half), axis=(0, 1))
    blocks = rolled.reshape(n1 // m, m, n2 // m, m).transpose(0, 2, 1, 3).copy()
    p = np.arange(n1 // m) + origin[0] // m
    r = np.arange(n2 // m) + origin[1] // m
    filled = np.mod(p[:, None] + r[None, :], 2) == 0
    # axis 2 is x1, axis 3 is x2: k = +1 pushes the density forward under a CCW turn
    blocks[filled] = np.rot90(blocks[filled], k=turns, axes=(1, 2))
    back = blocks.transpose(0, 2, 1, 3).reshape(n1, n2)
    return np.roll(back, (-half, -half), axis=(0, 1))


def required_level(lam: int, variant: SolutionVariant, t, reflection_sign: int = -1,
                   orientation: Orientation = Orientation.CCW) -> int:
    """Finest cell level the state at t needs: λ + (deepest stage) + 1, or λ."""
    prog = _program(lam, variant, t, reflection_sign, Orientation.parse(orientation))
    if not prog.segments:
        return lam
    return lam + max(seg.stage.k for seg in prog.segments) + 1


def solution_grid(
    lam: int,
    variant: SolutionVariant,
    t,
    level: Optional[int] = None,
    window: Optional[Window] = None,
    reflection_sign: int = -1,
    orientation: Orientation = Orientation.CCW,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> CellGrid:
    """
    Exact state of ``variant`` at the checkpoint time ``t``.

    Args:
        lam: scale λ
        variant: which solution
        t: checkpoint time (stage boundary, or any time where the state is frozen)
        level: output cell level; defaults to the finest level the state needs
        window: window aligned with the working cell level; defaults to one period
        reflection_sign, orientation: construction flags of the transporting field
        max_depth: deepest stage the engine will resolve

    Raises:
        AlignmentError: t ends inside a live stage, or the window is not aligned with the cells
        ConstructionError: the state needs more than ``max_depth`` stages
    """
    orientation = Orientation.parse(orientation)
    prog = _program(lam, variant, t, reflection_sign, orientation)
    window = period_window(lam) if window is None else window
    if prog.constant is not None:
        if prog.is_limit:
            logger.warning("%s at t = 1 has no pointwise state; returning its weak* limit 1/2",
                           variant.label)
        return CellGrid.constant(lam if level is None else level, window, prog.constant,
                                 prog.is_limit)
    deepest = max((seg.stage.k for seg in prog.segments), default=-1)
    if deepest + 1 > max_depth:
        raise ConstructionError(f"state at t = {t} needs {deepest + 1} stages > max_depth "
                                f"{max_depth}")
    needed = lam + deepest + 1
    out_level = needed if level is None else level
    work_level = max(needed, out_level)
    window.cells(work_level)
    cover = _period_cover(lam, window)
    grid = chessboard_grid(lam, work_level, cover)
    values = grid.values.copy()
    for seg in prog.segments:
        turns = seg.sign * orientation.value
        values = _rotate_filled(values, grid.origin, work_level, lam + seg.stage.k, turns)
    logger.debug("%s at t = %s: %d stage rotations on %s cells", variant.label, t,
                 len(prog.segments), values.shape)
    state = CellGrid(work_level, grid.origin, values)
    if cover != window:
        state = _crop(state, window)
    if out_level < work_level:
        return _coarsen(state, out_level)
    return state


def _period_cover(lam: int, window: Window) -> Window:
    """Smallest window of whole periods [0, 2^(1-λ))² translates containing ``window``."""
    side = pow2(1 - lam)
    x0 = math.floor(window.x0 / side) * side
    y0 = math.floor(window.y0 / side) * side
    x1 = math.ceil((window.x0 + window.width) / side) * side
    y1 = math.ceil((window.y0 + window.height) / side) * side
    return Window(Fraction(x0), Fraction(y0), Fraction(x1 - x0), Fraction(y1 - y0))


def _crop(grid: CellGrid, window: Window) -> CellGrid:
    (o1, o2), (n1, n2) = window.cells(grid.level)
    i, j = o1 - grid.origin[0], o2 - grid.origin[1]
    values = grid.values[i:i + n1, j:j + n2].copy()
    return CellGrid(grid.level, (o1, o2), values, grid.denominator, grid.is_limit)


def _coarsen(grid: CellGrid, level: int) -> CellGrid:
    m = 1 << (grid.level - level)
    n1, n2 = grid.shape
    if grid.origin[0] % m or grid.origin[1] % m or n1 % m or n2 % m:
        raise AlignmentError(f"window is not aligned with level {level}")
    blocks = grid.values.reshape(n1 // m, m, n2 // m, m)
    first = blocks[:, :1, :, :1]
    if not np.all(blocks == first):
        raise AlignmentError(f"state is not constant on level-{level} cells")
    origin = (grid.origin[0] // m, grid.origin[1] // m)
    return CellGrid(level, origin, first[:, 0, :, 0].copy(), grid.denominator, grid.is_limit)


def checkpoint_times(lam: int, variant: SolutionVariant, depth: int = 4) -> List[Fraction]:
    """0, 1 - 2^-k (k = 1..depth), 1, 1 + 2^-k (k = depth..1), 2."""
    variant.validated()
    forward = [1 - pow2(-k) for k in range(1, depth + 1)]
    backward = [1 + pow2(-k) for k in range(depth, 0, -1)]
    return [Fraction(0)] + forward + [Fraction(1)] + backward + [Fraction(2)]


# ----------------------------------------------------------------------
# pointwise densities
# ----------------------------------------------------------------------
def _flow_time(variant: SolutionVariant, t: Fraction):
    if variant.kind in (SolutionKind.UNMIXING, SolutionKind.MIXED) and t > 1:
        return 2 - t
    return t


def pointwise_density(lam: int, variant: SolutionVariant, t, x, reflection_sign: int = -1,
                      orientation: Orientation = Orientation.CCW) -> PointDensity:
    """
    ζ(t, x) = ζ̄_λ(X^{-1}(t, x)) through the closed-form flow.

    Unmixing at t = 1 returns the limit value 1/2 flagged with ``is_limit``.
    """
    check_time(t)
    variant.validated()
    tf = as_fraction(t)
    if variant.kind in (SolutionKind.UNMIXING, SolutionKind.MIXED) and tf >= 1:
        if variant.kind is SolutionKind.MIXED:
            return PointDensity(HALF)
        if tf == 1:
            logger.warning("unmixing solution at t = 1: returning the weak* limit 1/2")
            return PointDensity(HALF, True)
    spec = variant.field_spec(lam, reflection_sign, orientation)
    ft = _flow_time(variant, tf)
    exact = exact_point(x) is not None and not isinstance(x, np.ndarray)
    origin = flow_between(spec, ft if exact else float(ft), 0, x)
    return PointDensity(Fraction(int(chessboard(lam, origin))))


def density_points(lam: int, variant: SolutionVariant, t, points, reflection_sign: int = -1,
                   orientation: Orientation = Orientation.CCW) -> np.ndarray:
    """Vectorised float version of pointwise_density for (N, 2) points."""
    check_time(t)
    variant.validated()
    pts, _ = as_points(points)
    tf = as_fraction(t)
    if (variant.kind is SolutionKind.MIXED and tf >= 1) or (
        variant.kind is SolutionKind.UNMIXING and tf == 1
    ):
        return np.full(pts.shape[0], 0.5)
    spec = variant.field_spec(lam, reflection_sign, orientation)
    origin = flow_points(spec, float(_flow_time(variant, tf)), 0.0, pts)
    return chessboard(lam, origin).astype(float)


# ----------------------------------------------------------------------
# observation (O) and the weak* gap
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ObservationRow:
    q_prime: int
    time: Fraction
    square_level: int
    squares: int
    min_average: Fraction
    max_average: Fraction

    @property
    def passed(self) -> bool:
        return self.min_average == HALF and self.max_average == HALF


@dataclass
class ObservationReport:
    lam: int
    q: int
    rows: List[ObservationRow]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame.from_records(
            [
                {
                    "lam": self.lam, "q": self.q, "q_prime": r.q_prime, "time": str(r.time),
                    "square_level": r.square_level, "squares": r.squares,
                    "min_average": str(r.min_average), "max_average": str(r.max_average),
                    "passed": r.passed,
                }
                for r in self.rows
            ]
        )


def observation_O_check(lam: int, variant: SolutionVariant,
                        levels: Optional[Iterable[int]] = None,
                        window: Optional[Window] = None, **flags) -> ObservationReport:
    """
    Cell averages of the asymmetric truncated solution at t = 1 + 2^-q' over every S1
    square of side 2^-(λ+q') in the window, for q' in ``levels`` (default 1..q).

    Raises:
        ConstructionError: variant is not the asymmetric truncation
    """
    if variant.kind is not SolutionKind.TRUNC_ASYM:
        raise ConstructionError(f"observation (O) concerns trunc_asym. Got {variant.label}")
    q = variant.validated().q
    assert q is not None
    window = period_window(lam) if window is None else window
    rows = []
    for qp in (range(1, q + 1) if levels is None else levels):
        time = 1 + pow2(-qp)
        grid = solution_grid(lam, variant, time, window=window, **flags)
        square_level = lam + qp
        (o1, o2), (n1, n2) = window.cells(square_level)
        averages = [
            cell_average(grid, SquareId(square_level, (i, j), Family.S1))
            for i in range(o1, o1 + n1)
            for j in range(o2, o2 + n2)
        ]
        rows.append(ObservationRow(qp, time, square_level, len(averages), min(averages),
                                   max(averages)))
    report = ObservationReport(lam, q, rows)
    logger.info("observation (O) for lambda=%d q=%d: %s", lam, q,
                "passed" if report.passed else "failed")
    return report


@dataclass(frozen=True)
class Dictionary:
    """Indicators of S1 squares of levels min_level..max_level tiling ``window``."""

    max_level: int
    window: Window
    min_level: Optional[int] = None

    @property
    def levels(self) -> range:
        lowest = self.min_level
        if lowest is None:
            lowest = self.max_level
            while True:
                try:
                    self.window.cells(lowest - 1)
                except AlignmentError:
                    break
                lowest -= 1
        return range(lowest, self.max_level + 1)

    def squares(self) -> List[SquareId]:
        return dictionary_squares(self.window, self.levels)


def _block_sums(diff: np.ndarray, diff_level: int, level: int):
    m = 1 << (diff_level - level)
    n1, n2 = diff.shape
    return diff.reshape(n1 // m, m, n2 // m, m).sum(axis=(1, 3)), m * m


def weak_star_gap(g1: CellGrid, g2: CellGrid, dictionary: Dictionary):
    """
    max over dictionary squares S of |mean_S g1 - mean_S g2|, exactly for exact grids.

    Raises:
        AlignmentError: the dictionary window is not covered by both grids
    """
    level = max(g1.level, g2.level, dictionary.max_level)
    r1, r2 = g1.refine(level), g2.refine(level)
    if r1.origin != r2.origin or r1.shape != r2.shape:
        raise AlignmentError(f"grids cover different windows: {g1.window} vs {g2.window}")
    (o1, o2), (n1, n2) = dictionary.window.cells(level)
    a, b = o1 - r1.origin[0], o2 - r1.origin[1]
    if a < 0 or b < 0 or a + n1 > r1.shape[0] or b + n2 > r1.shape[1]:
        raise AlignmentError(f"dictionary window {dictionary.window} leaves the grid window")
    if r1.is_exact and r2.is_exact:
        diff = (r1.values * r2.denominator - r2.values * r1.denominator)[a:a + n1, b:b + n2]
        den = r1.denominator * r2.denominator
        gaps = []
        for j in dictionary.levels:
            sums, count = _block_sums(diff, level, j)
            gaps.append(Fraction(int(np.abs(sums).max()), count * den))
        return max(gaps)
    diff = (r1.as_float() - r2.as_float())[a:a + n1, b:b + n2]
    gaps = []
    for j in dictionary.levels:
        sums, count = _block_sums(diff, level, j)
        gaps.append(float(np.abs(sums).max()) / count)
    return max(gaps)

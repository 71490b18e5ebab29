"""
Dyadic geometry

정확한 dyadic 산술과 격자:
- DyadicRational 및 정확한 좌표 처리
- S1 / S2 정사각형 족, chessboard 초기 데이터
- CellGrid: dyadic window 위의 조각별 상수 밀도
"""

from .rationals import (
    DyadicRational,
    DyadicPoint,
    Scalar,
    dyadic,
    dyadic_point,
    exact_point,
    is_exact,
    log2_exact,
    pow2,
    restore_point,
    to_fraction,
)

from .lattice import (
    Family,
    SquareId,
    chessboard,
    square_of,
)

from .grid import (
    CellGrid,
    Window,
    cell_average,
    chessboard_grid,
    dictionary_squares,
    grids_equal,
    is_block_checker,
    l1_distance,
    period_window,
)

__all__ = [
    # Exact arithmetic
    'DyadicRational',
    'DyadicPoint',
    'Scalar',
    'dyadic',
    'dyadic_point',
    'exact_point',
    'is_exact',
    'log2_exact',
    'pow2',
    'restore_point',
    'to_fraction',

    # Lattices
    'Family',
    'SquareId',
    'chessboard',
    'square_of',

    # Grids
    'CellGrid',
    'Window',
    'cell_average',
    'chessboard_grid',
    'dictionary_squares',
    'grids_equal',
    'is_block_checker',
    'l1_distance',
    'period_window',
]

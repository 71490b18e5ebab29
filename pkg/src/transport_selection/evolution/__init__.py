"""
Evolution

체크포인트 시각의 정확한 밀도 진화:
- 블록 회전 엔진 (unmixing, mixed, 대칭/비대칭 truncation)
- 점별 밀도, observation (O), dictionary 기반 weak* 간격
"""

from .cells import (
    Dictionary,
    ObservationReport,
    ObservationRow,
    PointDensity,
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

__all__ = [
    'Dictionary',
    'ObservationReport',
    'ObservationRow',
    'PointDensity',
    'SolutionKind',
    'SolutionVariant',
    'checkpoint_times',
    'density_points',
    'observation_O_check',
    'pointwise_density',
    'required_level',
    'solution_grid',
    'weak_star_gap',
]

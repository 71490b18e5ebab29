"""
Flow

흐름 계산:
- exact: v, u_λ, b_λ 와 truncation 의 닫힌 형태 흐름 (dyadic 정확 연산)
- smooth: 섭동 w 의 RK4 흐름과 Jacobian, 추정 검사
"""

from .exact import (
    FlowQuery,
    PerimeterPosition,
    flow_between,
    flow_field,
    flow_points,
    flow_v,
    from_perimeter,
    inverse_flow,
    perimeter_position,
    stage_map,
)

from .smooth import (
    EstimateReport,
    EstimateRow,
    FlowResult,
    estimate_checks,
    flow_w,
    flow_w_between,
    inverse_flow_w,
    pushforward_density_range,
)

__all__ = [
    # Exact flows
    'FlowQuery',
    'PerimeterPosition',
    'flow_between',
    'flow_field',
    'flow_points',
    'flow_v',
    'from_perimeter',
    'inverse_flow',
    'perimeter_position',
    'stage_map',

    # Smooth flows
    'EstimateReport',
    'EstimateRow',
    'FlowResult',
    'estimate_checks',
    'flow_w',
    'flow_w_between',
    'inverse_flow_w',
    'pushforward_density_range',
]

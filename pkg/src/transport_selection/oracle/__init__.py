"""
Oracle

주 계산과 독립적인 교차 검증:
- 주기 창 위의 1차 upwind 유한체적 솔버
- 약해(weak solution) 잔차와 부호 진단
"""

from .finite_volume import (
    FVState,
    exact_stream,
    face_velocities,
    fv_advance,
    fv_concordance,
    fv_snapshots,
    stage_breakpoints,
    stream_face_velocities,
)

from .weak_form import (
    EulerianSeries,
    PushForwardSeries,
    residual_battery,
    residual_table,
    sign_bump,
    snapshot_density,
    time_nodes,
    unmixing_series,
    weak_residual,
)

__all__ = [
    # Finite volume
    'FVState',
    'exact_stream',
    'face_velocities',
    'fv_advance',
    'fv_concordance',
    'fv_snapshots',
    'stage_breakpoints',
    'stream_face_velocities',

    # Weak form
    'EulerianSeries',
    'PushForwardSeries',
    'residual_battery',
    'residual_table',
    'sign_bump',
    'snapshot_density',
    'time_nodes',
    'unmixing_series',
    'weak_residual',
]

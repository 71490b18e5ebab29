"""
Fields

벡터장 정의:
- building block v, 주기화 u_λ, 시간 단계 b_λ, truncation
- smooth perturbation w 와 time mollification
- total variation 추정
"""

from .types import (
    FieldSpec,
    Orientation,
    Side,
    StageIndex,
    Variant,
)

from .building_blocks import (
    Segment,
    eval_b,
    eval_exact,
    eval_field,
    eval_trunc,
    eval_u,
    eval_v,
    sampler_for,
    stage_at,
    stage_schedule,
    stream_function,
    sup_norm,
    weak_divergence,
)

from .smooth import (
    SmoothFieldDef,
    builtin_field,
    time_mollify,
    zero_field,
)

from .bumps import SpaceBump, SpaceTimeBump

from .total_variation import tv_estimate

__all__ = [
    # Types
    'FieldSpec',
    'Orientation',
    'Side',
    'StageIndex',
    'Variant',

    # Exact fields
    'Segment',
    'eval_b',
    'eval_exact',
    'eval_field',
    'eval_trunc',
    'eval_u',
    'eval_v',
    'sampler_for',
    'stage_at',
    'stage_schedule',
    'stream_function',
    'sup_norm',
    'weak_divergence',

    # Smooth fields
    'SmoothFieldDef',
    'builtin_field',
    'time_mollify',
    'zero_field',

    # Test functions
    'SpaceBump',
    'SpaceTimeBump',

    # Total variation
    'tv_estimate',
]

"""
Transport

섭동된 벡터장과 push-forward 해:
- b_{λ,w} 평가, 합성 흐름, 조립된 벡터장의 직접 적분
- ρ_{λ,w} 계열의 pairing 과 밀도, 초기값 ρ̄
- L^p 거리, TV 유계성, 압축성 인증
"""

from .perturbed import (
    composed_flow,
    composed_flow_between,
    eval_perturbed_field,
    exact_part_vanishes,
    integrate_assembled,
)

from .solutions import (
    InitialDatum,
    PairingFunction,
    PerturbedSolution,
    TransportedIndicator,
    density_eval,
    pairing,
)

from .estimates import (
    CompressibilityReport,
    CompressibilityRow,
    LpDistance,
    LpDistanceQuadrature,
    TVReport,
    composed_vs_direct,
    compressibility_certificate,
    lp_distance_to_w,
    lp_distance_zero_w,
    periodic_box,
    tv_boundedness_check,
    tv_bound,
    unboundedness_diagnostic,
)

__all__ = [
    # Perturbed fields and flows
    'composed_flow',
    'composed_flow_between',
    'eval_perturbed_field',
    'exact_part_vanishes',
    'integrate_assembled',

    # Solutions
    'InitialDatum',
    'PairingFunction',
    'PerturbedSolution',
    'TransportedIndicator',
    'density_eval',
    'pairing',

    # Estimates
    'CompressibilityReport',
    'CompressibilityRow',
    'LpDistance',
    'LpDistanceQuadrature',
    'TVReport',
    'composed_vs_direct',
    'compressibility_certificate',
    'lp_distance_to_w',
    'lp_distance_zero_w',
    'periodic_box',
    'tv_boundedness_check',
    'tv_bound',
    'unboundedness_diagnostic',
]

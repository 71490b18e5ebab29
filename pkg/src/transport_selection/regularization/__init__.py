"""
Regularization

매끄러운 근사와 선택 규칙:
- 흐름 함수의 공간 mollification, 시간 mollification
- 조립된 벡터장 b^{q,k}, 흐름 Z / Y, 정규화된 해 ρ^{q,k}
- k_q 선택 규칙과 두 극한의 수렴 시연
"""

from .regularized import (
    MollifiedField,
    RegularizedSolution,
    StageStream,
    anchor_compressibility,
    anchor_envelope,
    assemble_regularized,
    flow_Y,
    flow_Z,
    mollified_field,
    mollify_space,
    solve_regularized,
)

from .selection import (
    DemoReport,
    LadderRow,
    SelectionResult,
    default_dictionary,
    refined_mesh,
    select_k,
    selection_mesh,
    theorem_demo,
    verify,
)

__all__ = [
    # Mollified fields and flows
    'MollifiedField',
    'StageStream',
    'assemble_regularized',
    'flow_Y',
    'flow_Z',
    'mollified_field',
    'mollify_space',

    # Solutions
    'RegularizedSolution',
    'anchor_compressibility',
    'anchor_envelope',
    'solve_regularized',

    # Selection
    'DemoReport',
    'LadderRow',
    'SelectionResult',
    'default_dictionary',
    'refined_mesh',
    'select_k',
    'selection_mesh',
    'theorem_demo',
    'verify',
]

from .utils import (
    WrapToWindow,
    gauss_nodes,
    midpoint_grid,
    rk4_step,
    split_times,
    tensor_gauss,
)

__all__ = [
    'WrapToWindow',
    'gauss_nodes',
    'midpoint_grid',
    'rk4_step',
    'split_times',
    'tensor_gauss',
]

"""
Mollifier kernels

η(u)  = c_1 exp(-1/(1 - u²)) on (-1, 1),       η^k(t) = k η(k t)
θ(x)  = c_2 exp(-1/(1 - |x|²)) on the unit disk, θ^k(x) = k² θ(k x)
"""
from functools import lru_cache
import logging
import math

import numpy as np
from scipy import integrate

from ..errors import ConstructionError

logger = logging.getLogger(__name__)

CDF_NODES = 20001


def _raw_bump(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    safe = np.where(inside, 1.0 - u * u, 1.0)
    return np.where(inside, np.exp(-1.0 / safe), 0.0)


def _bump_scalar(u: float) -> float:
    return math.exp(-1.0 / (1.0 - u * u)) if abs(u) < 1.0 else 0.0


@lru_cache(maxsize=None)
def eta_normalisation() -> float:
    value, _ = integrate.quad(_bump_scalar, -1.0, 1.0,
                              epsabs=1e-14, epsrel=1e-13)
    return 1.0 / value


@lru_cache(maxsize=None)
def theta_normalisation() -> float:
    # ∫_disk exp(-1/(1 - r²)) dx = 2π ∫_0^1 r exp(-1/(1 - r²)) dr
    value, _ = integrate.quad(lambda r: r * _bump_scalar(r), 0.0, 1.0,
                              epsabs=1e-14, epsrel=1e-13)
    return 1.0 / (2.0 * np.pi * value)


def eta(u) -> np.ndarray:
    return eta_normalisation() * _raw_bump(u)


def eta_k(t, k: int) -> np.ndarray:
    if k < 1:
        raise ConstructionError(f"mollification index must be >= 1. Got {k}")
    return k * eta(k * np.asarray(t, dtype=float))


def theta(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return theta_normalisation() * _raw_bump(np.hypot(x[..., 0], x[..., 1]))


def theta_k(x, k: int) -> np.ndarray:
    if k < 1:
        raise ConstructionError(f"mollification index must be >= 1. Got {k}")
    return k * k * theta(k * np.asarray(x, dtype=float))


@lru_cache(maxsize=None)
def _eta_cdf_table():
    u = np.linspace(-1.0, 1.0, CDF_NODES)
    cdf = integrate.cumulative_trapezoid(eta(u), u, initial=0.0)
    cdf /= cdf[-1]
    return u, cdf


def eta_cdf(u) -> np.ndarray:
    """H(u) = ∫_{-1}^{u} η; 0 below -1 and 1 above 1."""
    grid, cdf = _eta_cdf_table()
    return np.interp(np.asarray(u, dtype=float), grid, cdf, left=0.0, right=1.0)


def interval_weight(t: float, start: float, end: float, k: int) -> float:
    """∫_{start}^{end} η^k(t - s) ds: weight of a time interval in the time convolution at t."""
    return float(eta_cdf(k * (t - start)) - eta_cdf(k * (t - end)))


def theta_kernel(k: int, h: float) -> np.ndarray:
    """
    θ^k sampled on a lattice of spacing h, renormalised to unit sum.

    The kernel is symmetric, so quadratics are reproduced up to an additive constant.
    """
    if h <= 0:
        raise ConstructionError(f"lattice spacing must be positive. Got {h}")
    radius = int(np.ceil(1.0 / (k * h)))
    offsets = np.arange(-radius, radius + 1) * h
    X1, X2 = np.meshgrid(offsets, offsets, indexing="ij")
    kernel = theta_k(np.stack([X1, X2], axis=-1), k)
    total = kernel.sum()
    if total <= 0:
        # kernel narrower than the lattice: a single node carries all the mass
        kernel = np.zeros_like(kernel)
        kernel[radius, radius] = 1.0
        logger.warning("theta^%d is narrower than the lattice spacing %.3g", k, h)
        return kernel
    return kernel / total

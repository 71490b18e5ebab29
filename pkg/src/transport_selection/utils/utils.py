from typing import Callable, Sequence, Tuple

import numpy as np


def WrapToWindow(x, origin, side):
    """
    Map points into the periodic window [origin, origin + side) in each axis.

    Args:
        x (np.ndarray): points of shape (..., 2).
        origin (float or pair): lower-left corner of the window.
        side (float): period.

    Returns:
        np.ndarray: wrapped points, same shape as ``x``.
    """
    origin = np.asarray(origin, dtype=float)
    return origin + np.mod(np.asarray(x, dtype=float) - origin, side)


def rk4_step(rhs: Callable, t: float, state: Tuple[np.ndarray, ...], dt) -> Tuple[np.ndarray, ...]:
    """
    One classical Runge-Kutta step for a system given as a tuple of arrays.

    Args:
        rhs: (t, state) -> tuple of derivatives, same shapes as ``state``
        t: current time
        state: tuple of arrays
        dt: step (float, or array broadcastable against each component for per-point steps)
    """

    def shift(base, slope, factor):
        return tuple(b + factor * s for b, s in zip(base, slope))

    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * dt, shift(state, k1, 0.5 * dt))
    k3 = rhs(t + 0.5 * dt, shift(state, k2, 0.5 * dt))
    k4 = rhs(t + dt, shift(state, k3, dt))
    return tuple(
        s + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for s, a, b, c, d in zip(state, k1, k2, k3, k4)
    )


def gauss_nodes(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def tensor_gauss(
    window: Tuple[float, float, float, float], cells: int, order: int = 2
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite tensor Gauss rule on ``window`` = (x0, y0, x1, y1).

    Returns:
        points (M, 2), weights (M,) with M = (cells · order)²
    """
    x0, y0, x1, y1 = window
    g, w = np.polynomial.legendre.leggauss(order)
    h1, h2 = (x1 - x0) / cells, (y1 - y0) / cells
    base = np.arange(cells)
    n1 = (x0 + (base[:, None] + 0.5 * (g[None, :] + 1.0)) * h1).ravel()
    n2 = (y0 + (base[:, None] + 0.5 * (g[None, :] + 1.0)) * h2).ravel()
    w1 = np.tile(0.5 * w * h1, cells)
    w2 = np.tile(0.5 * w * h2, cells)
    X1, X2 = np.meshgrid(n1, n2, indexing="ij")
    W = np.outer(w1, w2)
    return np.column_stack([X1.ravel(), X2.ravel()]), W.ravel()


def midpoint_grid(window: Tuple[float, float, float, float], n1: int, n2: int = None):
    """Cell-centre points (n1·n2, 2) and the common cell area."""
    n2 = n1 if n2 is None else n2
    x0, y0, x1, y1 = window
    h1, h2 = (x1 - x0) / n1, (y1 - y0) / n2
    g1 = x0 + (np.arange(n1) + 0.5) * h1
    g2 = y0 + (np.arange(n2) + 0.5) * h2
    X1, X2 = np.meshgrid(g1, g2, indexing="ij")
    return np.column_stack([X1.ravel(), X2.ravel()]), h1 * h2


def split_times(start: float, end: float, breakpoints: Sequence[float]) -> list:
    """[start, b_1, ..., b_m, end] with the breakpoints strictly between start and end, in order."""
    lo, hi = min(start, end), max(start, end)
    inner = sorted(b for b in set(breakpoints) if lo < b < hi)
    if end < start:
        inner = inner[::-1]
    return [start] + inner + [end]

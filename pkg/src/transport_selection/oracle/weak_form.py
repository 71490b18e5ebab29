"""
Weak-form residual of the continuity equation

    R(φ) = ∫∫ ρ (∂_t φ + b · ∇_x φ) dx dt

for φ compactly supported in (0, 2) x ℝ². Genuine bounded weak solutions give R ≈ 0 for
every φ. Time is integrated by Gauss-Legendre on the pieces between stage boundaries;
space by the midpoint rule.
"""
from dataclasses import dataclass
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import ConstructionError
from ..dyadic.grid import CellGrid
from ..dyadic.lattice import chessboard
from ..fields.bumps import SpaceBump, SpaceTimeBump
from ..fields.building_blocks import Sampler, sampler_for
from ..fields.types import FieldSpec, Orientation
from ..flow.exact import flow_points
from ..utils import gauss_nodes, midpoint_grid, split_times
from .finite_volume import FVState, stage_breakpoints

logger = logging.getLogger(__name__)

Box = Tuple[float, float, float, float]
Integrand = Callable[[np.ndarray], np.ndarray]
RESOLUTION = 2.0**-8
LIMIT_DEPTH = 5
GAUSS_ORDER = 4
BATTERY_SIZE = 10


def _box_points(box: Box, h: float) -> Tuple[np.ndarray, float]:
    n1 = max(1, int(math.ceil((box[2] - box[0]) / h)))
    n2 = max(1, int(math.ceil((box[3] - box[1]) / h)))
    return midpoint_grid(box, n1, n2)


@dataclass(frozen=True)
class EulerianSeries:
    """ρ(t, x) given pointwise; pairings by the midpoint rule on the test function's box."""

    density: Callable[[float, np.ndarray], np.ndarray]
    h: float = RESOLUTION

    def pair(self, t: float, g: Integrand, box: Box) -> float:
        pts, area = _box_points(box, self.h)
        return float(np.sum(self.density(t, pts) * g(pts)) * area)


@dataclass(frozen=True)
class PushForwardSeries:
    """
    ρ(t) = X(t, ·)# (datum L²) for a datum and transport periodic with ``period``.

    Pairings use ∫ ρ(t) g = Σ_n ∫_{period cell} datum(y) g(X(t, y) + nP) dy. On the open
    interval ``limit`` = (lo, hi, value) the series is the constant ``value``.
    """

    datum: Callable[[np.ndarray], np.ndarray]
    transport: Callable[[float, np.ndarray], np.ndarray]
    period: float
    h: float = RESOLUTION
    limit: Optional[Tuple[float, float, float]] = None

    def pair(self, t: float, g: Integrand, box: Box) -> float:
        if self.limit is not None and self.limit[0] < t < self.limit[1]:
            pts, area = _box_points(box, self.h)
            return float(self.limit[2] * np.sum(g(pts)) * area)
        P = self.period
        n = max(1, int(round(P / self.h)))
        y, area = midpoint_grid((0.0, 0.0, P, P), n)
        datum = self.datum(y)
        keep = datum != 0
        y, datum = y[keep], datum[keep]
        x = self.transport(t, y)
        lo1 = math.floor((box[0] - x[:, 0].max()) / P)
        hi1 = math.ceil((box[2] - x[:, 0].min()) / P)
        lo2 = math.floor((box[1] - x[:, 1].max()) / P)
        hi2 = math.ceil((box[3] - x[:, 1].min()) / P)
        total = 0.0
        for i in range(lo1, hi1 + 1):
            for j in range(lo2, hi2 + 1):
                shifted = x + np.array([i * P, j * P])
                inside = ((shifted[:, 0] > box[0]) & (shifted[:, 0] < box[2])
                          & (shifted[:, 1] > box[1]) & (shifted[:, 1] < box[3]))
                if inside.any():
                    total += float(np.sum(datum[inside] * g(shifted[inside])))
        return total * area


def unmixing_series(lam: int, depth: int = LIMIT_DEPTH, h: float = RESOLUTION,
                    orientation: Orientation = Orientation.CCW) -> PushForwardSeries:
    """
    ζ_λ as a push-forward: the datum carried forward to t < 1, and ζ(t) = ζ(2 - t) for
    t > 1; the weak* limit 1/2 on (1 - 2^-depth, 1 + 2^-depth).
    """
    spec = FieldSpec.building_block(lam, orientation=orientation)

    def transport(t: float, y: np.ndarray) -> np.ndarray:
        s = t if t < 1 else 2.0 - t
        return flow_points(spec, 0.0, s, y)

    window = 2.0**-depth
    return PushForwardSeries(lambda y: chessboard(lam, y).astype(float), transport,
                             2.0 ** (1 - lam), h, (1.0 - window, 1.0 + window, 0.5))


def snapshot_density(states: Sequence[FVState]) -> Callable[[float, np.ndarray], np.ndarray]:
    """Eulerian density from finite-volume snapshots: the snapshot nearest in time, periodic."""
    if not states:
        raise ConstructionError("no snapshots")
    times = np.array([s.time for s in states])

    def density(t: float, pts: np.ndarray) -> np.ndarray:
        state = states[int(np.argmin(np.abs(times - t)))]
        grid: CellGrid = state.grid
        h = state.h
        n1, n2 = grid.shape
        i = np.floor(pts[:, 0] / h).astype(int) - grid.origin[0]
        j = np.floor(pts[:, 1] / h).astype(int) - grid.origin[1]
        return grid.as_float()[np.mod(i, n1), np.mod(j, n2)]

    return density


def time_nodes(phi: SpaceTimeBump, breakpoints: Sequence[float] = (),
               order: int = GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights on each piece of φ's time support between breakpoints."""
    a, b = phi.time_support
    a, b = max(a, 0.0), min(b, 2.0)
    edges = split_times(a, b, breakpoints)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        t, w = gauss_nodes(order, lo, hi)
        nodes.append(t)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def weak_residual(series, sampler: Sampler, phi: SpaceTimeBump,
                  breakpoints: Sequence[float] = stage_breakpoints(),
                  order: int = GAUSS_ORDER) -> float:
    """
    R(φ) for a density series (EulerianSeries or PushForwardSeries) and field sampler.

    Raises:
        ConstructionError: φ is not supported inside (0, 2) in time
    """
    a, b = phi.time_support
    if a < 0 or b > 2:
        raise ConstructionError(f"test function time support {phi.time_support} leaves (0, 2)")
    box = phi.space.bounding_box
    if getattr(series, "limit", None) is not None:
        breakpoints = tuple(breakpoints) + tuple(series.limit[:2])
    nodes, weights = time_nodes(phi, breakpoints, order)
    total = 0.0
    for t, w in zip(nodes, weights):
        t = float(t)

        def g(x: np.ndarray, t=t) -> np.ndarray:
            drift = np.sum(sampler(t, x) * phi.gradient(t, x), axis=1)
            return phi.time_derivative(t, x) + drift

        total += w * series.pair(t, g, box)
    return float(total)


def residual_battery(lam: int, size: int = BATTERY_SIZE, seed: int = 0) -> List[SpaceTimeBump]:
    """
    Seeded smooth test functions inside one period, covering both halves of [0, 2]
    and bumps straddling t = 1.
    """
    rng = np.random.default_rng(seed)
    P = 2.0 ** (1 - lam)
    bumps = []
    for i in range(size):
        radius = P * rng.uniform(0.15, 0.3)
        center = tuple(rng.uniform(radius, P - radius, size=2).tolist())
        if i % 3 == 2:
            t_center, t_radius = 1.0, rng.uniform(0.2, 0.4)
        else:
            t_radius = rng.uniform(0.08, 0.2)
            t_center = rng.uniform(t_radius + 0.02, 2.0 - t_radius - 0.02)
        bumps.append(SpaceTimeBump(SpaceBump(center, radius), float(t_center), float(t_radius)))
    return bumps


def sign_bump(lam: int) -> SpaceTimeBump:
    """A test function on backward stages 1 and 2, around t = 1.25."""
    P = 2.0 ** (1 - lam)
    return SpaceTimeBump(SpaceBump((0.5 * P, 0.5 * P), 0.3 * P), 1.25, 0.12)


def residual_table(lam: int, reflection_signs: Sequence[int] = (-1, 1), seed: int = 0,
                   h: float = RESOLUTION, depth: int = LIMIT_DEPTH,
                   orientation: Orientation = Orientation.CCW) -> pd.DataFrame:
    """R(φ) of ζ_λ against the battery plus the sign bump, for each reflection sign."""
    series = unmixing_series(lam, depth, h, orientation)
    tests = residual_battery(lam, seed=seed) + [sign_bump(lam)]
    rows = []
    for sigma in reflection_signs:
        sampler = sampler_for(FieldSpec.building_block(lam, reflection_sign=sigma,
                                                       orientation=orientation))
        for i, phi in enumerate(tests):
            value = weak_residual(series, sampler, phi, stage_breakpoints(depth + 2))
            rows.append(dict(reflection_sign=sigma, phi_id=i, t_center=phi.t_center,
                             t_radius=phi.t_radius, residual=value))
        logger.info("weak residual of the unmixing solution with sign %+d: max |R| = %.3g",
                    sigma, max(abs(r["residual"]) for r in rows if r["reflection_sign"] == sigma))
    return pd.DataFrame(rows)

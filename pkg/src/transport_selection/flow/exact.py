"""
Closed-form flows of v, u_λ, b_λ and the truncated fields.

v moves every point along its square level set {max(|x1|, |x2|) = r} with constant speed
4r, so one full turn takes time 2 for every r < 1/2.  Positions on the level set are
tracked by arclength from the corner (r, -r), increasing counterclockwise:

    right edge  x1 =  r:  s = x2 + r
    top edge    x2 =  r:  s = 3r - x1
    left edge   x1 = -r:  s = 5r - x2
    bottom edge x2 = -r:  s = 7r + x1
"""
from fractions import Fraction
import logging
from typing import NamedTuple, Tuple

import numpy as np

from ..errors import ConstructionError, SingularTimeError
from ..dyadic.rationals import exact_point, is_exact, pow2, restore_point, to_fraction
from ..fields.building_blocks import (
    HALF,
    local_exact,
    as_fraction,
    check_time,
    local_coordinates,
    stage_schedule,
)
from ..fields.types import FieldSpec, Orientation, Variant, as_points

logger = logging.getLogger(__name__)


class PerimeterPosition(NamedTuple):
    """Level-set radius r and arclength s ∈ [0, 8r)."""

    radius: Fraction
    arclength: Fraction


def perimeter_position(x) -> PerimeterPosition:
    """Exact (or float) perimeter coordinates of a single point."""
    xe = exact_point(x)
    x1, x2 = xe if xe is not None else (float(x[0]), float(x[1]))
    r = max(abs(x1), abs(x2))
    if x1 == r and x2 < r:
        s = x2 + r
    elif x2 == r and x1 > -r:
        s = 3 * r - x1
    elif x1 == -r and x2 > -r:
        s = 5 * r - x2
    else:
        s = 7 * r + x1
    if r == 0:
        s = r * 0
    return PerimeterPosition(r, s)


def from_perimeter(position: PerimeterPosition) -> Tuple:
    r, s = position
    if r == 0:
        return r * 0, r * 0
    s = s % (8 * r)
    if s < 2 * r:
        return r, s - r
    if s < 4 * r:
        return 3 * r - s, r
    if s < 6 * r:
        return -r, 5 * r - s
    return s - 7 * r, -r


def _perimeter_arrays(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x1, x2 = pts[:, 0], pts[:, 1]
    r = np.maximum(np.abs(x1), np.abs(x2))
    right = (x1 == r) & (x2 < r)
    top = ~right & (x2 == r) & (x1 > -r)
    left = ~right & ~top & (x1 == -r) & (x2 > -r)
    s = np.select([right, top, left], [x2 + r, 3 * r - x1, 5 * r - x2], default=7 * r + x1)
    return r, s


def _from_perimeter_arrays(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    out = np.empty((r.shape[0], 2))
    c1, c2, c3 = s < 2 * r, s < 4 * r, s < 6 * r
    out[:, 0] = np.select([c1, c2, c3], [r, 3 * r - s, -r], default=s - 7 * r)
    out[:, 1] = np.select([c1, c2, c3], [s - r, r, 5 * r - s], default=-r)
    return out


def _flow_v_arrays(t: float, pts: np.ndarray, sign: int) -> np.ndarray:
    r, s = _perimeter_arrays(pts)
    active = (r > 0) & (r < 0.5)
    out = pts.copy()
    if not np.any(active):
        return out
    ra, sa = r[active], s[active]
    period = 8.0 * ra
    moved = np.mod(sa + 4.0 * ra * t * sign, period)
    out[active] = _from_perimeter_arrays(ra, moved)
    return out


def flow_v(t, x, orientation: Orientation = Orientation.CCW):
    """
    Flow of v over duration t (any sign).

    Identity for r = 0 and r ≥ 1/2.  Exact for exact t and x.
    """
    sign = Orientation.parse(orientation).value
    if not isinstance(x, np.ndarray) and is_exact(t):
        xe = exact_point(x)
        if xe is not None:
            r, s = perimeter_position(xe)
            if r == 0 or r >= HALF:
                return restore_point(xe, x)
            moved = (s + 4 * r * to_fraction(t) * sign) % (8 * r)
            return restore_point(from_perimeter(PerimeterPosition(r, moved)), x)
    pts, single = as_points(x)
    out = _flow_v_arrays(float(t), pts, sign)
    return out[0] if single else out


def stage_map(lam: int, k: int, duration, x, orientation: Orientation = Orientation.CCW):
    """
    Flow of u_λ(2^k ·) over ``duration`` (signed).

    In the local coordinate ξ = 2^(λ+k) x - y* of a filled square, ξ follows v for time
    2^k · duration; empty squares and square boundaries stay fixed.
    """
    level = lam + k
    if not isinstance(x, np.ndarray) and is_exact(duration):
        xe = exact_point(x)
        if xe is not None:
            y, xi, filled = local_exact(level, xe)
            if not filled:
                return restore_point(xe, x)
            moved = flow_v(to_fraction(duration) * pow2(k), xi, orientation)
            scale = pow2(-level)
            return restore_point(((y[0] + moved[0]) * scale, (y[1] + moved[1]) * scale), x)
    pts, single = as_points(x)
    y, xi, filled = local_coordinates(level, pts)
    out = pts.copy()
    if np.any(filled):
        sign = Orientation.parse(orientation).value
        moved = _flow_v_arrays(float(duration) * 2.0**k, xi[filled], sign)
        out[filled] = (y[filled] + moved) * 2.0 ** (-level)
    return out[0] if single else out


class FlowQuery(NamedTuple):
    """Flow of ``spec`` from start time to end time applied to ``point``."""

    spec: FieldSpec
    start: object
    end: object
    point: object


def _check_query(spec: FieldSpec, s, t) -> None:
    if spec.variant not in (Variant.BUILDING_BLOCK, Variant.TRUNC_SYM, Variant.TRUNC_ASYM):
        raise ConstructionError(
            f"closed-form flows exist for exact fields only. Got {spec.variant.value}"
        )
    check_time(s)
    check_time(t)
    if spec.variant is Variant.BUILDING_BLOCK and (s == 1 or t == 1):
        raise SingularTimeError("flow of the untruncated field cannot start or end at t = 1")


def _apply(spec: FieldSpec, s, t, x):
    _check_query(spec, s, t)
    if s == t:
        return x
    segments = stage_schedule(spec, s, t)
    forward = as_fraction(s) < as_fraction(t)
    exact = not isinstance(x, np.ndarray) and exact_point(x) is not None
    exact = exact and is_exact(s) and is_exact(t)
    current = x if exact else np.asarray(x, dtype=float)
    order = segments if forward else list(reversed(segments))
    for seg in order:
        duration = seg.duration * seg.sign
        if not forward:
            duration = -duration
        if not exact:
            duration = float(duration)
        current = stage_map(spec.lam, seg.stage.k, duration, current, spec.orientation)
    return current


def flow_field(query: FlowQuery):
    """
    Regular Lagrangian flow of an exact field from ``query.start`` to ``query.end``.

    Raises:
        SingularTimeError: untruncated field with start or end at t = 1 or crossing it
        TimeDomainError: times outside [0, 2]
    """
    return _apply(query.spec, query.start, query.end, query.point)


def inverse_flow(query: FlowQuery):
    """Inverse of flow_field: the flow from ``query.end`` back to ``query.start``."""
    return _apply(query.spec, query.end, query.start, query.point)


def flow_points(spec: FieldSpec, s, t, points) -> np.ndarray:
    """Vectorised float flow of an (N, 2) point array."""
    pts = np.asarray(points, dtype=float)
    return _apply(spec, s, t, pts.reshape(-1, 2)).reshape(pts.shape)


def flow_between(spec: FieldSpec, s, t, x):
    return _apply(spec, s, t, x)

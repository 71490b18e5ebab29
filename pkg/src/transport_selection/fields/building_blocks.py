"""
Building-block fields

v(x)      = (0, 4x1)   if 1/2 > |x1| > |x2|
            (-4x2, 0)  if 1/2 > |x2| > |x1|
            (0, 0)     otherwise
u_λ(x)    = 2^-λ v(2^λ x - y*),  y* the even-sum integer pair nearest 2^λ x
b_λ(t, x) = u_λ(2^k x) on forward stage k,  σ b_λ(2 - t, x) for t > 1

Exact inputs (int / Fraction / DyadicRational) are evaluated in exact arithmetic; array
inputs of shape (N, 2) are evaluated vectorised in floating point.
"""
from fractions import Fraction
import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConstructionError, SingularTimeError, TimeDomainError
from ..dyadic.rationals import exact_point, is_exact, pow2, restore_point, to_fraction
from .types import FieldSpec, Orientation, Side, StageIndex, Variant, as_points

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


# ----------------------------------------------------------------------
# time handling
# ----------------------------------------------------------------------
def check_time(t) -> None:
    if not 0 <= t <= 2:
        raise TimeDomainError(f"time must lie in [0, 2]. Got {t}")


def time_value(t):
    """Fraction for exact times, float otherwise."""
    return to_fraction(t) if is_exact(t) else float(t)


def as_fraction(t) -> Fraction:
    """Exact value of a time; floats are converted by their binary value."""
    return to_fraction(t) if is_exact(t) else Fraction(float(t))


def stage_at(t) -> Optional[StageIndex]:
    """
    Stage containing t (lower-closed), None at t = 1.

    t = 2 belongs to backward stage 0.
    """
    check_time(t)
    t = time_value(t)
    if t == 1:
        return None
    one = Fraction(1) if isinstance(t, Fraction) else 1.0
    if t < 1:
        d = one - t
        k = 0
        while d <= _half_pow(k + 1, t):
            k += 1
        return StageIndex(k, Side.FORWARD)
    d = t - one
    k = 0
    while d < _half_pow(k + 1, t):
        k += 1
    return StageIndex(k, Side.BACKWARD)


def _half_pow(k: int, like):
    return pow2(-k) if isinstance(like, Fraction) else 2.0 ** (-k)


# ----------------------------------------------------------------------
# v and u_λ
# ----------------------------------------------------------------------
def _v_exact(xi: Tuple[Fraction, Fraction], sign: int) -> Tuple[Fraction, Fraction]:
    a1, a2 = abs(xi[0]), abs(xi[1])
    if HALF > a1 > a2:
        return Fraction(0), sign * 4 * xi[0]
    if HALF > a2 > a1:
        return sign * -4 * xi[1], Fraction(0)
    return Fraction(0), Fraction(0)


def _v_array(xi: np.ndarray, sign: int) -> np.ndarray:
    a1, a2 = np.abs(xi[:, 0]), np.abs(xi[:, 1])
    first = (a1 < 0.5) & (a1 > a2)
    second = (a2 < 0.5) & (a2 > a1)
    out = np.zeros_like(xi)
    out[:, 1] = np.where(first, 4.0 * xi[:, 0], 0.0)
    out[:, 0] = np.where(second, -4.0 * xi[:, 1], 0.0)
    return sign * out


def _finish(values: np.ndarray, single: bool):
    return values[0] if single else values


def eval_v(x, orientation: Orientation = Orientation.CCW):
    """The basic field v; zero on the diagonals |x1| = |x2| and outside the unit square."""
    sign = Orientation.parse(orientation).value
    if not isinstance(x, np.ndarray):
        xe = exact_point(x)
        if xe is not None:
            return restore_point(_v_exact(xe, sign), x)
    pts, single = as_points(x)
    return _finish(_v_array(pts, sign), single)


def local_exact(level: int, x: Tuple[Fraction, Fraction]):
    """(y*, ξ, filled) for the S² square of side 2^-level around x, exactly."""
    scale = pow2(level)
    z = (x[0] * scale, x[1] * scale)
    y = (math.floor(z[0] + HALF), math.floor(z[1] + HALF))
    xi = (z[0] - y[0], z[1] - y[1])
    filled = (y[0] + y[1]) % 2 == 0
    return y, xi, filled


def local_coordinates(level: int, pts: np.ndarray):
    """
    Vectorised (y*, ξ, filled): y* the nearest integer pair to 2^level x, ξ = 2^level x - y*,
    filled when y*1 + y*2 is even.
    """
    z = pts * (2.0**level)
    y = np.floor(z + 0.5)
    xi = z - y
    filled = np.mod(y[:, 0] + y[:, 1], 2) == 0
    return y, xi, filled


def eval_u(lam: int, x, orientation: Orientation = Orientation.CCW):
    """Periodised field u_λ (period 2^(1-λ) in each axis)."""
    if lam < 0:
        raise ConstructionError(f"lambda must be non-negative. Got {lam}")
    sign = Orientation.parse(orientation).value
    if not isinstance(x, np.ndarray):
        xe = exact_point(x)
        if xe is not None:
            _, xi, filled = local_exact(lam, xe)
            if not filled:
                return restore_point((Fraction(0), Fraction(0)), x)
            v = _v_exact(xi, sign)
            s = pow2(-lam)
            return restore_point((v[0] * s, v[1] * s), x)
    pts, single = as_points(x)
    _, xi, filled = local_coordinates(lam, pts)
    v = _v_array(xi, sign) * filled[:, None]
    return _finish(v * 2.0 ** (-lam), single)


def _zero_like(x):
    if not isinstance(x, np.ndarray):
        xe = exact_point(x)
        if xe is not None:
            return restore_point((Fraction(0), Fraction(0)), x)
    pts, single = as_points(x)
    return _finish(np.zeros_like(pts), single)


def _scale_point(x, k: int):
    if not isinstance(x, np.ndarray):
        xe = exact_point(x)
        if xe is not None:
            s = pow2(k)
            return restore_point((xe[0] * s, xe[1] * s), x)
    return np.asarray(x, dtype=float) * 2.0**k


def _negate(value, sign: int):
    if sign == 1:
        return value
    if isinstance(value, tuple):
        return tuple(-c for c in value)
    return -value


def eval_b(
    lam: int,
    t,
    x,
    reflection_sign: int = -1,
    orientation: Orientation = Orientation.CCW,
):
    """
    Time-staged field b_λ.

    Forward stage k: u_λ(2^k x).  Backward stage k: σ u_λ(2^k x).  Zero at t = 1.

    Raises:
        TimeDomainError: t outside [0, 2]
    """
    stage = stage_at(t)
    if stage is None:
        return _zero_like(x)
    value = eval_u(lam, _scale_point(x, stage.k), orientation)
    sign = 1 if stage.side is Side.FORWARD else reflection_sign
    return _negate(value, sign)


def in_truncation_window(spec: FieldSpec, t) -> bool:
    window = spec.truncation_window
    if window is None:
        return False
    t = time_value(t)
    return window[0] < t < window[1]


def eval_trunc(spec: FieldSpec, t, x):
    """b_λ^q / b̃_λ^q: b_λ outside the open truncation window, zero inside it."""
    if spec.variant not in (Variant.TRUNC_SYM, Variant.TRUNC_ASYM):
        raise ConstructionError(f"eval_trunc needs a truncated spec. Got {spec.variant.value}")
    check_time(t)
    if in_truncation_window(spec, t):
        return _zero_like(x)
    return eval_b(spec.lam, t, x, spec.reflection_sign, spec.orientation)


def eval_exact(spec: FieldSpec, t, x):
    """Exact part of any spec: b_λ, b_λ^q or b̃_λ^q."""
    base = spec.exact_part
    if base.variant is Variant.BUILDING_BLOCK:
        return eval_b(base.lam, t, x, base.reflection_sign, base.orientation)
    return eval_trunc(base, t, x)


def sup_norm(spec) -> Fraction:
    """‖b_λ‖∞ = 2^-λ ‖v‖∞ = 2^(1-λ). Accepts a FieldSpec or λ itself."""
    lam = spec.lam if isinstance(spec, FieldSpec) else int(spec)
    if lam is None or lam < 0:
        raise ConstructionError(f"lambda must be non-negative. Got {lam}")
    return pow2(1 - lam)


# ----------------------------------------------------------------------
# stream function
# ----------------------------------------------------------------------
def stream_function(lam: int, stage: int, x, orientation: Orientation = Orientation.CCW):
    """
    ψ with u_λ(2^stage x) = ∇^⊥ψ = (-∂2ψ, ∂1ψ).

    ψ = 2^(-2λ-stage) · 2 max(|ξ1|, |ξ2|)² on filled squares and 2^(-2λ-stage) / 2 elsewhere,
    so ψ is continuous and periodic.
    """
    sign = Orientation.parse(orientation).value
    level = lam + stage
    if not isinstance(x, np.ndarray):
        xe = exact_point(x)
        if xe is not None:
            _, xi, filled = local_exact(level, xe)
            r = max(abs(xi[0]), abs(xi[1]))
            base = 2 * r * r if filled and r < HALF else HALF
            return sign * pow2(-2 * lam - stage) * base
    pts, single = as_points(x)
    _, xi, filled = local_coordinates(level, pts)
    r = np.max(np.abs(xi), axis=1)
    base = np.where(filled & (r < 0.5), 2.0 * r * r, 0.5)
    psi = sign * 2.0 ** (-2 * lam - stage) * base
    return psi[0] if single else psi


# ----------------------------------------------------------------------
# stage schedule
# ----------------------------------------------------------------------
class Segment(NamedTuple):
    """Time interval on which the exact part equals sign · u_λ(2^k x)."""

    start: Fraction
    end: Fraction
    stage: StageIndex
    sign: int

    @property
    def duration(self) -> Fraction:
        return self.end - self.start


def stage_schedule(spec: FieldSpec, a, b) -> List[Segment]:
    """
    Live segments of the exact part of ``spec`` inside [a, b], in increasing time.

    Raises:
        SingularTimeError: untruncated field and a < b with 1 in [a, b]
    """
    check_time(a)
    check_time(b)
    a, b = as_fraction(a), as_fraction(b)
    if a > b:
        a, b = b, a
    base = spec.exact_part
    window = base.truncation_window
    if window is None and a < b and a <= 1 <= b:
        raise SingularTimeError(f"untruncated field: interval [{a}, {b}] touches t = 1")
    segments: List[Segment] = []
    if a < 1:
        k = 0
        while True:
            stage = StageIndex(k, Side.FORWARD)
            lo, hi = stage.interval
            if lo >= b or (window is not None and lo >= window[0]):
                break
            end = min(hi, b) if window is None else min(hi, b, window[0])
            start = max(lo, a)
            if start < end:
                segments.append(Segment(start, end, stage, 1))
            k += 1
    if b > 1:
        if window is not None:
            assert base.q is not None
            k0 = base.q - 1
            floor_time = window[1]
        else:
            first = stage_at(a)
            assert first is not None
            k0 = first.k
            floor_time = a
        for k in range(k0, -1, -1):
            stage = StageIndex(k, Side.BACKWARD)
            lo, hi = stage.interval
            start, end = max(lo, a, floor_time), min(hi, b)
            if start < end:
                segments.append(Segment(start, end, stage, base.reflection_sign))
    logger.debug("stage schedule for %s on [%s, %s]: %d segments", base.variant.value, a, b,
                 len(segments))
    return segments


# ----------------------------------------------------------------------
# uniform sampler contract
# ----------------------------------------------------------------------
Sampler = Callable[[float, np.ndarray], np.ndarray]


def eval_field(spec: FieldSpec, t, x):
    """Evaluate any FieldSpec variant at (t, x)."""
    if spec.variant is Variant.SMOOTH:
        assert spec.w is not None
        pts, single = as_points(x)
        return _finish(spec.w.value(float(t), pts), single)
    if spec.variant in (Variant.BUILDING_BLOCK, Variant.TRUNC_SYM, Variant.TRUNC_ASYM):
        return eval_exact(spec, t, x)
    if spec.variant in (
        Variant.PERTURBED, Variant.PERTURBED_TRUNC_SYM, Variant.PERTURBED_TRUNC_ASYM
    ):
        from ..transport.perturbed import eval_perturbed_field

        return eval_perturbed_field(spec, t, x)
    from ..regularization.regularized import assemble_regularized

    return assemble_regularized(spec, t, x)


def sampler_for(spec: FieldSpec) -> Sampler:
    """(t, points) -> (N, 2) float array for any spec."""

    def sample(t: float, pts: np.ndarray) -> np.ndarray:
        return np.asarray(eval_field(spec, t, np.asarray(pts, dtype=float)), dtype=float)

    return sample


def weak_divergence(
    sampler: Sampler,
    t: float,
    window: Tuple[float, float, float, float],
    tests: Sequence,
    n: int = 256,
) -> np.ndarray:
    """
    Midpoint quadrature of ∫ b(t, x)·∇φ(x) dx over ``window`` for each spatial test function.

    Zero (up to quadrature error) for weakly divergence-free fields.
    """
    x0, y0, x1, y1 = window
    h1, h2 = (x1 - x0) / n, (y1 - y0) / n
    g1 = x0 + (np.arange(n) + 0.5) * h1
    g2 = y0 + (np.arange(n) + 0.5) * h2
    X1, X2 = np.meshgrid(g1, g2, indexing="ij")
    pts = np.column_stack([X1.ravel(), X2.ravel()])
    b = sampler(t, pts)
    out = np.empty(len(tests))
    for i, phi in enumerate(tests):
        out[i] = float(np.sum(b * phi.gradient(pts))) * h1 * h2
    return out

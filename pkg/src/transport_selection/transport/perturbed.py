"""
Perturbed fields and their flows

    b_{λ,w}(t, x) = D_x X_w(t, y) · b(t, y) + w(t, x),   y = X_w^{-1}(t, x)

where b is the exact part (b_λ, b_λ^q or b̃_λ^q) and X_w the flow of w from time 1.
The regular Lagrangian flow from time 1 factorises as X(t, x) = X_w(t, X_b(t, x)).
"""
import logging
import math
from typing import List

import numpy as np

from ..errors import ConstructionError, SingularTimeError
from ..fields.building_blocks import (
    check_time,
    eval_exact,
    in_truncation_window,
    local_coordinates,
    stage_at,
    stage_schedule,
)
from ..fields.types import FieldSpec, Variant, as_points
from ..flow.exact import flow_points
from ..flow.smooth import DEFAULT_STEP, flow_w_between, inverse_flow_w
from ..utils import rk4_step, split_times

logger = logging.getLogger(__name__)

PERTURBED = (Variant.PERTURBED, Variant.PERTURBED_TRUNC_SYM, Variant.PERTURBED_TRUNC_ASYM)
INNER_STEP = 2e-2
EVENT_ITERATIONS = 60


def _check_perturbed(spec: FieldSpec) -> None:
    if spec.variant not in PERTURBED:
        raise ConstructionError(f"expected a perturbed field. Got {spec.variant.value}")


def exact_part_vanishes(spec: FieldSpec, t: float) -> bool:
    return t == 1 or in_truncation_window(spec.exact_part, t)


def eval_perturbed_field(spec: FieldSpec, t, x, h: float = DEFAULT_STEP):
    """
    b_{λ,w}(t, x) for the perturbed variants.

    Args:
        spec: PERTURBED, PERTURBED_TRUNC_SYM or PERTURBED_TRUNC_ASYM
        t: time in [0, 2]
        x: point (2,) or points (N, 2)
        h: RK4 step of the inverse flow of w

    Returns:
        the exact part's value when w vanishes identically, a float array otherwise
    """
    _check_perturbed(spec)
    check_time(t)
    w = spec.w
    assert w is not None
    exact = spec.exact_part
    if w.is_zero:
        return eval_exact(exact, t, x)
    pts, single = as_points(x)
    t = float(t)
    out = w.value(t, pts)
    if not exact_part_vanishes(spec, t):
        back = flow_w_between(w, t, 1.0, pts, h)
        forward_jacobian = np.linalg.inv(back.jacobian_matrix)
        b = np.asarray(eval_exact(exact, t, back.endpoint), dtype=float)
        out = out + np.einsum("nij,nj->ni", forward_jacobian, b)
    return out[0] if single else out


def _require_truncated(spec: FieldSpec) -> None:
    _check_perturbed(spec)
    if spec.variant is Variant.PERTURBED:
        raise SingularTimeError("the untruncated perturbed field has no flow from t = 1")


def composed_flow(spec: FieldSpec, t, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """X(t, x) = X_w(t, X_b(t, x)), the flow of the truncated perturbed field from time 1."""
    return composed_flow_between(spec, 1.0, t, x, h)


def composed_flow_between(spec: FieldSpec, s, t, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """X(t, ·) ∘ X(s, ·)^{-1} = X_w(t, ·) ∘ X_b(s -> t) ∘ X_w(s, ·)^{-1}."""
    _require_truncated(spec)
    w = spec.w
    assert w is not None
    pts, single = as_points(x)
    z = inverse_flow_w(w, float(s), pts, h)
    z = flow_points(spec.exact_part, float(s), float(t), z)
    out = flow_w_between(w, 1.0, float(t), z, h, with_jacobian=False).endpoint
    return out[0] if single else out


# ----------------------------------------------------------------------
# direct integration of the assembled field
# ----------------------------------------------------------------------
def _breakpoints(spec: FieldSpec, s: float, t: float) -> List[float]:
    points = [float(p) for seg in stage_schedule(spec.exact_part, s, t)
              for p in (seg.start, seg.end)]
    window = spec.exact_part.truncation_window
    if window is not None:
        points += [float(window[0]), float(window[1])]
    assert spec.w is not None
    return points + list(spec.w.breakpoints)


def _corner_function(spec: FieldSpec, t: float, x: np.ndarray, level: int, h_inner: float):
    """|ξ1| - |ξ2| in the local coordinates of y = X_w^{-1}(t, x), with the active mask."""
    assert spec.w is not None
    y = inverse_flow_w(spec.w, t, x, h_inner)
    centre, xi, filled = local_coordinates(level, y)
    g = np.abs(xi[:, 0]) - np.abs(xi[:, 1])
    active = filled & (np.max(np.abs(xi), axis=1) < 0.5)
    return centre, g, active


def integrate_assembled(spec: FieldSpec, t, x, h: float = DEFAULT_STEP, s: float = 1.0,
                        inner_step: float = INNER_STEP) -> np.ndarray:
    """
    Trajectories of the assembled perturbed field by RK4, independent of the factorised flow.

    Steps are split at stage boundaries, truncation-window ends and envelope breakpoints.
    The field jumps where the pulled-back point crosses a diagonal of its square; steps
    that cross one are located by Illinois regula falsi and restarted on the far side.
    """
    _require_truncated(spec)
    check_time(s)
    check_time(t)
    pts, single = as_points(x)
    s, t = float(s), float(t)
    state = pts.copy()
    times = split_times(s, t, _breakpoints(spec, s, t))
    events = 0
    for a, b in zip(times[:-1], times[1:]):
        lo, hi = min(a, b), max(a, b)
        eps = 1e-12 * max(1.0, hi - lo)

        def rhs(tau, st, lo=lo, hi=hi, eps=eps):
            tt = min(max(tau, lo + eps), hi - eps)
            return (np.asarray(eval_perturbed_field(spec, tt, st[0], inner_step), dtype=float),)

        mid = 0.5 * (a + b)
        stage = stage_at(mid)
        live = stage is not None and not exact_part_vanishes(spec, mid)
        level = spec.lam + stage.k if live and stage is not None else 0
        count = max(1, math.ceil(abs(b - a) / h - 1e-9))
        dt = (b - a) / count
        for i in range(count):
            t0 = a + i * dt
            t0c = min(max(t0, lo + eps), hi - eps)
            t1c = min(max(t0 + dt, lo + eps), hi - eps)
            new = rk4_step(rhs, t0, (state,), dt)[0]
            if live:
                c0, g0, a0 = _corner_function(spec, t0c, state, level, inner_step)
                c1, g1, a1 = _corner_function(spec, t1c, new, level, inner_step)
                crossed = a0 & a1 & np.all(c0 == c1, axis=1) & (np.sign(g0) != np.sign(g1))
                crossed &= (g0 != 0.0)
                for n in np.flatnonzero(crossed):
                    new[n] = _step_through_corner(spec, rhs, t0, state[n], dt, g0[n], g1[n],
                                                  level, inner_step, (lo, hi, eps))
                    events += 1
            state = new
    logger.debug("integrated assembled %s from %s to %s: %d corner events",
                 spec.variant.value, s, t, events)
    return state[0] if single else state


def _step_through_corner(spec, rhs, t0, x, dt, g_lo, g_hi, level, inner_step, clamp):
    lo_t, hi_t, eps = clamp
    point = x.reshape(1, 2)
    sign0 = np.sign(g_lo)
    a, b = 0.0, 1.0
    ga, gb = g_lo, g_hi
    side = 0
    for _ in range(EVENT_ITERATIONS):
        if b - a < 1e-13:
            break
        c = (a * gb - b * ga) / (gb - ga) if gb != ga else 0.5 * (a + b)
        if not a < c < b:
            c = 0.5 * (a + b)
        trial = rk4_step(rhs, t0, (point,), c * dt)[0]
        tc = min(max(t0 + c * dt, lo_t + eps), hi_t - eps)
        _, gc, _ = _corner_function(spec, tc, trial, level, inner_step)
        if np.sign(gc[0]) == sign0:
            a, ga = c, gc[0]
            if side == -1:
                gb *= 0.5
            side = -1
        else:
            b, gb = c, gc[0]
            if side == 1:
                ga *= 0.5
            side = 1
    across = rk4_step(rhs, t0, (point,), b * dt)[0]
    rest = rk4_step(rhs, t0 + b * dt, (across,), (1.0 - b) * dt)[0]
    return rest[0]

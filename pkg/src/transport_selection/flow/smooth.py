"""
Numeric flows of smooth perturbations

X_w(t, x) solves ∂_t X = w(t, X) with X_w(1, x) = x.  The state is integrated together
with the variational matrix M = D_x X (∂_t M = D_x w(t, X) M) by classical RK4 with a
fixed step, restarted at every time breakpoint of the envelope.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from ..errors import StepSizeError, TimeDomainError
from ..fields.smooth import SmoothFieldDef
from ..fields.types import as_points
from ..utils import rk4_step, split_times

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
ANCHOR = 1.0


class FlowResult(NamedTuple):
    """
    Endpoint of a flow with its spatial Jacobian.

    Single-point queries carry shapes (2,), (2, 2) and a scalar; point sets (N, 2),
    (N, 2, 2) and (N,).
    """

    endpoint: np.ndarray
    jacobian_matrix: np.ndarray
    jacobian_det: np.ndarray


def _check(t: float) -> None:
    if not 0.0 <= t <= 2.0:
        raise TimeDomainError(f"time must lie in [0, 2]. Got {t}")


def _integrate(w: SmoothFieldDef, t0: float, t1: float, pts: np.ndarray, h: float,
               with_jacobian: bool):
    n = pts.shape[0]
    x = pts.copy()
    M = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
    if w.is_zero or t0 == t1:
        return x, M

    if with_jacobian:
        def rhs(t, state):
            y, m = state
            return w.value(t, y), np.einsum("nij,njk->nik", w.jacobian(t, y), m)

        state = (x, M)
    else:
        def rhs(t, state):
            return (w.value(t, state[0]),)

        state = (x,)

    steps = 0
    times = split_times(t0, t1, w.breakpoints)
    for a, b in zip(times[:-1], times[1:]):
        count = max(1, math.ceil(abs(b - a) / h - 1e-9))
        dt = (b - a) / count
        for i in range(count):
            state = rk4_step(rhs, a + i * dt, state, dt)
        steps += count
    logger.debug("integrated %s from %.6g to %.6g: %d RK4 steps on %d points",
                 w.name, t0, t1, steps, n)
    if with_jacobian:
        return state[0], state[1]
    return state[0], M


def flow_w_between(w: SmoothFieldDef, s: float, t: float, x, h: float = DEFAULT_STEP,
                   with_jacobian: bool = True) -> FlowResult:
    """
    Flow of w from time s to time t.

    Args:
        w: smooth field
        s: start time in [0, 2]
        t: end time in [0, 2]
        x: point (2,) or points (N, 2)
        h: RK4 step
        with_jacobian: also integrate the variational system (identity otherwise)
    """
    _check(s)
    _check(t)
    pts, single = as_points(x)
    end, M = _integrate(w, float(s), float(t), pts, h, with_jacobian)
    det = np.linalg.det(M)
    if single:
        return FlowResult(end[0], M[0], float(det[0]))
    return FlowResult(end, M, det)


def flow_w(w: SmoothFieldDef, t: float, x, h: float = DEFAULT_STEP,
           tol: Optional[float] = None) -> FlowResult:
    """
    X_w(t, x) with its Jacobian, starting from the anchor time 1.

    With ``tol`` the step is validated by halving: both runs must agree to ``tol`` in the
    endpoint, and the finer result is returned.

    Raises:
        TimeDomainError: t outside [0, 2]
        StepSizeError: halving disagreement above ``tol``
    """
    result = flow_w_between(w, ANCHOR, t, x, h)
    if tol is None:
        return result
    finer = flow_w_between(w, ANCHOR, t, x, h / 2)
    gap = float(np.max(np.abs(np.asarray(result.endpoint) - np.asarray(finer.endpoint))))
    if gap > tol:
        raise StepSizeError(f"step {h} too large for {w.name}: halving changed the endpoint "
                            f"by {gap:.3e} > {tol:.3e}")
    return finer


def inverse_flow_w(w: SmoothFieldDef, t: float, y, h: float = DEFAULT_STEP) -> np.ndarray:
    """X_w^{-1}(t, y): integrate from t back to the anchor."""
    return flow_w_between(w, t, ANCHOR, y, h, with_jacobian=False).endpoint


# ----------------------------------------------------------------------
# estimate checks
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class EstimateRow:
    """Bounds on the flow from the anchor to time t, measured against their envelopes."""

    t: float
    det_min: float
    det_max: float
    det_lower: float
    det_upper: float
    growth_max: float
    growth_bound: float
    mc_min: float
    mc_max: float
    mc_tol: float
    tol: float = 1e-8

    @property
    def det_ok(self) -> bool:
        return self.det_lower - self.tol <= self.det_min and self.det_max <= self.det_upper + self.tol

    @property
    def growth_ok(self) -> bool:
        return self.growth_max <= self.growth_bound * (1.0 + self.tol)

    @property
    def pushforward_ok(self) -> bool:
        return (self.det_lower - self.mc_tol <= self.mc_min
                and self.mc_max <= self.det_upper + self.mc_tol)

    @property
    def passed(self) -> bool:
        return self.det_ok and self.growth_ok and self.pushforward_ok


@dataclass
class EstimateReport:
    field_name: str
    rows: List[EstimateRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self.rows:
            record = {k: getattr(row, k) for k in row.__dataclass_fields__ if k != "tol"}
            record["passed"] = row.passed
            records.append(record)
        frame = pd.DataFrame.from_records(records)
        frame.insert(0, "field", self.field_name)
        return frame


def _support_box(w: SmoothFieldDef):
    radius = max(w.support_radius, 0.5)
    c1, c2 = w.center
    return c1 - radius, c2 - radius, c1 + radius, c2 + radius


def pushforward_density_range(w: SmoothFieldDef, t: float, n_mc: int = 40000, bins: int = 8,
                              seed: int = 0, h: float = DEFAULT_STEP):
    """
    Monte-Carlo density of X_w(t, ·)# L² on the invariant support box.

    Returns:
        (min, max, tol): extreme histogram densities and a 4-sigma sampling tolerance
    """
    x0, y0, x1, y1 = _support_box(w)
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(x0, x1, n_mc), rng.uniform(y0, y1, n_mc)])
    moved = flow_w_between(w, ANCHOR, t, pts, h, with_jacobian=False).endpoint
    counts, _, _ = np.histogram2d(moved[:, 0], moved[:, 1], bins=bins, range=[[x0, x1], [y0, y1]])
    expected = n_mc / bins**2
    density = counts / expected
    return float(density.min()), float(density.max()), 4.0 / math.sqrt(expected)


def estimate_checks(w: SmoothFieldDef, samples=None, times: Sequence[float] = (0.0, 0.5, 1.5, 2.0),
                    h: float = DEFAULT_STEP, n_mc: int = 40000, seed: int = 0) -> EstimateReport:
    """
    Jacobian determinant, Jacobian growth and push-forward density of X_w against
    exp(±∫‖div w‖∞) and exp(∫‖D_x w‖∞).

    Args:
        w: smooth field
        samples: (N, 2) points for the Jacobian checks; 256 seeded points in the support box
            when omitted
        times: end times of the flows from the anchor
        h: RK4 step
        n_mc: Monte-Carlo sample size for the push-forward densities
        seed: random seed
    """
    if samples is None:
        x0, y0, x1, y1 = _support_box(w)
        rng = np.random.default_rng(seed)
        samples = np.column_stack([rng.uniform(x0, x1, 256), rng.uniform(y0, y1, 256)])
    pts, _ = as_points(samples)
    report = EstimateReport(w.name)
    for t in times:
        div = w.integrated_norm("div", ANCHOR, t)
        grad = w.integrated_norm("c1", ANCHOR, t)
        result = flow_w_between(w, ANCHOR, t, pts, h)
        growth = np.linalg.norm(result.jacobian_matrix, ord=2, axis=(-2, -1))
        mc_min, mc_max, mc_tol = pushforward_density_range(w, t, n_mc, seed=seed, h=h)
        row = EstimateRow(
            t=float(t),
            det_min=float(np.min(result.jacobian_det)),
            det_max=float(np.max(result.jacobian_det)),
            det_lower=math.exp(-div),
            det_upper=math.exp(div),
            growth_max=float(np.max(growth)),
            growth_bound=math.exp(grad),
            mc_min=mc_min,
            mc_max=mc_max,
            mc_tol=mc_tol,
        )
        if not row.passed:
            logger.warning("estimate check failed for %s at t=%s: %s", w.name, t, row)
        report.rows.append(row)
    logger.info("estimate checks for %s: %s", w.name, "passed" if report.passed else "FAILED")
    return report

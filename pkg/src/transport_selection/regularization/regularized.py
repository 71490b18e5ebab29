"""
Regularised fields and their solutions

The exact truncated field is mollified through its stream function: on every stage
b = σ_stage ∇^⊥ψ_stage, so b ⋆ θ^k = σ_stage ∇^⊥(ψ_stage ⋆ θ^k) stays divergence-free.
ψ_stage ⋆ θ^k is computed once per stage on a periodic node lattice and interpolated by
a bicubic spline; the field is the spline's rotated gradient.

With ``time_mollify_b`` the stage fields are also blended in time with η^k (the exact
part continued constantly outside [0, 2]).  The assembled field conjugates this
B = (b ⋆_x θ^k) [⋆_t η^k] by the flow of w^k = w ⋆_t η^k:

    b^{q,k}(t, x) = D_x X_{w^k}(t, y) B(t, y) + w^k(t, x),   y = X_{w^k}^{-1}(t, x)
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
import logging
import math
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import interpolate, ndimage

from ..errors import ConstructionError
from ..dyadic.lattice import chessboard
from ..evolution.cells import SolutionVariant, density_points
from ..fields.building_blocks import Segment, check_time, stage_schedule, stream_function
from ..fields.mollifiers import interval_weight, theta_kernel
from ..fields.smooth import ConstantEnvelope, SmoothFieldDef, time_mollify
from ..fields.types import FieldSpec, Orientation, Variant, as_points
from ..flow.smooth import FlowResult, flow_w_between
from ..transport.solutions import PerturbedSolution
from ..utils import midpoint_grid, rk4_step, split_times

logger = logging.getLogger(__name__)

MAX_NODES = 1024
SPLINE_PAD = 4
DEFAULT_STEP = 2e-3
MOLLIFIED = (Variant.MOLLIFIED_SYM, Variant.MOLLIFIED_ASYM)


# ----------------------------------------------------------------------
# mollified stage fields
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class StageStream:
    """ψ_stage ⋆ θ^k on one period, as a bicubic spline."""

    lam: int
    stage: int
    k: int
    orientation: Orientation
    max_nodes: int = MAX_NODES

    @property
    def period(self) -> float:
        return 2.0 ** (1 - self.lam - self.stage)

    @cached_property
    def nodes(self) -> int:
        target = max(self.period * 4.0 * self.k, 16.0)
        n = 1 << math.ceil(math.log2(target))
        if n > self.max_nodes:
            logger.warning("stage %d needs %d nodes per axis for k=%d; capped at %d",
                           self.stage, n, self.k, self.max_nodes)
            n = self.max_nodes
        return n

    @cached_property
    def spline(self) -> interpolate.RectBivariateSpline:
        n = self.nodes
        h = self.period / n
        axis = np.arange(n) * h
        X1, X2 = np.meshgrid(axis, axis, indexing="ij")
        psi = stream_function(self.lam, self.stage, np.column_stack([X1.ravel(), X2.ravel()]),
                              self.orientation).reshape(n, n)
        smooth = ndimage.convolve(psi, theta_kernel(self.k, h), mode="grid-wrap")
        padded = np.pad(smooth, SPLINE_PAD, mode="wrap")
        coords = (np.arange(n + 2 * SPLINE_PAD) - SPLINE_PAD) * h
        logger.debug("mollified stream function: stage %d, k=%d, %d^2 nodes", self.stage,
                     self.k, n)
        return interpolate.RectBivariateSpline(coords, coords, padded, kx=3, ky=3, s=0)

    def _local(self, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        local = np.mod(pts, self.period)
        return local[:, 0], local[:, 1]

    def field(self, pts: np.ndarray) -> np.ndarray:
        """∇^⊥(ψ ⋆ θ^k) = (-∂2, ∂1)."""
        a, b = self._local(pts)
        out = np.empty_like(pts)
        out[:, 0] = -self.spline.ev(a, b, dx=0, dy=1)
        out[:, 1] = self.spline.ev(a, b, dx=1, dy=0)
        return out

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        a, b = self._local(pts)
        p11 = self.spline.ev(a, b, dx=2, dy=0)
        p12 = self.spline.ev(a, b, dx=1, dy=1)
        p22 = self.spline.ev(a, b, dx=0, dy=2)
        J = np.empty((pts.shape[0], 2, 2))
        J[:, 0, 0], J[:, 0, 1] = -p12, -p22
        J[:, 1, 0], J[:, 1, 1] = p11, p12
        return J


class _Term(NamedTuple):
    weight: float
    segment: Segment


class MollifiedField:
    """
    B = b^q ⋆_x θ^k, optionally ⋆_t η^k, for a truncated exact field.

    Attributes:
        base: TRUNC_SYM or TRUNC_ASYM spec
        k: mollification index
        time_mollify: also convolve the exact part in time
    """

    def __init__(self, base: FieldSpec, k: int, time_mollify: bool = True,
                 max_nodes: int = MAX_NODES):
        if base.variant not in (Variant.TRUNC_SYM, Variant.TRUNC_ASYM):
            raise ConstructionError(
                f"mollification needs a truncated exact field. Got {base.variant.value}"
            )
        if k < 1:
            raise ConstructionError(f"mollification index must be >= 1. Got {k}")
        self.base = base
        self.k = k
        self.time_mollify = time_mollify
        self.segments: List[Segment] = stage_schedule(base, 0, 2)
        self._streams = {
            seg.stage.k: StageStream(base.lam, seg.stage.k, k, base.orientation, max_nodes)
            for seg in self.segments
        }

    def stream(self, stage: int) -> StageStream:
        return self._streams[stage]

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        edges = {float(p) for seg in self.segments for p in (seg.start, seg.end)}
        return tuple(sorted(edges))

    def terms(self, t: float) -> List[_Term]:
        """Stage fields contributing at t, with their weights."""
        t = float(t)
        if not self.time_mollify:
            for seg in self.segments:
                last = seg is self.segments[-1]
                if seg.start <= t < seg.end or (last and t == seg.end):
                    return [_Term(1.0, seg)]
            return []
        terms = []
        for i, seg in enumerate(self.segments):
            start = -math.inf if (i == 0 and seg.start == 0) else float(seg.start)
            end = math.inf if (i == len(self.segments) - 1 and seg.end == 2) else float(seg.end)
            if t - end >= 1.0 / self.k or start - t >= 1.0 / self.k:
                continue
            weight = interval_weight(t, max(start, t - 2.0), min(end, t + 2.0), self.k)
            if weight > 0.0:
                terms.append(_Term(weight, seg))
        return terms

    def value(self, t: float, x) -> np.ndarray:
        pts, single = as_points(x)
        out = np.zeros_like(pts)
        for weight, seg in self.terms(t):
            out += weight * seg.sign * self.stream(seg.stage.k).field(pts)
        return out[0] if single else out

    def jacobian(self, t: float, x) -> np.ndarray:
        pts, single = as_points(x)
        out = np.zeros((pts.shape[0], 2, 2))
        for weight, seg in self.terms(t):
            out += weight * seg.sign * self.stream(seg.stage.k).jacobian(pts)
        return out[0] if single else out


@lru_cache(maxsize=32)
def mollified_field(base: FieldSpec, k: int, time_mollify: bool = True) -> MollifiedField:
    return MollifiedField(base, k, time_mollify)


def mollify_space(spec: FieldSpec, k: int, t, x) -> np.ndarray:
    """(b^q ⋆_x θ^k)(t, x) for a truncated exact field (no time mollification)."""
    check_time(t)
    return mollified_field(spec.exact_part, k, False).value(float(t), x)


def _check_mollified(spec: FieldSpec) -> None:
    if spec.variant not in MOLLIFIED:
        raise ConstructionError(f"expected a mollified field. Got {spec.variant.value}")


def _parts(spec: FieldSpec) -> Tuple[MollifiedField, SmoothFieldDef]:
    _check_mollified(spec)
    assert spec.k is not None and spec.w is not None
    return mollified_field(spec.exact_part, spec.k, spec.time_mollify_b), time_mollify(spec.w,
                                                                                         spec.k)


def assemble_regularized(spec: FieldSpec, t, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """b^{q,k}_{λ,w}(t, x) or its asymmetric counterpart."""
    check_time(t)
    mf, wk = _parts(spec)
    pts, single = as_points(x)
    t = float(t)
    if wk.is_zero:
        out = mf.value(t, pts)
    else:
        back = flow_w_between(wk, t, 1.0, pts, h)
        forward_jacobian = np.linalg.inv(back.jacobian_matrix)
        out = np.einsum("nij,nj->ni", forward_jacobian, mf.value(t, back.endpoint))
        out = out + wk.value(t, pts)
    return out[0] if single else out


# ----------------------------------------------------------------------
# flows Z and Y
# ----------------------------------------------------------------------
def flow_Z(mf: MollifiedField, s: float, t: float, x, h: float = DEFAULT_STEP,
           with_jacobian: bool = True) -> FlowResult:
    """Flow of B from s to t by RK4 with the variational matrix."""
    check_time(s)
    check_time(t)
    pts, single = as_points(x)
    state = (pts.copy(), np.broadcast_to(np.eye(2), (pts.shape[0], 2, 2)).copy())
    times = split_times(float(s), float(t), mf.breakpoints)
    for a, b in zip(times[:-1], times[1:]):
        lo, hi = min(a, b), max(a, b)
        eps = 1e-12

        def rhs(tau, st, lo=lo, hi=hi, eps=eps):
            tt = min(max(tau, lo + eps), hi - eps)
            y, m = st
            if not with_jacobian:
                return mf.value(tt, y), np.zeros_like(m)
            return mf.value(tt, y), np.einsum("nij,njk->nik", mf.jacobian(tt, y), m)

        count = max(1, math.ceil(abs(b - a) / h - 1e-9))
        dt = (b - a) / count
        for i in range(count):
            state = rk4_step(rhs, a + i * dt, state, dt)
    end, M = state
    det = np.linalg.det(M)
    if single:
        return FlowResult(end[0], M[0], float(det[0]))
    return FlowResult(end, M, det)


def _chain(*results: FlowResult) -> FlowResult:
    """Compose flow results applied in order (the last one is outermost)."""
    M = results[0].jacobian_matrix
    for r in results[1:]:
        M = np.einsum("...ij,...jk->...ik", r.jacobian_matrix, M)
    return FlowResult(results[-1].endpoint, M, np.linalg.det(M))


def flow_Y(spec: FieldSpec, anchor: int, t, x, h: float = DEFAULT_STEP) -> FlowResult:
    """
    Y_1(t, x) = X_{w^k}(t, Z(1 -> t, x));
    Y_0(t, x) = X_{w^k}(t, Z(0 -> t, X_{w^k}^{-1}(0, x))).
    """
    if anchor not in (0, 1):
        raise ConstructionError(f"anchor must be 0 or 1. Got {anchor}")
    mf, wk = _parts(spec)
    pts, single = as_points(x)
    t = float(t)
    steps = []
    start = 1.0
    if anchor == 0:
        steps.append(flow_w_between(wk, 0.0, 1.0, pts, h))
        pts = steps[-1].endpoint
        start = 0.0
    steps.append(flow_Z(mf, start, t, pts, h))
    steps.append(flow_w_between(wk, 1.0, t, steps[-1].endpoint, h))
    out = _chain(*steps)
    if single:
        return FlowResult(out.endpoint[0], out.jacobian_matrix[0], float(out.jacobian_det[0]))
    return out


# ----------------------------------------------------------------------
# solutions
# ----------------------------------------------------------------------
Box = Tuple[float, float, float, float]


def _same_perturbation(w: SmoothFieldDef) -> bool:
    """w^k = w exactly (time-constant envelope or zero field)."""
    return w.is_zero or isinstance(w.envelope, ConstantEnvelope)


def _box_grid(box: Box, level: int):
    s = 2.0**-level
    box = (math.floor(box[0] / s) * s, math.floor(box[1] / s) * s,
           math.ceil(box[2] / s) * s, math.ceil(box[3] / s) * s)
    n1 = int(round((box[2] - box[0]) / s))
    n2 = int(round((box[3] - box[1]) / s))
    return midpoint_grid(box, n1, n2)


class RegularizedSolution:
    """
    ρ^{q,k}(t) L² = Y_0(t, ·)# ρ̄ L², with ρ̄ L² = X_w(0, ·)# ζ̄_λ L².

    Pairings push the datum's cells forward; densities pull points back along Y_0.
    """

    def __init__(self, spec: FieldSpec, h: float = DEFAULT_STEP, level: Optional[int] = None):
        _check_mollified(spec)
        self.spec = spec
        self.mf, self.wk = _parts(spec)
        assert spec.w is not None and spec.q is not None
        self.w = spec.w
        self.h = h
        self.level = spec.lam + 5 if level is None else level
        self.branch = (SolutionVariant.trunc_sym(spec.q) if spec.is_symmetric
                       else SolutionVariant.trunc_asym(spec.q))

    # -- forward transport of the datum cells --------------------------
    def _start_points(self, y: np.ndarray) -> np.ndarray:
        """X_{w^k}^{-1}(0, X_w(0, y)): where Z starts for datum cell y."""
        if _same_perturbation(self.w):
            return y
        x0 = flow_w_between(self.w, 1.0, 0.0, y, self.h, with_jacobian=False).endpoint
        return flow_w_between(self.wk, 0.0, 1.0, x0, self.h, with_jacobian=False).endpoint

    def z_snapshots(self, y: np.ndarray, times: Sequence[float]) -> List[np.ndarray]:
        """Z(0 -> t, ·) applied to the start points of ``y``, for increasing ``times``."""
        order = np.argsort(times)
        out: List[np.ndarray] = [np.empty(0)] * len(times)
        current, clock = self._start_points(y), 0.0
        for idx in order:
            t = float(times[idx])
            if t > clock:
                current = flow_Z(self.mf, clock, t, current, self.h, with_jacobian=False).endpoint
                clock = t
            out[idx] = current
        return out

    def default_box(self, radius: float, extra: Optional[Box] = None) -> Box:
        margin = 2.0**-self.spec.lam + 1.0 / self.mf.k
        box = (-radius, -radius, radius, radius)
        reach = self.w.support_radius
        if reach > 0:
            c1, c2 = self.w.center
            box = (min(box[0], c1 - reach), min(box[1], c2 - reach), max(box[2], c1 + reach),
                   max(box[3], c2 + reach))
        if extra is not None:
            box = (min(box[0], extra[0]), min(box[1], extra[1]), max(box[2], extra[2]),
                   max(box[3], extra[3]))
        return box[0] - margin, box[1] - margin, box[2] + margin, box[3] + margin

    def pairings(self, times: Sequence[float], phis: Union[Sequence, Callable[[float], Sequence]],
                 box: Box) -> List[np.ndarray]:
        """
        ∫ ρ^{q,k}(t) φ for every time and test function, by forward transport of the datum.

        ``phis`` is either one list of test functions or a map t -> list, for test functions
        that move with t. One row of pairings is returned per time.
        """
        y, area = _box_grid(box, self.level)
        datum = chessboard(self.spec.lam, y).astype(float)
        snaps = self.z_snapshots(y, times)
        rows = []
        for t, z in zip(times, snaps):
            t = float(t)
            x = None
            current = phis(t) if callable(phis) else phis
            row = np.empty(len(current))
            for j, phi in enumerate(current):
                pulled = getattr(phi, "pulled_back", None)
                if (pulled is not None and _same_perturbation(self.w) and phi.w == self.w
                        and phi.t == t):
                    weights = pulled(z)
                else:
                    if x is None:
                        x = flow_w_between(self.wk, 1.0, t, z, self.h,
                                           with_jacobian=False).endpoint
                    weights = phi.value(x)
                row[j] = float(np.sum(weights * datum) * area)
            rows.append(row)
        return rows

    def pairing(self, t: float, phi, box: Optional[Box] = None) -> float:
        box = self.default_box(0.0, phi.bounding_box) if box is None else box
        return float(self.pairings([t], [phi], box)[0][0])

    # -- pointwise densities -------------------------------------------
    def density(self, t, x) -> np.ndarray:
        """ρ^{q,k}(t, x) = ρ̄(Y_0^{-1}(t, x)) det D_x Y_0^{-1}(t, x)."""
        pts, single = as_points(x)
        t = float(t)
        a = flow_w_between(self.wk, t, 1.0, pts, self.h)
        b = flow_Z(self.mf, t, 0.0, a.endpoint, self.h)
        c = flow_w_between(self.wk, 1.0, 0.0, b.endpoint, self.h)
        d = flow_w_between(self.w, 0.0, 1.0, c.endpoint, self.h)
        chain = _chain(a, b, c, d)
        out = chessboard(self.spec.lam, chain.endpoint).astype(float) * chain.jacobian_det
        return out[0] if single else out

    # -- distance to the unregularised solution ------------------------
    def l1_distances(self, times: Sequence[float], radius: float) -> np.ndarray:
        """∫_{B_radius(0)} |ρ^{q,k}(t) - ρ^q(t)| dx for every t."""
        if radius <= 0:
            return np.zeros(len(times))
        if _same_perturbation(self.w):
            return self._l1_forward(times, radius)
        return self._l1_pointwise(times, radius)

    def l1_distance_to_exact(self, t: float, radius: float) -> float:
        return float(self.l1_distances([t], radius)[0])

    def _l1_forward(self, times: Sequence[float], radius: float) -> np.ndarray:
        # x = X_w(t, Z(0 -> t, y)): both densities are X_w(t)# of densities in z,
        # and Z preserves measure, so the datum value travels with the cell
        y, area = _box_grid(self.default_box(radius), self.level)
        datum = chessboard(self.spec.lam, y).astype(float)
        snaps = self.z_snapshots(y, times)
        out = np.empty(len(times))
        for i, (t, z) in enumerate(zip(times, snaps)):
            x = flow_w_between(self.w, 1.0, float(t), z, self.h, with_jacobian=False).endpoint
            inside = np.hypot(x[:, 0], x[:, 1]) < radius
            exact = density_points(self.spec.lam, self.branch, float(t), z,
                                   self.spec.reflection_sign, self.spec.orientation)
            out[i] = float(np.sum(inside * np.abs(datum - exact)) * area)
        return out

    def _l1_pointwise(self, times: Sequence[float], radius: float) -> np.ndarray:
        exact = PerturbedSolution(self.spec.lam, self.w, self.branch, self.spec.reflection_sign,
                                  self.spec.orientation, self.h)
        x, area = _box_grid((-radius, -radius, radius, radius), self.level)
        x = x[np.hypot(x[:, 0], x[:, 1]) < radius]
        return np.array([
            float(np.sum(np.abs(self.density(t, x) - exact.density(t, x))) * area)
            for t in times
        ])


def solve_regularized(spec: FieldSpec, h: float = DEFAULT_STEP,
                      level: Optional[int] = None) -> RegularizedSolution:
    return RegularizedSolution(spec, h, level)


def anchor_envelope(w: SmoothFieldDef, factor: float = 3.0) -> Tuple[float, float]:
    """Bounds exp(∓factor ∫_0^2 ‖div w‖∞) for the Jacobian of Y_0."""
    spread = factor * w.integrated_norm("div", 0.0, 2.0)
    return math.exp(-spread), math.exp(spread)


def anchor_compressibility(spec: FieldSpec, times: Sequence[float], points: np.ndarray,
                           h: float = DEFAULT_STEP, tol: float = 1e-3) -> pd.DataFrame:
    """det D_x Y_0(t, x) at the given points against the anchor-0 envelope."""
    _, wk = _parts(spec)
    lower, upper = anchor_envelope(wk)
    rows = []
    for t in times:
        det = np.atleast_1d(flow_Y(spec, 0, t, points, h).jacobian_det)
        rows.append(dict(t=float(t), det_min=float(det.min()), det_max=float(det.max()),
                         lower=lower, upper=upper,
                         passed=bool(det.min() >= lower - tol and det.max() <= upper + tol)))
    frame = pd.DataFrame(rows)
    logger.info("anchor-0 compressibility of %s: %d/%d times inside the envelope",
                spec.variant.value, int(frame["passed"].sum()), len(frame))
    return frame

"""
Quantitative checks on the perturbed fields: L^p distance to w, the unboundedness
diagnostic, TV boundedness and compressibility certificates.
"""
from dataclasses import dataclass, field
from functools import cached_property
import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import ConstructionError
from ..fields.building_blocks import eval_b, stage_at, sup_norm
from ..fields.smooth import SmoothFieldDef
from ..fields.total_variation import tv_density_exact, tv_estimate
from ..fields.types import FieldSpec
from ..flow.smooth import flow_w_between
from ..utils import WrapToWindow, gauss_nodes, tensor_gauss
from ..flow.exact import flow_points
from .perturbed import (
    composed_flow,
    eval_perturbed_field,
    exact_part_vanishes,
    integrate_assembled,
)

logger = logging.getLogger(__name__)

Box = Tuple[float, float, float, float]


# ----------------------------------------------------------------------
# L^p distance to w
# ----------------------------------------------------------------------
def lp_distance_zero_w(lam: int, p: float, window: Box = (0.0, 0.0, 1.0, 1.0),
                       t_range: Tuple[float, float] = (0.0, 2.0)) -> float:
    """
    ‖b_λ‖_{L^p} over t_range x window in closed form, for windows aligned with 2^-λ cells.

    Every aligned cell is half covered by filled squares, and a filled square carries
    ∫|v|^p = 2^(p+1) / (p + 2), so the mean of |b_λ|^p is 2^(-λp) 2^p / (p + 2).
    """
    x0, y0, x1, y1 = window
    volume = (t_range[1] - t_range[0]) * (x1 - x0) * (y1 - y0)
    mean = 2.0 ** (-lam * p) * 2.0**p / (p + 2.0)
    return (volume * mean) ** (1.0 / p)


def _time_rule(t_range: Tuple[float, float], depth: int, order: int):
    """Gauss nodes on each stage interval of depth < ``depth``; one panel across t = 1."""
    edges = [0.0] + [1.0 - 2.0**-k for k in range(1, depth + 1)]
    edges += [1.0 + 2.0**-k for k in range(depth, 0, -1)] + [2.0]
    lo, hi = t_range
    cuts = sorted({lo, hi, *(e for e in edges if lo < e < hi)})
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        x, wts = gauss_nodes(order, a, b)
        nodes.append(x)
        weights.append(wts)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class LpDistance:
    lam: int
    p: float
    distance: float
    printed_bound: float
    rigorous_bound: float

    @property
    def within_bound(self) -> bool:
        return self.distance <= self.rigorous_bound * (1.0 + 1e-9)


@dataclass
class LpDistanceQuadrature:
    """
    Tensor Gauss quadrature of ‖b_{λ,w} - w‖_{L^p(K)} on K = t_range x window.

    The pulled-back nodes y = X_w^{-1}(t, x) and Jacobians D_x X_w(t, y) do not depend
    on λ and are computed once.
    """

    w: SmoothFieldDef
    window: Box = (0.0, 0.0, 1.0, 1.0)
    t_range: Tuple[float, float] = (0.0, 2.0)
    cells: int = 45
    order: int = 2
    depth: int = 8
    inner_step: float = 1e-2

    @cached_property
    def _nodes(self):
        points, weights = tensor_gauss(self.window, self.cells, self.order)
        times, t_weights = _time_rule(self.t_range, self.depth, self.order)
        pulled, jacobians = [], []
        for t in times:
            if self.w.is_zero:
                pulled.append(points)
                jacobians.append(None)
                continue
            back = flow_w_between(self.w, float(t), 1.0, points, self.inner_step)
            pulled.append(back.endpoint)
            jacobians.append(np.linalg.inv(back.jacobian_matrix))
        logger.debug("L^p quadrature for %s: %d time nodes x %d space nodes",
                     self.w.name, len(times), len(points))
        return points, weights, times, t_weights, pulled, jacobians

    @property
    def volume(self) -> float:
        x0, y0, x1, y1 = self.window
        return (self.t_range[1] - self.t_range[0]) * (x1 - x0) * (y1 - y0)

    def bounds(self, lam: int, p: float) -> Tuple[float, float]:
        """(printed, rigorous) upper bounds on the distance."""
        w, b_sup = self.w, float(sup_norm(lam))
        printed = (self.volume * math.exp(
            w.integrated_norm("c0", 1.0, 2.0) + w.integrated_norm("c1", 1.0, 2.0)
            + w.integrated_norm("div", 1.0, 2.0)
        )) ** (1.0 / p) * b_sup
        growth = math.exp(max(w.integrated_norm("c1", 1.0, a) for a in self.t_range))
        # ∫_{X^{-1}(K)} J dy = |K|, so only the Jacobian growth enters
        rigorous = self.volume ** (1.0 / p) * growth * b_sup
        return printed, rigorous

    def distance(self, lam: int, p: float = 1.0, reflection_sign: int = -1) -> LpDistance:
        if p < 1:
            raise ConstructionError(f"p must be >= 1. Got {p}")
        _, weights, times, t_weights, pulled, jacobians = self._nodes
        total = 0.0
        for t, tw, y, DX in zip(times, t_weights, pulled, jacobians):
            b = np.asarray(eval_b(lam, float(t), y, reflection_sign), dtype=float)
            if DX is not None:
                b = np.einsum("nij,nj->ni", DX, b)
            total += tw * float(np.sum(weights * np.hypot(b[:, 0], b[:, 1]) ** p))
        printed, rigorous = self.bounds(lam, p)
        return LpDistance(lam, p, total ** (1.0 / p), printed, rigorous)

    def ladder(self, lams: Sequence[int], p: float = 1.0) -> pd.DataFrame:
        rows = []
        previous = None
        for lam in lams:
            d = self.distance(lam, p)
            ratio = d.distance / previous if previous else float("nan")
            rows.append({
                "field": self.w.name, "lam": lam, "p": p, "distance": d.distance,
                "ratio": ratio, "printed_bound": d.printed_bound,
                "rigorous_bound": d.rigorous_bound, "within_bound": d.within_bound,
            })
            previous = d.distance
        return pd.DataFrame.from_records(rows)


def lp_distance_to_w(lam: int, w: SmoothFieldDef, p: float = 1.0,
                     window: Box = (0.0, 0.0, 1.0, 1.0), **quadrature) -> LpDistance:
    """‖b_{λ,w} - w‖_{L^p([0,2] x window)} with its upper bounds."""
    return LpDistanceQuadrature(w, window, **quadrature).distance(lam, p)


# ----------------------------------------------------------------------
# unboundedness diagnostic
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class NormRow:
    start: float
    end: float
    w_sup: float
    conjugated_sup: float
    field_sup: float

    @property
    def triangle_lower_bound(self) -> float:
        """‖w‖ - ‖D_x X_w · b_λ‖ ≤ ‖b_{λ,w}‖."""
        return self.w_sup - self.conjugated_sup


def unboundedness_diagnostic(lam: int, w: SmoothFieldDef,
                             intervals: Sequence[Tuple[float, float]], samples: int = 48,
                             times: int = 6, h: float = 1e-2) -> pd.DataFrame:
    """
    Sup-norms of w, of the conjugated exact part and of the assembled field per time
    interval, sampled on a grid over the support box of w.
    """
    spec = FieldSpec.perturbed(lam, w)
    c1, c2 = w.center
    R = max(w.support_radius, 0.5)
    axis1 = np.linspace(c1 - R, c1 + R, samples) + R / (7.0 * samples)
    axis2 = np.linspace(c2 - R, c2 + R, samples) + R / (3.0 * samples)
    X1, X2 = np.meshgrid(axis1, axis2, indexing="ij")
    pts = np.column_stack([X1.ravel(), X2.ravel()])
    rows = []
    for a, b in intervals:
        w_sup = conj_sup = field_sup = 0.0
        for t in np.linspace(a, b, times + 2)[1:-1]:
            value = np.asarray(eval_perturbed_field(spec, t, pts, h), dtype=float)
            wv = w.value(t, pts)
            w_sup = max(w_sup, float(np.max(np.hypot(wv[:, 0], wv[:, 1]))))
            diff = value - wv
            conj_sup = max(conj_sup, float(np.max(np.hypot(diff[:, 0], diff[:, 1]))))
            field_sup = max(field_sup, float(np.max(np.hypot(value[:, 0], value[:, 1]))))
        row = NormRow(a, b, w_sup, conj_sup, field_sup)
        rows.append({**row.__dict__, "triangle_lower_bound": row.triangle_lower_bound})
    frame = pd.DataFrame.from_records(rows)
    frame.insert(0, "lam", lam)
    frame.insert(0, "field", w.name)
    return frame


# ----------------------------------------------------------------------
# TV boundedness
# ----------------------------------------------------------------------
@dataclass
class TVReport:
    t: float
    resolutions: List[float]
    estimates: List[float]
    bound: float

    @property
    def stabilised(self) -> bool:
        if len(self.estimates) < 2:
            return True
        last, prev = self.estimates[-1], self.estimates[-2]
        return abs(last - prev) <= 0.1 * max(abs(last), 1e-12)

    @property
    def passed(self) -> bool:
        return max(self.estimates) <= self.bound and self.stabilised

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "h": self.resolutions, "tv": self.estimates,
                             "bound": self.bound})


def tv_bound(spec: FieldSpec, t: float, window: Box) -> float:
    """
    e^{2 D1 + Ddiv} √2 |Db|(Z(window)) + C2 e^{4 D1} ‖b‖∞ |window| + √2 ‖Dw(t)‖∞ |window|

    with D1 = |∫_1^t ‖D_x w‖∞|, Ddiv = |∫_1^t ‖div w‖∞|, C2 = |∫_1^t ‖D²_x w‖∞|, and Z(window)
    covered by whole periods of the active stage.
    """
    w = spec.w
    assert w is not None
    x0, y0, x1, y1 = window
    area = (x1 - x0) * (y1 - y0)
    d1 = w.integrated_norm("c1", 1.0, t)
    ddiv = w.integrated_norm("div", 1.0, t)
    c2 = w.integrated_norm("c2", 1.0, t)
    tv_w = math.sqrt(2.0) * w.norms(t).c1 * area
    if exact_part_vanishes(spec, t):
        return tv_w
    stage = stage_at(t)
    assert stage is not None
    period = 2.0 ** (1 - spec.lam - stage.k)
    area_z = math.exp(ddiv) * (x1 - x0 + 2 * period) * (y1 - y0 + 2 * period)
    exact = math.exp(2 * d1 + ddiv) * math.sqrt(2.0) * tv_density_exact(stage.k) * area_z
    smooth = c2 * math.exp(4 * d1) * float(sup_norm(spec.lam)) * area
    return exact + smooth + tv_w


def tv_boundedness_check(spec: FieldSpec, t: float, window: Box,
                         resolutions: Sequence[float] = (1 / 32, 1 / 64, 1 / 128),
                         h_flow: float = 1e-2) -> TVReport:
    """TV estimates of the assembled field at time t under grid refinement, with the bound."""
    estimates = [
        tv_estimate(lambda pts: eval_perturbed_field(spec, t, pts, h_flow), window, res)
        for res in resolutions
    ]
    report = TVReport(float(t), list(resolutions), estimates, tv_bound(spec, t, window))
    logger.info("TV at t=%s: %s (bound %.4g)", t, ["%.4g" % e for e in estimates], report.bound)
    return report


# ----------------------------------------------------------------------
# compressibility
# ----------------------------------------------------------------------
def _density_range(points: np.ndarray, box: Box, bins: int):
    x0, y0, x1, y1 = box
    counts, _, _ = np.histogram2d(points[:, 0], points[:, 1], bins=bins, range=[[x0, x1], [y0, y1]])
    expected = points.shape[0] / bins**2
    density = counts / expected
    return float(density.min()), float(density.max()), 4.0 / math.sqrt(expected)


@dataclass(frozen=True)
class CompressibilityRow:
    t: float
    composed_min: float
    composed_max: float
    w_min: float
    w_max: float
    lower: float
    upper: float
    mc_tol: float

    @property
    def within_envelope(self) -> bool:
        return (self.lower - self.mc_tol <= self.composed_min
                and self.composed_max <= self.upper + self.mc_tol)

    @property
    def factorises(self) -> bool:
        """The exact part is measure preserving: both flows push L² forward alike."""
        return (abs(self.composed_min - self.w_min) <= 2 * self.mc_tol
                and abs(self.composed_max - self.w_max) <= 2 * self.mc_tol)

    @property
    def passed(self) -> bool:
        return self.within_envelope


@dataclass
class CompressibilityReport:
    spec_label: str
    constant: float
    rows: List[CompressibilityRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame.from_records(
            [{**r.__dict__, "within_envelope": r.within_envelope, "factorises": r.factorises}
             for r in self.rows]
        )
        frame.insert(0, "constant", self.constant)
        frame.insert(0, "spec", self.spec_label)
        return frame


def periodic_box(spec: FieldSpec) -> Box:
    """Square centred at the origin, whole periods of b_λ wide, containing the support of w."""
    w = spec.w
    assert w is not None
    period = 2.0 ** (1 - spec.lam)
    reach = max(abs(w.center[0]), abs(w.center[1])) + w.support_radius
    side = period * max(1, math.ceil(2.0 * reach / period))
    return -side / 2, -side / 2, side / 2, side / 2


def compressibility_certificate(spec: FieldSpec, times: Sequence[float] = (0.0, 0.5, 1.5, 2.0),
                                n_mc: int = 40000, bins: int = 8, seed: int = 0,
                                h: float = 1e-2) -> CompressibilityReport:
    """
    Monte-Carlo push-forward densities of the composed flow from time 1 on a periodic box,
    against exp(±|∫_1^t ‖div w‖∞|).

    The exact part is periodic, so it acts on the box as a torus map; w keeps the box.
    """
    w = spec.w
    assert w is not None
    box = periodic_box(spec)
    x0, y0, x1, y1 = box
    side = x1 - x0
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(x0, x1, n_mc), rng.uniform(y0, y1, n_mc)])
    constant = math.exp(max(w.integrated_norm("div", 1.0, a) for a in (0.0, 2.0)))
    report = CompressibilityReport(spec.variant.value, constant)
    for t in times:
        div = w.integrated_norm("div", 1.0, t)
        exact_moved = WrapToWindow(_exact_flow_from_one(spec, t, pts), (x0, y0), side)
        composed = flow_w_between(w, 1.0, t, exact_moved, h, with_jacobian=False).endpoint
        only_w = flow_w_between(w, 1.0, t, pts, h, with_jacobian=False).endpoint
        c_min, c_max, tol = _density_range(composed, box, bins)
        w_min, w_max, _ = _density_range(only_w, box, bins)
        row = CompressibilityRow(float(t), c_min, c_max, w_min, w_max, math.exp(-div),
                                 math.exp(div), tol)
        if not row.passed:
            logger.warning("compressibility envelope violated at t=%s: %s", t, row)
        report.rows.append(row)
    return report


def _exact_flow_from_one(spec: FieldSpec, t: float, pts: np.ndarray) -> np.ndarray:
    return flow_points(spec.exact_part, 1.0, float(t), pts)


def composed_vs_direct(spec: FieldSpec, t: float, points: np.ndarray, h: float = 1e-3,
                       inner_step: float = 2e-2) -> Dict[str, float]:
    """Max gap between the factorised flow and direct integration of the assembled field."""
    factorised = composed_flow(spec, t, points, h)
    direct = integrate_assembled(spec, t, points, h, inner_step=inner_step)
    gap = np.max(np.abs(np.asarray(factorised) - np.asarray(direct)))
    return {"t": float(t), "points": int(np.asarray(points).reshape(-1, 2).shape[0]),
            "max_gap": float(gap)}

"""
Push-forward solutions along the perturbed fields

    ρ(t, ·) L² = X_w(t, ·)# ζ(t, ·) L²,     ρ̄ L² = X_w(0, ·)# ζ̄_λ L²

Pairings are computed by the forward change of variables ∫ φ(X_w(t, y)) ζ(t, y) dy;
pointwise densities by ρ(t, x) = ζ(t, y) / J X_w(t, y) with y = X_w^{-1}(t, x).
"""
from dataclasses import dataclass
import logging
import math
from typing import Optional, Protocol, Tuple

import numpy as np

from ..dyadic.grid import CellGrid, Window
from ..dyadic.lattice import SquareId, chessboard
from ..evolution.cells import SolutionKind, SolutionVariant, density_points
from ..fields.smooth import SmoothFieldDef
from ..fields.types import FieldSpec, Orientation, as_points
from ..flow.smooth import flow_w_between
from ..utils import midpoint_grid

logger = logging.getLogger(__name__)

Box = Tuple[float, float, float, float]
PAIRING_STEP = 1e-2


class PairingFunction(Protocol):
    def value(self, x: np.ndarray) -> np.ndarray: ...

    @property
    def bounding_box(self) -> Box: ...


@dataclass(frozen=True)
class TransportedIndicator:
    """φ = 1_{X_w(t, S)}: the indicator of a dyadic square carried by the flow of w."""

    square: SquareId
    w: SmoothFieldDef
    t: float
    h: float = PAIRING_STEP

    def value(self, x: np.ndarray) -> np.ndarray:
        pts, _ = as_points(x)
        y = flow_w_between(self.w, self.t, 1.0, pts, self.h, with_jacobian=False).endpoint
        return self.pulled_back(y)

    def pulled_back(self, y: np.ndarray) -> np.ndarray:
        """1_S(y): the test function composed with X_w(t, ·)."""
        x0, y0 = (float(c) for c in self.square.lower)
        s = float(self.square.side)
        return ((y[:, 0] >= x0) & (y[:, 0] < x0 + s) & (y[:, 1] >= y0)
                & (y[:, 1] < y0 + s)).astype(float)

    @property
    def bounding_box(self) -> Box:
        x0, y0 = (float(c) for c in self.square.lower)
        s = float(self.square.side)
        reach = self.w.support_radius
        c1, c2 = self.w.center
        return (min(x0, c1 - reach), min(y0, c2 - reach), max(x0 + s, c1 + reach),
                max(y0 + s, c2 + reach))


def _union(a: Box, b: Box) -> Box:
    return min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3])


def _aligned(box: Box, level: int) -> Box:
    s = 2.0**-level
    return (math.floor(box[0] / s) * s, math.floor(box[1] / s) * s,
            math.ceil(box[2] / s) * s, math.ceil(box[3] / s) * s)


@dataclass(frozen=True)
class InitialDatum:
    """ρ̄ with ρ̄ L² = X_w(0, ·)# ζ̄_λ L², kept as the pair (ζ̄_λ, X_w(0, ·))."""

    lam: int
    w: SmoothFieldDef
    h: float = PAIRING_STEP

    def value(self, x) -> np.ndarray:
        pts, single = as_points(x)
        back = flow_w_between(self.w, 0.0, 1.0, pts, self.h)
        out = chessboard(self.lam, back.endpoint).astype(float) * back.jacobian_det
        return out[0] if single else out

    def to_grid(self, level: int, window: Window) -> CellGrid:
        """Cell-centre samples on level-``level`` cells (lossy, for export)."""
        (o1, o2), (n1, n2) = window.cells(level)
        s = 2.0**-level
        box = (o1 * s, o2 * s, (o1 + n1) * s, (o2 + n2) * s)
        pts, _ = midpoint_grid(box, n1, n2)
        return CellGrid(level, (o1, o2), self.value(pts).reshape(n1, n2))


@dataclass(frozen=True)
class PerturbedSolution:
    """
    One of ρ_{λ,w}, ρ̃_{λ,w}, ρ_{λ,w}^q, ρ̃_{λ,w}^q.

    Attributes:
        lam: scale λ
        w: smooth perturbation
        branch: which exact solution is pushed forward
        reflection_sign, orientation: construction flags
        h: RK4 step for the flows of w
        level: cell level of the pairing quadrature (default λ + 7)
    """

    lam: int
    w: SmoothFieldDef
    branch: SolutionVariant
    reflection_sign: int = -1
    orientation: Orientation = Orientation.CCW
    h: float = PAIRING_STEP
    level: Optional[int] = None

    @property
    def q(self) -> Optional[int]:
        return self.branch.q

    @property
    def field_spec(self) -> FieldSpec:
        flags = dict(reflection_sign=self.reflection_sign, orientation=self.orientation)
        if self.branch.kind in (SolutionKind.UNMIXING, SolutionKind.MIXED):
            return FieldSpec.perturbed(self.lam, self.w, **flags)
        return FieldSpec.perturbed(self.lam, self.w, self.branch.q,
                                   self.branch.kind is SolutionKind.TRUNC_SYM, **flags)

    @property
    def initial_datum(self) -> InitialDatum:
        return InitialDatum(self.lam, self.w, self.h)

    def zeta(self, t, y: np.ndarray) -> np.ndarray:
        """The exact solution ζ(t, y) underneath."""
        return density_points(self.lam, self.branch, t, y, self.reflection_sign,
                              self.orientation)

    def quadrature_level(self) -> int:
        return self.lam + 7 if self.level is None else self.level

    def default_box(self, phi: PairingFunction) -> Box:
        reach = self.w.support_radius
        c1, c2 = self.w.center
        box = phi.bounding_box
        if reach > 0:
            box = _union(box, (c1 - reach, c2 - reach, c1 + reach, c2 + reach))
        return _aligned(box, self.lam)

    def pairing(self, t, phi: PairingFunction, box: Optional[Box] = None) -> float:
        """
        ∫ ρ(t, x) φ(x) dx = ∫ φ(X_w(t, y)) ζ(t, y) dy by the midpoint rule on cells of the
        quadrature level.
        """
        level = self.quadrature_level()
        box = _aligned(self.default_box(phi) if box is None else box, level)
        s = 2.0**-level
        n1 = int(round((box[2] - box[0]) / s))
        n2 = int(round((box[3] - box[1]) / s))
        y, area = midpoint_grid(box, n1, n2)
        zeta = self.zeta(t, y)
        if isinstance(phi, TransportedIndicator) and phi.w == self.w and phi.t == float(t):
            weights = phi.pulled_back(y)
        else:
            x = flow_w_between(self.w, 1.0, float(t), y, self.h, with_jacobian=False).endpoint
            weights = phi.value(x)
        return float(np.sum(weights * zeta) * area)

    def density(self, t, x) -> np.ndarray:
        """ρ(t, x) = ζ(t, y) det D_x X_w^{-1}(t, x)."""
        pts, single = as_points(x)
        back = flow_w_between(self.w, float(t), 1.0, pts, self.h)
        out = self.zeta(t, back.endpoint) * back.jacobian_det
        return out[0] if single else out

    def density_bound(self) -> float:
        """sup ρ ≤ sup ζ · exp(max_t |∫_1^t ‖div w‖∞|) with sup ζ = 1."""
        return math.exp(max(self.w.integrated_norm("div", 1.0, a) for a in (0.0, 2.0)))


def pairing(sol: PerturbedSolution, t, phi: PairingFunction, box: Optional[Box] = None) -> float:
    return sol.pairing(t, phi, box)


def density_eval(sol: PerturbedSolution, t, x) -> np.ndarray:
    return sol.density(t, x)

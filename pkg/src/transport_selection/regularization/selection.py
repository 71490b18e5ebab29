"""
Selecting k for each truncation level, and the two-limit demonstration

For each q the smallest k on a doubling ladder is chosen such that both regularised
solutions stay within 2^-q of their truncated counterparts in L¹ on a ball, uniformly on
a time mesh. The two sequences q -> (sym, k_q) and q -> (asym, k_q) are then compared
against the unmixing and mixed limits on a dictionary of transported squares.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..errors import ConstructionError, SelectionError
from ..dyadic.grid import Window
from ..dyadic.lattice import SquareId
from ..dyadic.rationals import pow2
from ..evolution.cells import Dictionary, SolutionVariant
from ..fields.building_blocks import stage_schedule
from ..fields.smooth import SmoothFieldDef
from ..fields.types import FieldSpec, Orientation
from ..transport.solutions import PerturbedSolution, TransportedIndicator
from .regularized import DEFAULT_STEP, RegularizedSolution

logger = logging.getLogger(__name__)

K_LADDER = (4, 8, 16, 32, 64)
SELECTION_RADIUS = 0.5
UNIFORM_POINTS = 16
SLACK = 0.1
VERIFY_RELAXATION = 0.1
BRANCHES = ("sym", "asym")
# float noise allowed when comparing mutual gaps
GAP_EPS = 1e-9


def selection_mesh(q: int, uniform: int = UNIFORM_POINTS) -> Tuple[float, ...]:
    """Stage boundaries of both truncated fields plus ``uniform`` evenly spaced times."""
    times = set(np.linspace(0.0, 2.0, uniform).tolist())
    for spec in (FieldSpec.trunc_sym(0, q), FieldSpec.trunc_asym(0, q)):
        for seg in stage_schedule(spec, 0, 2):
            times.update((float(seg.start), float(seg.end)))
    return tuple(sorted(times))


def refined_mesh(mesh: Sequence[float]) -> Tuple[float, ...]:
    """The mesh with every gap halved."""
    mids = [0.5 * (a + b) for a, b in zip(mesh[:-1], mesh[1:])]
    return tuple(sorted(set(mesh) | set(mids)))


@dataclass(frozen=True)
class LadderRow:
    k: int
    branch: str
    t_worst: float
    distance: float


@dataclass
class SelectionResult:
    q: int
    k_q: int
    achieved_distance: float
    radius: float
    slack: float = SLACK
    ladder: List[LadderRow] = field(default_factory=list)

    @property
    def bound(self) -> float:
        return 2.0**-self.q

    @property
    def passed(self) -> bool:
        return self.achieved_distance < self.bound * (1.0 + self.slack)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([row.__dict__ for row in self.ladder],
                             columns=["k", "branch", "t_worst", "distance"])
        frame.insert(0, "q", self.q)
        frame["bound"] = self.bound
        frame["selected"] = frame["k"] == self.k_q
        return frame


def _solution(lam: int, w: SmoothFieldDef, q: int, k: int, symmetric: bool,
              reflection_sign: int, orientation: Orientation, time_mollify_b: bool, h: float,
              level: Optional[int]) -> RegularizedSolution:
    spec = FieldSpec.mollified(lam, w, q, k, symmetric, reflection_sign=reflection_sign,
                               orientation=orientation, time_mollify_b=time_mollify_b)
    return RegularizedSolution(spec, h, level)


def _ladder_rows(lam, w, q, k, mesh, radius, flags) -> List[LadderRow]:
    rows = []
    for branch in BRANCHES:
        sol = _solution(lam, w, q, k, branch == "sym", **flags)
        distances = sol.l1_distances(mesh, radius)
        worst = int(np.argmax(distances))
        rows.append(LadderRow(k, branch, float(mesh[worst]), float(distances[worst])))
    return rows


def select_k(lam: int, w: SmoothFieldDef, q: int, radius: float = SELECTION_RADIUS,
             k_ladder: Sequence[int] = K_LADDER, time_mesh: Optional[Sequence[float]] = None,
             slack: float = SLACK, reflection_sign: int = -1,
             orientation: Orientation = Orientation.CCW, time_mollify_b: bool = True,
             h: float = DEFAULT_STEP, level: Optional[int] = None) -> SelectionResult:
    """
    Smallest k on the ladder with sup_t ∫_{B_radius} |ρ^{q,k} - ρ^q| < 2^-q (1 + slack)
    for both branches.

    Raises:
        ConstructionError: q < 1 or an empty ladder
        SelectionError: no k on the ladder meets the bound; ``report`` holds the ladder
    """
    if q < 1:
        raise ConstructionError(f"truncation level must be >= 1. Got {q}")
    if not k_ladder:
        raise ConstructionError("empty k ladder")
    mesh = selection_mesh(q) if time_mesh is None else tuple(sorted(time_mesh))
    flags = dict(reflection_sign=reflection_sign, orientation=orientation,
                 time_mollify_b=time_mollify_b, h=h, level=level)
    ladder: List[LadderRow] = []
    for k in k_ladder:
        rows = _ladder_rows(lam, w, q, k, mesh, radius, flags)
        ladder += rows
        achieved = max(row.distance for row in rows)
        logger.info("q=%d k=%d: sup distance %.4g (bound %.4g)", q, k, achieved, 2.0**-q)
        result = SelectionResult(q, k, achieved, radius, slack, list(ladder))
        if result.passed:
            logger.info("selected k_%d = %d", q, k)
            return result
    report = SelectionResult(q, k_ladder[-1], achieved, radius, slack, ladder)
    raise SelectionError(f"no k in {tuple(k_ladder)} meets the bound 2^-{q} for q={q}", report)


def verify(result: SelectionResult, lam: int, w: SmoothFieldDef,
           time_mesh: Optional[Sequence[float]] = None,
           relaxation: float = VERIFY_RELAXATION, **flags) -> bool:
    """Re-check a selection on the refined mesh with the bound relaxed by ``relaxation``."""
    mesh = refined_mesh(selection_mesh(result.q) if time_mesh is None else time_mesh)
    opts = dict(reflection_sign=-1, orientation=Orientation.CCW, time_mollify_b=True,
                h=DEFAULT_STEP, level=None)
    opts.update(flags)
    rows = _ladder_rows(lam, w, result.q, result.k_q, mesh, result.radius, opts)
    achieved = max(row.distance for row in rows)
    limit = result.bound * (1.0 + result.slack) * (1.0 + relaxation)
    logger.info("verification of k_%d = %d on %d times: %.4g (limit %.4g)", result.q,
                result.k_q, len(mesh), achieved, limit)
    return achieved < limit


# ----------------------------------------------------------------------
# convergence demonstration
# ----------------------------------------------------------------------
def _square_id(square: SquareId) -> str:
    return f"L{square.level}:{square.index[0]},{square.index[1]}"


def default_dictionary(lam: int) -> Dictionary:
    side = pow2(-lam)
    return Dictionary(lam + 1, Window(Fraction(0), Fraction(0), side, side), min_level=lam)


@dataclass
class DemoReport:
    """Pairing gaps of both regularised sequences against their limits."""

    frame: pd.DataFrame
    mutual_gaps: Dict[int, float]
    limit_gap: float
    div_integral: float

    @property
    def threshold(self) -> float:
        return 0.4 * math.exp(-self.div_integral)

    @property
    def passed(self) -> bool:
        gaps = [self.mutual_gaps[q] for q in sorted(self.mutual_gaps)]
        if not gaps or gaps[-1] < self.threshold or gaps[-1] > self.limit_gap + GAP_EPS:
            return False
        return all(b >= a - GAP_EPS for a, b in zip(gaps[:-1], gaps[1:]))

    def mutual_frame(self) -> pd.DataFrame:
        return pd.DataFrame(dict(q=sorted(self.mutual_gaps),
                                 mutual_gap=[self.mutual_gaps[q] for q in sorted(self.mutual_gaps)],
                                 limit_gap=self.limit_gap, threshold=self.threshold))


def theorem_demo(lam: int, w: SmoothFieldDef, q_ladder: Sequence[int] = (1, 2, 3),
                 k_ladder: Sequence[int] = K_LADDER, radius: float = SELECTION_RADIUS,
                 times: Sequence[float] = (0.5, 1.5, 2.0),
                 dictionary: Optional[Dictionary] = None, reflection_sign: int = -1,
                 orientation: Orientation = Orientation.CCW, time_mollify_b: bool = True,
                 h: float = DEFAULT_STEP, level: Optional[int] = None) -> DemoReport:
    """
    Table of |∫(ρ^{q,k_q} - ρ_{λ,w}) φ| and |∫(ρ̃^{q,k_q} - ρ̃_{λ,w}) φ| over q and the
    dictionary, with the two summands bounding each gap, and the mutual gap at t = 2.

    Dictionary test functions are the transported indicators 1_{X_w(t, S)}; the mutual gap
    is the largest |∫(ρ^{q,k_q} - ρ̃^{q,k_q})(2) φ_S| / |S|.
    """
    dictionary = default_dictionary(lam) if dictionary is None else dictionary
    squares = dictionary.squares()
    times = tuple(sorted(set(float(t) for t in times) | {2.0}))
    flags = dict(reflection_sign=reflection_sign, orientation=orientation)
    limits = {
        "sym": PerturbedSolution(lam, w, SolutionVariant.unmixing(), **flags),
        "asym": PerturbedSolution(lam, w, SolutionVariant.mixed(), **flags),
    }

    def phis(t: float) -> List[TransportedIndicator]:
        return [TransportedIndicator(S, w, t) for S in squares]

    limit_pairings = {
        branch: {t: np.array([sol.pairing(t, phi) for phi in phis(t)]) for t in times}
        for branch, sol in limits.items()
    }
    areas = np.array([float(S.area) for S in squares])
    limit_gap = float(np.max(np.abs(limit_pairings["sym"][2.0] - limit_pairings["asym"][2.0])
                             / areas))

    rows = []
    mutual: Dict[int, float] = {}
    for q in q_ladder:
        selection = select_k(lam, w, q, radius, k_ladder, reflection_sign=reflection_sign,
                             orientation=orientation, time_mollify_b=time_mollify_b, h=h,
                             level=level)
        at_two = {}
        for branch in BRANCHES:
            sol = _solution(lam, w, q, selection.k_q, branch == "sym", reflection_sign,
                            orientation, time_mollify_b, h, level)
            truncated = PerturbedSolution(lam, w, sol.branch, **flags)
            box = sol.default_box(radius, _dictionary_box(squares))
            regularised = dict(zip(times, sol.pairings(times, phis, box)))
            at_two[branch] = regularised[2.0]
            for t in times:
                exact = np.array([truncated.pairing(t, phi) for phi in phis(t)])
                for j, S in enumerate(squares):
                    rows.append(dict(
                        q=q, k_q=selection.k_q, branch=branch, t=t, phi_id=_square_id(S),
                        gap=abs(regularised[t][j] - limit_pairings[branch][t][j]),
                        selection_term=2.0**-q,
                        truncation_gap=abs(exact[j] - limit_pairings[branch][t][j]),
                    ))
        mutual[q] = float(np.max(np.abs(at_two["sym"] - at_two["asym"]) / areas))
        logger.info("q=%d k_q=%d: mutual gap at t=2 is %.4g (limit %.4g)", q, selection.k_q,
                    mutual[q], limit_gap)
    return DemoReport(pd.DataFrame(rows), mutual, limit_gap,
                      w.integrated_norm("div", 0.0, 2.0))


def _dictionary_box(squares: Sequence[SquareId]) -> Tuple[float, float, float, float]:
    lows = np.array([[float(c) for c in S.lower] for S in squares])
    highs = lows + np.array([[float(S.side)] * 2 for S in squares])
    return (float(lows[:, 0].min()), float(lows[:, 1].min()), float(highs[:, 0].max()),
            float(highs[:, 1].max()))

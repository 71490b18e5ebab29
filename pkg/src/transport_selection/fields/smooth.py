"""
Smooth perturbations w(t, x) = e(t) · P(x)

P is a compactly supported spatial profile built on the smooth cutoff
    g(r) = h((R - r) / (R - r0)),  h(s) = f(s) / (f(s) + f(1 - s)),  f(s) = exp(-1/s)
which equals 1 on the core r ≤ r0 and vanishes for r ≥ R.  e is a time envelope.
"""
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import logging
import math
from typing import ClassVar, Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy import integrate

from ..errors import ConstructionError
from .mollifiers import eta_k

logger = logging.getLogger(__name__)

NORM_SAMPLES = 401


# ----------------------------------------------------------------------
# cutoff
# ----------------------------------------------------------------------
def _f(s: np.ndarray) -> np.ndarray:
    pos = s > 0
    safe = np.where(pos, s, 1.0)
    return np.where(pos, np.exp(-1.0 / safe), 0.0)


def _df(s: np.ndarray) -> np.ndarray:
    pos = s > 0
    safe = np.where(pos, s, 1.0)
    return np.where(pos, np.exp(-1.0 / safe) / safe**2, 0.0)


def smooth_step(s) -> np.ndarray:
    """0 for s ≤ 0, 1 for s ≥ 1, C^∞ in between."""
    s = np.asarray(s, dtype=float)
    a, b = _f(s), _f(1.0 - s)
    return a / (a + b)


def smooth_step_derivative(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    a, b = _f(s), _f(1.0 - s)
    da, db = _df(s), _df(1.0 - s)
    return (da * b + a * db) / (a + b) ** 2


@dataclass(frozen=True)
class Cutoff:
    r0: float
    R: float

    def __post_init__(self):
        if not 0 <= self.r0 < self.R:
            raise ConstructionError(f"cutoff needs 0 <= r0 < R. Got r0={self.r0}, R={self.R}")

    def value(self, r: np.ndarray) -> np.ndarray:
        return smooth_step((self.R - r) / (self.R - self.r0))

    def derivative(self, r: np.ndarray) -> np.ndarray:
        return -smooth_step_derivative((self.R - r) / (self.R - self.r0)) / (self.R - self.r0)


# ----------------------------------------------------------------------
# spatial profiles
# ----------------------------------------------------------------------
class ProfileNorms(NamedTuple):
    """Sup norms of a profile on its support."""

    c0: float   # ‖P‖∞
    c1: float   # ‖DP‖∞ (operator 2-norm)
    c2: float   # ‖D²P‖∞ (Frobenius, finite differences)
    div: float  # ‖div P‖∞


@dataclass(frozen=True)
class SpatialProfile:
    """Base class; subclasses implement _value and _jacobian in centred coordinates."""

    kind: ClassVar[str] = "zero"
    cutoff: Cutoff = field(default_factory=lambda: Cutoff(0.25, 0.75))
    center: Tuple[float, float] = (0.0, 0.0)

    @property
    def support_radius(self) -> float:
        return self.cutoff.R

    @property
    def is_zero(self) -> bool:
        return False

    def _centred(self, x: np.ndarray):
        d = np.asarray(x, dtype=float).reshape(-1, 2) - np.asarray(self.center, dtype=float)
        r = np.hypot(d[:, 0], d[:, 1])
        safe = np.where(r > 0, r, 1.0)
        return d, r, self.cutoff.value(r), self.cutoff.derivative(r) / safe

    def value(self, x: np.ndarray) -> np.ndarray:
        return self._value(*self._centred(x))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """(N, 2, 2) array J[n, i, j] = ∂P_i/∂x_j."""
        return self._jacobian(*self._centred(x))

    def divergence(self, x: np.ndarray) -> np.ndarray:
        J = self.jacobian(x)
        return J[:, 0, 0] + J[:, 1, 1]

    def _value(self, d, r, g, gr) -> np.ndarray:
        return np.zeros_like(d)

    def _jacobian(self, d, r, g, gr) -> np.ndarray:
        return np.zeros((d.shape[0], 2, 2))

    @cached_property
    def norms(self) -> ProfileNorms:
        c1, c2 = self.center
        R = self.support_radius
        axis1 = np.linspace(c1 - R, c1 + R, NORM_SAMPLES)
        axis2 = np.linspace(c2 - R, c2 + R, NORM_SAMPLES)
        X1, X2 = np.meshgrid(axis1, axis2, indexing="ij")
        pts = np.column_stack([X1.ravel(), X2.ravel()])
        val = self.value(pts)
        J = self.jacobian(pts)
        step = axis1[1] - axis1[0]
        Jg = J.reshape(NORM_SAMPLES, NORM_SAMPLES, 2, 2)
        d1 = np.diff(Jg, axis=0)[:, :-1] / step
        d2 = np.diff(Jg, axis=1)[:-1, :] / step
        second = np.sqrt(np.sum(d1**2, axis=(-2, -1)) + np.sum(d2**2, axis=(-2, -1)))
        return ProfileNorms(
            c0=float(np.max(np.hypot(val[:, 0], val[:, 1]))),
            c1=float(np.max(np.linalg.norm(J, ord=2, axis=(-2, -1)))),
            c2=float(np.max(second)),
            div=float(np.max(np.abs(J[:, 0, 0] + J[:, 1, 1]))),
        )


@dataclass(frozen=True)
class ZeroProfile(SpatialProfile):
    kind: ClassVar[str] = "zero"

    @property
    def is_zero(self) -> bool:
        return True

    @cached_property
    def norms(self) -> ProfileNorms:
        return ProfileNorms(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SwirlProfile(SpatialProfile):
    """ω g(r) (-x2, x1): divergence-free, rigid rotation on the core."""

    kind: ClassVar[str] = "swirl"
    omega: float = 1.0

    @property
    def is_zero(self) -> bool:
        return self.omega == 0.0

    def _value(self, d, r, g, gr):
        return self.omega * g[:, None] * np.column_stack([-d[:, 1], d[:, 0]])

    def _jacobian(self, d, r, g, gr):
        x1, x2 = d[:, 0], d[:, 1]
        J = np.empty((d.shape[0], 2, 2))
        J[:, 0, 0] = -gr * x1 * x2
        J[:, 0, 1] = -gr * x2 * x2 - g
        J[:, 1, 0] = gr * x1 * x1 + g
        J[:, 1, 1] = gr * x1 * x2
        return self.omega * J


@dataclass(frozen=True)
class CompressionProfile(SpatialProfile):
    """α g(r) x: div = α (2g + r g'), equal to 2α on the core."""

    kind: ClassVar[str] = "compression"
    alpha: float = 0.5

    @property
    def is_zero(self) -> bool:
        return self.alpha == 0.0

    def _value(self, d, r, g, gr):
        return self.alpha * g[:, None] * d

    def _jacobian(self, d, r, g, gr):
        outer = d[:, :, None] * d[:, None, :]
        J = g[:, None, None] * np.eye(2)[None, :, :] + gr[:, None, None] * outer
        return self.alpha * J


@dataclass(frozen=True)
class ShearProfile(SpatialProfile):
    """(β g(r) x2, 0): plane shear on the core."""

    kind: ClassVar[str] = "shear"
    beta: float = 1.0

    @property
    def is_zero(self) -> bool:
        return self.beta == 0.0

    def _value(self, d, r, g, gr):
        out = np.zeros_like(d)
        out[:, 0] = self.beta * g * d[:, 1]
        return out

    def _jacobian(self, d, r, g, gr):
        x1, x2 = d[:, 0], d[:, 1]
        J = np.zeros((d.shape[0], 2, 2))
        J[:, 0, 0] = self.beta * gr * x1 * x2
        J[:, 0, 1] = self.beta * (gr * x2 * x2 + g)
        return J


# ----------------------------------------------------------------------
# time envelopes
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Envelope:
    """e(t); subclasses override __call__."""

    kind: ClassVar[str] = "constant"

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """Times where e or e' may jump."""
        return ()

    def extended(self, t: float) -> float:
        """e continued constantly outside [0, 2]."""
        return self(min(max(t, 0.0), 2.0))

    def abs_integral(self, a: float, b: float) -> float:
        lo, hi = min(a, b), max(a, b)
        if lo == hi:
            return 0.0
        points = [p for p in self.breakpoints if lo < p < hi]
        value, _ = integrate.quad(lambda s: abs(self(s)), lo, hi, points=points or None,
                                  limit=200, epsabs=1e-12)
        return value

    def sup(self, samples: int = 2001) -> float:
        return float(max(abs(self(s)) for s in np.linspace(0.0, 2.0, samples)))


@dataclass(frozen=True)
class ConstantEnvelope(Envelope):
    kind: ClassVar[str] = "constant"
    level: float = 1.0

    def __call__(self, t: float) -> float:
        return self.level

    def abs_integral(self, a: float, b: float) -> float:
        return abs(self.level) * abs(b - a)


@dataclass(frozen=True)
class OscillatingEnvelope(Envelope):
    """mean + amplitude sin(2π frequency t)."""

    kind: ClassVar[str] = "oscillating"
    amplitude: float = 1.0
    frequency: float = 0.5
    mean: float = 0.0

    def __call__(self, t: float) -> float:
        return self.mean + self.amplitude * math.sin(2.0 * math.pi * self.frequency * t)


@dataclass(frozen=True)
class PulseEnvelope(Envelope):
    """level on [start, end), 0 elsewhere (discontinuous in time)."""

    kind: ClassVar[str] = "pulse"
    start: float = 0.5
    end: float = 1.5
    level: float = 1.0

    def __call__(self, t: float) -> float:
        return self.level if self.start <= t < self.end else 0.0

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.start, self.end)


@dataclass(frozen=True)
class TentEnvelope(Envelope):
    """max(0, 1 - |t - peak| / width): Lipschitz with kinks."""

    kind: ClassVar[str] = "tent"
    peak: float = 1.0
    width: float = 0.5

    def __call__(self, t: float) -> float:
        return max(0.0, 1.0 - abs(t - self.peak) / self.width)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.peak - self.width, self.peak, self.peak + self.width)


@lru_cache(maxsize=65536)
def _mollified_value(base: Envelope, k: int, t: float) -> float:
    radius = 1.0 / k
    points = [t - p for p in base.breakpoints + (0.0, 2.0) if -radius < t - p < radius]
    value, _ = integrate.quad(
        lambda s: float(eta_k(s, k)) * base.extended(t - s),
        -radius, radius, points=points or None, limit=200, epsabs=1e-13, epsrel=1e-12,
    )
    return value


@dataclass(frozen=True)
class MollifiedEnvelope(Envelope):
    """(e ⋆ η^k)(t) with e extended constantly outside [0, 2]."""

    kind: ClassVar[str] = "mollified"
    base: Envelope = field(default_factory=ConstantEnvelope)
    k: int = 1

    def __call__(self, t: float) -> float:
        if isinstance(self.base, ConstantEnvelope):
            return self.base.level
        return _mollified_value(self.base, self.k, float(t))


ENVELOPES: Dict[str, type] = {
    cls.kind: cls
    for cls in (ConstantEnvelope, OscillatingEnvelope, PulseEnvelope, TentEnvelope)
}
PROFILES: Dict[str, type] = {
    cls.kind: cls for cls in (ZeroProfile, SwirlProfile, CompressionProfile, ShearProfile)
}
NORM_KINDS = ("c0", "c1", "c2", "div")


# ----------------------------------------------------------------------
# smooth field
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SmoothFieldDef:
    """
    w(t, x) = e(t) P(x) with analytic value, Jacobian and divergence.

    Attributes:
        name: label used in tables
        profile: compactly supported spatial profile
        envelope: time envelope
    """

    name: str
    profile: SpatialProfile = field(default_factory=ZeroProfile)
    envelope: Envelope = field(default_factory=ConstantEnvelope)

    @property
    def is_zero(self) -> bool:
        return self.profile.is_zero or (
            isinstance(self.envelope, ConstantEnvelope) and self.envelope.level == 0.0
        )

    @property
    def support_radius(self) -> float:
        return 0.0 if self.is_zero else self.profile.support_radius

    @property
    def center(self) -> Tuple[float, float]:
        return self.profile.center

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return self.envelope.breakpoints

    def value(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.envelope(t) * self.profile.value(x)

    def jacobian(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.envelope(t) * self.profile.jacobian(x)

    def divergence(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.envelope(t) * self.profile.divergence(x)

    def norms(self, t: float) -> ProfileNorms:
        scale = abs(self.envelope(t))
        return ProfileNorms(*(scale * n for n in self.profile.norms))

    def integrated_norm(self, kind: str, a: float, b: float) -> float:
        """|∫_a^b ‖·‖ dt| for kind in c0, c1, c2, div."""
        if kind not in NORM_KINDS:
            raise ConstructionError(f"unknown norm {kind!r}; expected one of {NORM_KINDS}")
        if self.is_zero:
            return 0.0
        return getattr(self.profile.norms, kind) * self.envelope.abs_integral(a, b)


def zero_field() -> SmoothFieldDef:
    return SmoothFieldDef("zero")


def builtin_field(
    kind: str,
    envelope: str = "constant",
    envelope_params: Optional[Dict[str, float]] = None,
    **params,
) -> SmoothFieldDef:
    """
    Named perturbation.

    Args:
        kind: zero, swirl (omega), compression (alpha), shear (beta); all accept r0, R, center
        envelope: constant (level), oscillating (amplitude, frequency, mean), pulse (start, end,
            level), tent (peak, width)

    Raises:
        ConstructionError: unknown kind or parameters out of range
    """
    if kind not in PROFILES:
        raise ConstructionError(f"unknown field kind {kind!r}; expected one of {sorted(PROFILES)}")
    if envelope not in ENVELOPES:
        raise ConstructionError(
            f"unknown envelope {envelope!r}; expected one of {sorted(ENVELOPES)}"
        )
    params = dict(params)
    r0 = float(params.pop("r0", 0.25))
    R = float(params.pop("R", 0.75))
    center = tuple(float(c) for c in params.pop("center", (0.0, 0.0)))
    if len(center) != 2:
        raise ConstructionError(f"center must have two coordinates. Got {center}")
    strength_key = {"swirl": "omega", "compression": "alpha", "shear": "beta"}.get(kind)
    unknown = set(params) - ({strength_key} if strength_key else set())
    if unknown:
        raise ConstructionError(f"unknown parameters for {kind}: {sorted(unknown)}")
    strength = {}
    if strength_key is not None and strength_key in params:
        value = float(params[strength_key])
        if not math.isfinite(value) or abs(value) > 50.0:
            raise ConstructionError(f"{strength_key} must be finite with |{strength_key}| <= 50")
        strength[strength_key] = value
    profile = PROFILES[kind](cutoff=Cutoff(r0, R), center=center, **strength)
    try:
        env = ENVELOPES[envelope](**(envelope_params or {}))
    except TypeError as exc:
        raise ConstructionError(f"bad parameters for envelope {envelope!r}: {exc}") from exc
    label = kind if envelope == "constant" else f"{kind}/{envelope}"
    logger.debug("built smooth field %s with %s", label, profile)
    return SmoothFieldDef(label, profile, env)


def time_mollify(w: SmoothFieldDef, k: int) -> SmoothFieldDef:
    """w^k = w ⋆_t η^k; only the envelope is convolved."""
    if k < 1:
        raise ConstructionError(f"mollification index must be >= 1. Got {k}")
    return SmoothFieldDef(f"{w.name}*eta{k}", w.profile, MollifiedEnvelope(w.envelope, k))

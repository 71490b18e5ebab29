"""
Field descriptions shared by every evaluator, flow and solver.
"""
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import ConstructionError
from ..dyadic.rationals import pow2

if TYPE_CHECKING:
    from .smooth import SmoothFieldDef


Vec2 = Tuple  # (v1, v2): Fractions for exact points, floats or arrays otherwise


class Variant(Enum):
    """Family member described by a FieldSpec."""

    BUILDING_BLOCK = "building_block"      # b_λ
    TRUNC_SYM = "trunc_sym"                # b_λ^q
    TRUNC_ASYM = "trunc_asym"              # b̃_λ^q
    SMOOTH = "smooth"                      # w
    PERTURBED = "perturbed"                # b_{λ,w}
    PERTURBED_TRUNC_SYM = "perturbed_trunc_sym"
    PERTURBED_TRUNC_ASYM = "perturbed_trunc_asym"
    MOLLIFIED_SYM = "mollified_sym"        # b_{λ,w}^{q,k}
    MOLLIFIED_ASYM = "mollified_asym"


class Orientation(Enum):
    """Traversal direction of the square level sets of v."""

    CCW = 1   # printed formula: (1/4, 0) moves upward
    CW = -1

    @classmethod
    def parse(cls, value) -> "Orientation":
        if isinstance(value, Orientation):
            return value
        text = str(value).strip().lower()
        if text in ("ccw", "counterclockwise", "1", "+1"):
            return cls.CCW
        if text in ("cw", "clockwise", "-1"):
            return cls.CW
        raise ConstructionError(f"unknown orientation {value!r}")


class Side(Enum):
    FORWARD = "forward"    # t < 1
    BACKWARD = "backward"  # t > 1


class StageIndex(NamedTuple):
    """
    Stage k of the time-staged field.

    forward k covers [1 - 2^-k, 1 - 2^-(k+1)), backward k covers [1 + 2^-(k+1), 1 + 2^-k)
    """

    k: int
    side: Side

    @property
    def interval(self) -> Tuple[Fraction, Fraction]:
        if self.side is Side.FORWARD:
            return 1 - pow2(-self.k), 1 - pow2(-self.k - 1)
        return 1 + pow2(-self.k - 1), 1 + pow2(-self.k)

    @property
    def duration(self) -> Fraction:
        return pow2(-self.k - 1)


_EXACT_BASE = {
    Variant.BUILDING_BLOCK: Variant.BUILDING_BLOCK,
    Variant.TRUNC_SYM: Variant.TRUNC_SYM,
    Variant.TRUNC_ASYM: Variant.TRUNC_ASYM,
    Variant.PERTURBED: Variant.BUILDING_BLOCK,
    Variant.PERTURBED_TRUNC_SYM: Variant.TRUNC_SYM,
    Variant.PERTURBED_TRUNC_ASYM: Variant.TRUNC_ASYM,
    Variant.MOLLIFIED_SYM: Variant.TRUNC_SYM,
    Variant.MOLLIFIED_ASYM: Variant.TRUNC_ASYM,
}

_NEEDS_Q = {
    Variant.TRUNC_SYM,
    Variant.TRUNC_ASYM,
    Variant.PERTURBED_TRUNC_SYM,
    Variant.PERTURBED_TRUNC_ASYM,
    Variant.MOLLIFIED_SYM,
    Variant.MOLLIFIED_ASYM,
}

_NEEDS_W = {
    Variant.SMOOTH,
    Variant.PERTURBED,
    Variant.PERTURBED_TRUNC_SYM,
    Variant.PERTURBED_TRUNC_ASYM,
    Variant.MOLLIFIED_SYM,
    Variant.MOLLIFIED_ASYM,
}


@dataclass(frozen=True)
class FieldSpec:
    """
    Tagged description of a vector field of the construction.

    Attributes:
        variant: which member of the family
        lam: dyadic scale λ ≥ 0 of the exact part
        q: truncation depth q ≥ 1
        k: mollification index k ≥ 1
        w: smooth perturbation
        reflection_sign: σ in b(t, x) = σ b(2 - t, x) for t > 1
        orientation: traversal direction of v
        time_mollify_b: mollified variants also smooth the exact part in time
    """

    variant: Variant
    lam: Optional[int] = None
    q: Optional[int] = None
    k: Optional[int] = None
    w: Optional["SmoothFieldDef"] = None
    reflection_sign: int = -1
    orientation: Orientation = Orientation.CCW
    time_mollify_b: bool = True

    def __post_init__(self):
        if self.variant is not Variant.SMOOTH:
            if self.lam is None or self.lam < 0:
                raise ConstructionError(f"lambda must be a non-negative integer. Got {self.lam}")
        if self.variant in _NEEDS_Q and (self.q is None or self.q < 1):
            raise ConstructionError(f"{self.variant.value} needs q >= 1. Got {self.q}")
        if self.variant in (Variant.MOLLIFIED_SYM, Variant.MOLLIFIED_ASYM):
            if self.k is None or self.k < 1:
                raise ConstructionError(f"{self.variant.value} needs k >= 1. Got {self.k}")
        if self.variant in _NEEDS_W and self.w is None:
            raise ConstructionError(f"{self.variant.value} needs a smooth field w")
        if self.reflection_sign not in (-1, 1):
            raise ConstructionError(f"reflection_sign must be +1 or -1. Got {self.reflection_sign}")
        if not isinstance(self.orientation, Orientation):
            object.__setattr__(self, "orientation", Orientation.parse(self.orientation))

    # constructors ---------------------------------------------------------
    @classmethod
    def building_block(cls, lam: int, **flags) -> "FieldSpec":
        return cls(Variant.BUILDING_BLOCK, lam=lam, **flags)

    @classmethod
    def trunc_sym(cls, lam: int, q: int, **flags) -> "FieldSpec":
        return cls(Variant.TRUNC_SYM, lam=lam, q=q, **flags)

    @classmethod
    def trunc_asym(cls, lam: int, q: int, **flags) -> "FieldSpec":
        return cls(Variant.TRUNC_ASYM, lam=lam, q=q, **flags)

    @classmethod
    def smooth(cls, w: "SmoothFieldDef") -> "FieldSpec":
        return cls(Variant.SMOOTH, w=w)

    @classmethod
    def perturbed(cls, lam: int, w: "SmoothFieldDef", q: Optional[int] = None,
                  symmetric: bool = True, **flags) -> "FieldSpec":
        if q is None:
            return cls(Variant.PERTURBED, lam=lam, w=w, **flags)
        variant = Variant.PERTURBED_TRUNC_SYM if symmetric else Variant.PERTURBED_TRUNC_ASYM
        return cls(variant, lam=lam, q=q, w=w, **flags)

    @classmethod
    def mollified(cls, lam: int, w: "SmoothFieldDef", q: int, k: int,
                  symmetric: bool = True, **flags) -> "FieldSpec":
        variant = Variant.MOLLIFIED_SYM if symmetric else Variant.MOLLIFIED_ASYM
        return cls(variant, lam=lam, q=q, k=k, w=w, **flags)

    # derived --------------------------------------------------------------
    @property
    def exact_part(self) -> "FieldSpec":
        """The unperturbed b_λ / b_λ^q / b̃_λ^q underlying this field."""
        base = _EXACT_BASE.get(self.variant)
        if base is None:
            raise ConstructionError(f"{self.variant.value} has no exact part")
        return replace(self, variant=base, k=None, w=None, q=self.q if base in _NEEDS_Q else None)

    @property
    def is_truncated(self) -> bool:
        return self.variant in _NEEDS_Q

    @property
    def is_symmetric(self) -> bool:
        return self.variant in (
            Variant.TRUNC_SYM, Variant.PERTURBED_TRUNC_SYM, Variant.MOLLIFIED_SYM
        )

    @property
    def truncation_window(self) -> Optional[Tuple[Fraction, Fraction]]:
        """Open time interval on which the exact part vanishes."""
        if not self.is_truncated:
            return None
        assert self.q is not None
        lower = 1 - pow2(-self.q) if self.is_symmetric else 1 - pow2(-self.q - 2)
        return lower, 1 + pow2(-self.q)

    @property
    def sign(self) -> int:
        return int(self.orientation.value)

    def with_flags(self, **flags) -> "FieldSpec":
        return replace(self, **flags)


def as_points(x) -> Tuple[np.ndarray, bool]:
    """(N, 2) float array view of a point or point set, and whether the input was a single point."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != 2:
            raise ConstructionError(f"point must have two coordinates. Got shape {arr.shape}")
        return arr.reshape(1, 2), True
    if arr.shape[-1] != 2:
        raise ConstructionError(f"points must have shape (..., 2). Got {arr.shape}")
    return arr.reshape(-1, 2), False

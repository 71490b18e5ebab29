"""
Smooth compactly supported test functions for weak-form pairings.

φ(x) = A exp(1 - 1/(1 - ρ²)),  ρ = |x - c| / r  (so φ(c) = A)
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import ConstructionError


def _bump(rho: np.ndarray) -> np.ndarray:
    inside = rho < 1.0
    safe = np.where(inside, 1.0 - rho * rho, 1.0)
    return np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)


def _bump_log_derivative(rho: np.ndarray) -> np.ndarray:
    """d/d(ρ²) of log bump, i.e. -1/(1 - ρ²)²; zero outside the support."""
    inside = rho < 1.0
    safe = np.where(inside, 1.0 - rho * rho, 1.0)
    return np.where(inside, -1.0 / safe**2, 0.0)


@dataclass(frozen=True)
class SpaceBump:
    """Radial bump in space."""

    center: Tuple[float, float]
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ConstructionError(f"bump radius must be positive. Got {self.radius}")

    def _rho(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d = np.asarray(x, dtype=float) - np.asarray(self.center, dtype=float)
        return d, np.hypot(d[..., 0], d[..., 1]) / self.radius

    def value(self, x: np.ndarray) -> np.ndarray:
        _, rho = self._rho(x)
        return self.amplitude * _bump(rho)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        d, rho = self._rho(x)
        # ∇φ = φ · (-2 / (1 - ρ²)²) · (x - c) / r²
        factor = self.amplitude * _bump(rho) * 2.0 * _bump_log_derivative(rho) / self.radius**2
        return factor[..., None] * d

    @property
    def bounding_box(self) -> Tuple[float, float, float, float]:
        c1, c2 = self.center
        r = self.radius
        return c1 - r, c2 - r, c1 + r, c2 + r


@dataclass(frozen=True)
class SpaceTimeBump:
    """Product χ(t) φ(x) of a time bump and a space bump."""

    space: SpaceBump
    t_center: float
    t_radius: float

    def __post_init__(self):
        if self.t_radius <= 0:
            raise ConstructionError(f"time radius must be positive. Got {self.t_radius}")

    @property
    def time_support(self) -> Tuple[float, float]:
        return self.t_center - self.t_radius, self.t_center + self.t_radius

    def _chi(self, t: float) -> Tuple[float, float]:
        tau = (t - self.t_center) / self.t_radius
        if abs(tau) >= 1.0:
            return 0.0, 0.0
        chi = float(np.exp(1.0 - 1.0 / (1.0 - tau * tau)))
        dchi = chi * (-2.0 * tau / (1.0 - tau * tau) ** 2) / self.t_radius
        return chi, dchi

    def value(self, t: float, x: np.ndarray) -> np.ndarray:
        return self._chi(t)[0] * self.space.value(x)

    def time_derivative(self, t: float, x: np.ndarray) -> np.ndarray:
        return self._chi(t)[1] * self.space.value(x)

    def gradient(self, t: float, x: np.ndarray) -> np.ndarray:
        return self._chi(t)[0] * self.space.gradient(x)

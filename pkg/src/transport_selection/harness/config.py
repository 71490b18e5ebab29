"""
Scenario configuration

Plain ``key = value`` files, one setting per line, ``#`` comments. Lists are comma
separated. Every key has a default; unknown or repeated keys are rejected.
"""
from dataclasses import dataclass, fields, replace
import logging
import os
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from ..errors import ConfigError
from ..fields.smooth import SmoothFieldDef, builtin_field
from ..fields.types import Orientation

logger = logging.getLogger(__name__)

OUT_ENV = "TSL_OUT"
DEFAULT_OUT = "tsl_out"
_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none", "default") else float(text)


def _optional_str(text: str) -> Optional[str]:
    return text.strip() or None


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Everything an experiment run needs.

    Attributes:
        scenario: label written into the manifest
        lam: scale λ of single-scale experiments (config key ``lambda``)
        lambdas: scales of the exact tables
        q_list: truncation levels
        k_ladder: mollification indices tried by the selection
        p, lp_lambdas, window: L^p ladder exponent, scales and space window (x0, y0, x1, y1)
        field, field_strength, field_envelope: the perturbation w
        reflection_sign, orientation, time_mollify_b: construction flags
        radius: ball radius of the selection criterion
        depth: deepest mixing stage checked
        fv_levels: finite-volume grid levels
        residual_resolution: weak residual space step is 2^-residual_resolution
        mc_samples, seed: Monte Carlo push-forward sampling
        flow_step: RK4 step of the smooth flows
        quadrature_cells: Gauss cells per side of the L^p window
        corollary_points: seeded points of the composed-vs-direct flow check
        svg: also render grids as SVG
        out: output directory (else $TSL_OUT, else ./tsl_out)
    """

    scenario: str = "default"
    lam: int = 0
    lambdas: Tuple[int, ...] = (0, 1, 2)
    q_list: Tuple[int, ...] = (1, 2, 3)
    k_ladder: Tuple[int, ...] = (4, 8, 16, 32, 64)
    p: float = 1.0
    lp_lambdas: Tuple[int, ...] = (2, 3, 4, 5, 6)
    window: Tuple[float, ...] = (0.0, 0.0, 1.0, 1.0)
    field: str = "swirl"
    field_strength: Optional[float] = None
    field_envelope: str = "constant"
    reflection_sign: int = -1
    orientation: str = "ccw"
    time_mollify_b: bool = True
    radius: float = 0.5
    depth: int = 6
    fv_levels: Tuple[int, ...] = (5, 6, 7)
    residual_resolution: int = 8
    mc_samples: int = 40000
    seed: int = 0
    flow_step: float = 1e-3
    quadrature_cells: int = 45
    corollary_points: int = 100
    svg: bool = False
    out: Optional[str] = None

    def __post_init__(self):
        checks = [
            (self.reflection_sign in (-1, 1), "reflection_sign must be -1 or 1"),
            (self.p >= 1, "p must be >= 1"),
            (all(v >= 0 for v in self.lambdas + self.lp_lambdas + (self.lam,)),
             "scales must be >= 0"),
            (bool(self.q_list) and all(q >= 1 for q in self.q_list), "q_list needs values >= 1"),
            (bool(self.k_ladder) and all(k >= 1 for k in self.k_ladder),
             "k_ladder needs values >= 1"),
            (len(self.window) == 4 and self.window[0] < self.window[2]
             and self.window[1] < self.window[3], "window must be x0, y0, x1, y1 with x0 < x1"),
            (self.radius >= 0, "radius must be >= 0"),
            (0 <= self.depth <= 12, "depth must lie in [0, 12]"),
            (bool(self.fv_levels) and all(1 <= v <= 10 for v in self.fv_levels),
             "fv_levels must lie in [1, 10]"),
            (self.mc_samples > 0 and self.corollary_points > 0, "sample counts must be positive"),
            (0 < self.flow_step <= 0.1, "flow_step must lie in (0, 0.1]"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        try:
            Orientation.parse(self.orientation)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # ------------------------------------------------------------------
    @property
    def flags(self) -> Dict[str, object]:
        return dict(reflection_sign=self.reflection_sign,
                    orientation=Orientation.parse(self.orientation))

    def perturbation(self, kind: Optional[str] = None) -> SmoothFieldDef:
        kind = kind or self.field
        params = {}
        key = {"swirl": "omega", "compression": "alpha", "shear": "beta"}.get(kind)
        if key is not None and self.field_strength is not None:
            params[key] = self.field_strength
        try:
            return builtin_field(kind, self.field_envelope, **params)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)

    def manifest(self) -> List[Tuple[str, str]]:
        """(key, value) pairs in declaration order, as they would be written in a file."""
        rows = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                text = ", ".join(str(v) for v in value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            else:
                text = "" if value is None else str(value)
            rows.append((_KEY_OF.get(f.name, f.name), text))
        return rows


_PARSERS: Dict[str, Callable[[str], object]] = {
    "scenario": str.strip,
    "lam": int,
    "lambdas": _ints,
    "q_list": _ints,
    "k_ladder": _ints,
    "p": float,
    "lp_lambdas": _ints,
    "window": _floats,
    "field": str.strip,
    "field_strength": _optional_float,
    "field_envelope": str.strip,
    "reflection_sign": int,
    "orientation": str.strip,
    "time_mollify_b": _bool,
    "radius": float,
    "depth": int,
    "fv_levels": _ints,
    "residual_resolution": int,
    "mc_samples": int,
    "seed": int,
    "flow_step": float,
    "quadrature_cells": int,
    "corollary_points": int,
    "svg": _bool,
    "out": _optional_str,
}
_KEY_OF = {"lam": "lambda"}
_ATTR_OF = {v: k for k, v in _KEY_OF.items()}


def parse_assignments(lines: Iterable[str], source: str = "<config>") -> Dict[str, object]:
    """Parse ``key = value`` lines into attribute values."""
    values: Dict[str, object] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, text = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{source}:{number}: expected key = value, got {raw.strip()!r}")
        attr = _ATTR_OF.get(key, key)
        if attr not in _PARSERS:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        if attr in values:
            raise ConfigError(f"{source}:{number}: duplicate key {key!r}")
        try:
            values[attr] = _PARSERS[attr](text.strip())
        except ValueError as exc:
            raise ConfigError(f"{source}:{number}: bad value for {key!r}: {exc}") from exc
    return values


def load_config(path: Optional[Path] = None, overrides: Iterable[str] = ()) -> ScenarioConfig:
    """
    Defaults, then the file at ``path``, then ``key=value`` overrides.

    Raises:
        ConfigError: unreadable file, unknown or duplicate key, bad value or range
    """
    values: Dict[str, object] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values = parse_assignments(text.splitlines(), str(path))
    values.update(parse_assignments(overrides, "--flag"))
    config = replace(ScenarioConfig(), **values)
    logger.debug("resolved config %s", config)
    return config

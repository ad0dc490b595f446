from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .cantor_exception import ResolutionError, SpecError
from .const import (
    DEFAULT_SAMPLES,
    PRESETS,
    Basin,
    MapKind,
    Target,
    TrapMode,
)
from .helper import digest, json_float
from .numerics import circle_points, wind_around

_LOGGER: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) <= self.radius

    def as_dict(self):
        return {
            "center": {"re": self.center.real, "im": self.center.imag},
            "radius": json_float(self.radius),
        }


@dataclass(frozen=True)
class RingAnnulus:
    index: int
    inner: float
    outer: float
    target: Target
    label: str = ""

    @property
    def midline(self) -> float:
        return math.sqrt(self.inner * self.outer)

    def as_dict(self):
        return {
            "index": self.index,
            "label": self.label,
            "inner": json_float(self.inner),
            "outer": json_float(self.outer),
            "target": self.target.value,
        }


@dataclass(frozen=True)
class TrapLayout:
    """Inner trap disk, outer trap |z| > outer_radius and the separating rings."""

    mode: TrapMode
    inner: Disk
    outer_radius: float
    small_threshold: float
    large_threshold: float
    rings: tuple[RingAnnulus, ...] = ()

    def in_inner(self, z):
        return self.inner.contains(z)

    def in_outer(self, z):
        z = np.asarray(z)
        with np.errstate(invalid="ignore"):
            return ~np.isfinite(z) | (np.abs(z) > self.outer_radius)

    @property
    def midlines(self) -> np.ndarray:
        return np.array([ring.midline for ring in self.rings])

    def band_index(self, z):
        return np.searchsorted(self.midlines, np.abs(np.asarray(z)))

    def band_radii(self) -> list[float]:
        edges = [abs(self.inner.center) + self.inner.radius]
        for ring in self.rings:
            edges.extend([ring.inner, ring.outer])
        edges.append(self.outer_radius)
        return [math.sqrt(lo * hi) for lo, hi in zip(edges[::2], edges[1::2])]

    def as_dict(self):
        return {
            "mode": self.mode.value,
            "inner": self.inner.as_dict(),
            "outer_radius": json_float(self.outer_radius),
            "small_threshold": json_float(self.small_threshold),
            "large_threshold": json_float(self.large_threshold),
            "rings": [ring.as_dict() for ring in self.rings],
        }


@dataclass(frozen=True)
class Signature:
    p: int
    n: int
    degrees: tuple[int, ...]

    def as_dict(self):
        return {"p": self.p, "n": self.n, "degrees": list(self.degrees)}

    def __str__(self):
        return f"({self.p}, {self.n}, {tuple(self.degrees)})"


@dataclass
class Check:
    """One sampled inequality; margin is a log-ratio, None when sampling failed."""

    name: str
    margin: float | None
    passed: bool
    strict: bool = True
    detail: dict = field(default_factory=dict)

    @property
    def resolved(self) -> bool:
        return self.margin is not None

    def as_dict(self):
        return {
            "name": self.name,
            "margin": None if self.margin is None else json_float(self.margin),
            "pass": self.passed,
            "strict": self.strict,
            **self.detail,
        }


def unresolved(name: str, ex: Exception) -> Check:
    _LOGGER.warning("Check %s unresolved: %s", name, ex)
    return Check(name, None, False, detail={"error": str(ex)})


class AbstractMap(ABC):
    kind: MapKind = None
    winding_target: complex = 0j

    @abstractmethod
    def log_eval(self, z: np.ndarray) -> np.ndarray:
        """Complex log of the map on an array (branch arbitrary, +-inf at poles/zeros)."""

    @abstractmethod
    def signature(self) -> Signature:
        pass

    @abstractmethod
    def basin_images(self) -> tuple[Basin, Basin]:
        """Where the inner and the outer trap are sent."""

    @abstractmethod
    def default_layout(self) -> TrapLayout:
        pass

    @abstractmethod
    def trap_checks(self, layout: TrapLayout, samples: int) -> list[Check]:
        pass

    @abstractmethod
    def critical_clusters(self, threads: int | None = None) -> list:
        pass

    @abstractmethod
    def to_json(self) -> dict:
        pass

    def notes(self) -> list[str]:
        return []

    def step(self, z: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return np.exp(self.log_eval(np.asarray(z, dtype=complex)))

    def evaluate(self, z: complex) -> complex:
        return complex(self.step(np.array([z], dtype=complex))[0])

    def circle_log_abs(
        self, radius: float, count: int = DEFAULT_SAMPLES, center: complex = 0j
    ) -> np.ndarray:
        values = self.log_eval(circle_points(center, radius, count)).real
        if np.any(np.isnan(values)):
            _LOGGER.debug("NaN on radius %s, shifting samples by half a step", radius)
            values = self.log_eval(circle_points(center, radius, count, 0.5)).real
            if np.any(np.isnan(values)):
                raise ResolutionError(f"Undefined samples on radius {radius}")
        return values

    def log_shifted(self, z: np.ndarray) -> np.ndarray:
        """Complex log of f(z) minus the winding target."""
        if self.winding_target == 0:
            return self.log_eval(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.step(z) - self.winding_target)

    def shifted_values(self, z: np.ndarray) -> np.ndarray:
        """Unit-modulus phases of f - target: 0 at its zeros, NaN at poles."""
        logs = self.log_shifted(np.asarray(z, dtype=complex))
        values = np.exp(1j * np.nan_to_num(logs.imag))
        values[logs.real == -np.inf] = 0.0
        values[np.isnan(logs.real) | (logs.real == np.inf)] = np.nan
        return values

    def circle_values(self, radius: float, count: int = DEFAULT_SAMPLES) -> np.ndarray:
        return self.shifted_values(circle_points(0j, radius, count))

    def winding(self, radius: float, count: int = DEFAULT_SAMPLES) -> int:
        return wind_around(self.shifted_values, 0j, radius, count)

    def spec_hash(self) -> str:
        return digest(self.to_json())

    def image_check(
        self,
        name: str,
        radii,
        target: Target,
        layout: TrapLayout,
        samples: int,
    ) -> Check:
        """Worst log-margin of |f| against the trap threshold over circles |z| = r."""
        try:
            logs = np.concatenate([self.circle_log_abs(r, samples) for r in radii])
        except ResolutionError as ex:
            return unresolved(name, ex)
        if target == Target.SMALL:
            margin = math.log(layout.small_threshold) - float(np.max(logs))
        else:
            margin = float(np.min(logs)) - math.log(layout.large_threshold)
        _LOGGER.debug("%s margin: %s", name, margin)
        return Check(
            name,
            margin,
            margin > 0,
            detail={"target": target.value, "radii": [json_float(r) for r in radii]},
        )


def load_map(obj) -> AbstractMap:
    """Build the adapter for a spec object or its JSON form."""
    from .family import FamilyMap, FamilySpec, McMullenSpec
    from .parabolic import PLambdaMap, PLambdaSpec, PnMap, PnSpec
    from .params import ParamBudget

    if isinstance(obj, AbstractMap):
        return obj
    if isinstance(obj, FamilySpec):
        return FamilyMap(obj)
    if isinstance(obj, McMullenSpec):
        return FamilyMap.from_mcmullen(obj)
    if isinstance(obj, PLambdaSpec):
        return PLambdaMap(obj)
    if isinstance(obj, PnSpec):
        return PnMap(obj)
    if not isinstance(obj, dict):
        raise SpecError(f"Unsupported spec object {type(obj).__name__}", field="/")

    if "spec" in obj:
        budget = None
        if obj.get("budget") is not None:
            budget = ParamBudget.from_dict(obj["budget"])
        return FamilyMap(FamilySpec.from_json(obj["spec"]), budget=budget)

    kind = obj.get("kind", MapKind.FAMILY.value)
    if kind == MapKind.FAMILY:
        return FamilyMap(FamilySpec.from_json(obj))
    elif kind == MapKind.MCMULLEN:
        return FamilyMap.from_mcmullen(McMullenSpec.from_json(obj))
    elif kind == MapKind.PLAMBDA:
        return PLambdaMap(PLambdaSpec.from_json(obj))
    elif kind == MapKind.PN:
        return PnMap(PnSpec.from_json(obj))
    else:
        _LOGGER.error("Unknown map kind %s", kind)
        raise SpecError(f"Unknown map kind '{kind}'", field="/kind")


def find_preset(name: str) -> dict:
    for preset in PRESETS:
        if preset["id"] == name:
            return preset
    raise SpecError(f"Unknown preset '{name}'", field="preset")


def preset_map(name: str) -> AbstractMap:
    from .family import FamilyMap, FamilySpec, McMullenSpec
    from .parabolic import PLambdaMap, PLambdaSpec, PnMap, PnSpec

    preset = find_preset(name)
    match preset["kind"]:
        case MapKind.FAMILY:
            return FamilyMap(
                FamilySpec.from_magnitudes(
                    preset["p"], preset["degrees"], preset["magnitudes"]
                )
            )
        case MapKind.MCMULLEN:
            return FamilyMap.from_mcmullen(
                McMullenSpec(preset["k"], preset["l"], preset["eta"])
            )
        case MapKind.PLAMBDA:
            return PLambdaMap(PLambdaSpec(preset["m"], preset["n"], preset["lambda"]))
        case MapKind.PN:
            return PnMap(PnSpec.from_scale(preset["n"], preset["s"]))

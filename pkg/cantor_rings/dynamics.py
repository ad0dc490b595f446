"""Orbit classification, symbolic itineraries and radial location of Julia components."""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np

from .abstract_map import AbstractMap, TrapLayout
from .cantor_exception import EscapedError, NotBracketed, PoleError
from .const import (
    BISECTION_STEPS,
    BISECTION_WIDTH,
    LOCATE_MAX_ITER,
    LOCATE_SCAN,
    MAX_ITER,
    OUTCOME_INNER,
    OUTCOME_OUTER,
    OUTCOME_UNDECIDED,
    PARABOLIC_WINDOW,
    Basin,
)
from .family import basin_combinatorics

_LOGGER: logging.Logger = logging.getLogger(__name__)

INNER = "inner"
OUTER = "outer"


@dataclass(frozen=True)
class OrbitClass:
    outcome: Basin
    steps: int
    itinerary: tuple[int, ...] = ()
    entered: str | None = None

    def as_dict(self):
        return {
            "outcome": self.outcome.value,
            "steps": self.steps,
            "itinerary": "".join(str(symbol) for symbol in self.itinerary),
            "symbols": list(self.itinerary),
            "entered": self.entered,
        }


def _settle(images: tuple[Basin, Basin], entered: str) -> Basin:
    inner_image, outer_image = images
    if entered == INNER:
        if inner_image == Basin.BASIN_0:
            return Basin.BASIN_0
        # inner -> outer: the outer trap decides unless the two swap forever
        return Basin.BASIN_INFINITY if outer_image == Basin.BASIN_INFINITY else Basin.BASIN_0
    if outer_image == Basin.BASIN_INFINITY:
        return Basin.BASIN_INFINITY
    return Basin.BASIN_0 if inner_image == Basin.BASIN_0 else Basin.BASIN_INFINITY


def eventual_basin(p: int, n: int, entered: str) -> Basin:
    """Basin an orbit ends in once it enters the inner or the outer trap."""
    return _settle(basin_combinatorics(p, n), entered)


def _layout(report) -> TrapLayout:
    return report if isinstance(report, TrapLayout) else report.layout


def classify(
    amap: AbstractMap, report, z: complex, max_iter: int = MAX_ITER
) -> OrbitClass:
    layout = _layout(report)
    images = amap.basin_images()
    symbols = []
    z = complex(z)
    for step in range(max_iter + 1):
        if layout.in_inner(z):
            return OrbitClass(_settle(images, INNER), step, tuple(symbols), INNER)
        if layout.in_outer(z):
            return OrbitClass(_settle(images, OUTER), step, tuple(symbols), OUTER)
        if step == max_iter:
            break
        symbols.append(int(layout.band_index(z)))
        image = amap.evaluate(z)
        if not math.isfinite(abs(image)):
            raise PoleError(f"Orbit hit a pole at z={z}", pole=f"z={z}")
        z = image
    return OrbitClass(Basin.UNDECIDED, max_iter, tuple(symbols))


def itinerary(amap: AbstractMap, report, z: complex, length: int) -> tuple[int, ...]:
    """First `length` band symbols of the orbit of z; EscapedError if a trap comes first."""
    layout = _layout(report)
    symbols = []
    z = complex(z)
    for step in range(length):
        if layout.in_inner(z) or layout.in_outer(z):
            raise EscapedError(
                f"Orbit entered a trap after {step} symbols", step, tuple(symbols)
            )
        symbols.append(int(layout.band_index(z)))
        z = amap.evaluate(z)
    return tuple(symbols)


@dataclass
class Classification:
    """Per-point outcome codes, step counts and packed itinerary prefixes."""

    outcomes: np.ndarray
    steps: np.ndarray
    codes: np.ndarray
    depth: np.ndarray


def classify_many(
    amap: AbstractMap,
    layout: TrapLayout,
    z: np.ndarray,
    max_iter: int = MAX_ITER,
    prefix_depth: int = 0,
) -> Classification:
    """Vectorized classify; codes pack the first prefix_depth symbols base n."""
    z = np.array(z, dtype=complex).ravel()
    base = len(layout.rings) + 1
    outcomes = np.full(z.shape, OUTCOME_UNDECIDED, dtype=np.int8)
    steps = np.full(z.shape, max_iter, dtype=np.int32)
    codes = np.zeros(z.shape, dtype=np.int64)
    depth = np.zeros(z.shape, dtype=np.int32)
    active = np.arange(z.size)
    current = z.copy()
    for step in range(max_iter + 1):
        if active.size == 0:
            break
        inner = layout.in_inner(current)
        outer = layout.in_outer(current) & ~inner
        outcomes[active[inner]] = OUTCOME_INNER
        outcomes[active[outer]] = OUTCOME_OUTER
        steps[active[inner | outer]] = step
        keep = ~(inner | outer)
        active = active[keep]
        current = current[keep]
        if step == max_iter or active.size == 0:
            break
        if step < prefix_depth:
            codes[active] = codes[active] * base + layout.band_index(current)
            depth[active] += 1
        current = amap.step(current)
    return Classification(outcomes, steps, codes, depth)


def _orientations(report) -> np.ndarray:
    """+1 where f keeps the radial order on band j, -1 where it reverses it."""
    return np.array([1 if degree > 0 else -1 for _, degree in report.winding_profile])


def prefix_keys(
    amap: AbstractMap, report, z: np.ndarray, prefix
) -> np.ndarray:
    """0 where z realizes prefix, -1 / +1 where its component lies inside / outside."""
    layout = _layout(report)
    signs = _orientations(report)
    n = len(layout.rings) + 1
    current = np.array(z, dtype=complex).ravel()
    keys = np.zeros(current.shape, dtype=np.int8)
    orientation = np.ones(current.shape, dtype=np.int8)
    open_ = np.ones(current.shape, dtype=bool)
    for k, wanted in enumerate(prefix):
        symbol = layout.band_index(current).astype(np.int64)
        symbol[layout.in_outer(current)] = n
        symbol[layout.in_inner(current)] = -1
        mismatch = open_ & (symbol != wanted)
        keys[mismatch] = (orientation * np.sign(symbol - wanted))[mismatch]
        open_ &= ~mismatch
        if not open_.any() or k == len(prefix) - 1:
            break
        orientation = orientation * signs[np.clip(symbol, 0, n - 1)]
        current = amap.step(current)
    return keys


def prefix_depth(amap: AbstractMap, report, z: complex, prefix) -> int:
    """Number of leading prefix symbols the orbit of z realizes."""
    for depth in range(1, len(prefix) + 1):
        if prefix_keys(amap, report, [z], prefix[:depth])[0] != 0:
            return depth - 1
    return len(prefix)


def _bisect(key, good: float, bad: float) -> float:
    for _ in range(BISECTION_STEPS):
        if abs(good - bad) <= BISECTION_WIDTH * max(good, bad):
            break
        mid = 0.5 * (good + bad)
        if key(mid) == 0:
            good = mid
        else:
            bad = mid
    return good


def _bracket(key_many, lo: float, hi: float):
    radii = np.geomspace(lo, hi, LOCATE_SCAN)
    keys = key_many(radii)
    hits = np.flatnonzero(keys == 0)
    if hits.size == 0:
        return None
    first = int(hits[0])
    last = first
    while last + 1 < len(radii) and keys[last + 1] == 0:
        last += 1

    def key(r):
        return key_many(np.array([r]))[0]

    r_lo = radii[first] if first == 0 else _bisect(key, radii[first], radii[first - 1])
    r_hi = (
        radii[last]
        if last == len(radii) - 1
        else _bisect(key, radii[last], radii[last + 1])
    )
    outer_lo = radii[max(first - 1, 0)]
    outer_hi = radii[min(last + 1, len(radii) - 1)]
    return float(r_lo), float(r_hi), float(outer_lo), float(outer_hi)


def locate_component(
    amap: AbstractMap, report, prefix, angle: float = 0.0
) -> tuple[float, float]:
    """Radius interval on the ray at `angle` whose points realize the prefix."""
    layout = _layout(report)
    n = len(layout.rings) + 1
    prefix = [int(symbol) for symbol in prefix]
    if not prefix or any(not 0 <= symbol < n for symbol in prefix):
        raise NotBracketed(f"Prefix {prefix} is not a word over {n} symbols")
    direction = complex(math.cos(angle), math.sin(angle))
    lo = layout.inner.radius / 2
    hi = 2.0 * layout.outer_radius
    interval = (lo, hi)
    for depth in range(1, len(prefix) + 1):
        word = prefix[:depth]
        found = _bracket(
            lambda radii: prefix_keys(amap, report, radii * direction, word), lo, hi
        )
        if found is None:
            raise NotBracketed(
                f"Prefix {''.join(map(str, word))} not found on the ray at angle {angle}"
            )
        r_lo, r_hi, lo, hi = found
        interval = (r_lo, r_hi)
        _LOGGER.debug("Prefix %s located in [%s, %s]", word, r_lo, r_hi)
    return interval


def parabolic_orbit(
    amap: AbstractMap,
    z0: complex,
    fixed: complex,
    delta: float,
    window: int = PARABOLIC_WINDOW,
    max_iter: int = LOCATE_MAX_ITER,
) -> int | None:
    """Step completing window consecutive approaching steps within delta of fixed.

    A step approaches when it lands closer to fixed than the previous iterate;
    any other step resets the count. None when max_iter runs out first.
    """
    z = complex(z0)
    distance = abs(z - fixed)
    streak = 0
    for step in range(1, max_iter + 1):
        z = amap.evaluate(z)
        new_distance = abs(z - fixed)
        if new_distance < delta and new_distance < distance:
            streak += 1
            if streak >= window:
                return step
        else:
            streak = 0
        distance = new_distance
    _LOGGER.debug("No parabolic convergence from %s within %s steps", z0, max_iter)
    return None

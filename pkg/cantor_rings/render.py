"""Raster images of basins, escape times and itinerary prefixes."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
import logging
from pathlib import Path

import numpy as np
from PIL import Image, ImageColor

from .abstract_map import AbstractMap, TrapLayout, find_preset
from .cantor_exception import DomainError
from .const import (
    INNER_COLOR,
    INNER_SHADES,
    JULIA_COLOR,
    MAX_DEPTH,
    MAX_HUES,
    MAX_ITER,
    MAX_RESOLUTION,
    OUTCOME_INNER,
    OUTCOME_OUTER,
    OUTER_COLOR,
    OUTER_SHADES,
    RenderMode,
)
from .dynamics import Classification, classify_many

_LOGGER: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RenderJob:
    amap: AbstractMap
    layout: TrapLayout
    center: complex
    half_width: float
    width: int
    height: int
    mode: RenderMode = RenderMode.BASIN
    depth: int = 0
    max_iter: int = MAX_ITER

    def __post_init__(self):
        if not (0 < self.width <= MAX_RESOLUTION and 0 < self.height <= MAX_RESOLUTION):
            raise DomainError(
                f"Resolution {self.width}x{self.height} outside 1..{MAX_RESOLUTION}"
            )
        if not self.half_width > 0:
            raise DomainError(f"Half-width must be positive, got {self.half_width}")
        if RenderMode(self.mode) == RenderMode.ITINERARY:
            if not 1 <= self.depth <= MAX_DEPTH:
                raise DomainError(f"Itinerary depth {self.depth} outside 1..{MAX_DEPTH}")
            if self.symbols**self.depth > MAX_HUES:
                raise DomainError(
                    f"{self.symbols}^{self.depth} prefixes exceed {MAX_HUES} hues"
                )

    @property
    def symbols(self) -> int:
        return len(self.layout.rings) + 1

    @property
    def half_height(self) -> float:
        return self.half_width * self.height / self.width

    def row(self, y: int) -> np.ndarray:
        """Pixel centres of row y, counted from the top."""
        columns = (2 * np.arange(self.width) + 1) / self.width - 1
        x = self.center.real + self.half_width * columns
        im = self.center.imag + self.half_height * (1 - (2 * y + 1) / self.height)
        return x + 1j * im


def job_for_preset(
    name: str,
    amap: AbstractMap,
    layout: TrapLayout,
    px: int = 512,
    mode: RenderMode = RenderMode.BASIN,
    depth: int = 0,
    max_iter: int = MAX_ITER,
) -> RenderJob:
    viewport = find_preset(name)["viewport"]
    return RenderJob(
        amap,
        layout,
        complex(viewport["center"]),
        viewport["half_width"],
        px,
        px,
        RenderMode(mode),
        depth,
        max_iter,
    )


@lru_cache(maxsize=16)
def itinerary_palette(hues: int, value: int) -> np.ndarray:
    return np.array(
        [ImageColor.getrgb(f"hsv({360 * k // hues},80%,{value}%)") for k in range(hues)],
        dtype=np.uint8,
    )


def _colour_row(job: RenderJob, y: int) -> np.ndarray:
    result = classify_many(
        job.amap,
        job.layout,
        job.row(y),
        job.max_iter,
        prefix_depth=job.depth if job.mode == RenderMode.ITINERARY else 0,
    )
    inner = result.outcomes == OUTCOME_INNER
    outer = result.outcomes == OUTCOME_OUTER
    pixels = np.empty((job.width, 3), dtype=np.uint8)
    pixels[:] = JULIA_COLOR
    match RenderMode(job.mode):
        case RenderMode.BASIN:
            pixels[inner] = INNER_COLOR
            pixels[outer] = OUTER_COLOR
        case RenderMode.ESCAPE:
            shades = np.array(INNER_SHADES, dtype=np.uint8)
            pixels[inner] = shades[result.steps[inner] % len(shades)]
            shades = np.array(OUTER_SHADES, dtype=np.uint8)
            pixels[outer] = shades[result.steps[outer] % len(shades)]
        case RenderMode.ITINERARY:
            pixels[:] = prefix_colours(result, job.symbols, job.depth)
    return pixels


def prefix_colours(result: Classification, symbols: int, depth: int) -> np.ndarray:
    """Prefix hues at full depth; orbits trapped sooner get a grey shade by depth."""
    inner = result.outcomes == OUTCOME_INNER
    outer = result.outcomes == OUTCOME_OUTER
    full = result.depth == depth
    pixels = np.empty((len(result.outcomes), 3), dtype=np.uint8)
    pixels[:] = JULIA_COLOR
    hues = symbols**depth
    pixels[inner & full] = itinerary_palette(hues, 60)[result.codes[inner & full]]
    pixels[outer & full] = itinerary_palette(hues, 100)[result.codes[outer & full]]
    shades = np.array(INNER_SHADES, dtype=np.uint8)
    pixels[inner & ~full] = shades[result.depth[inner & ~full] % len(shades)]
    shades = np.array(OUTER_SHADES, dtype=np.uint8)
    pixels[outer & ~full] = shades[result.depth[outer & ~full] % len(shades)]
    return pixels


def render(job: RenderJob, threads: int | None = None) -> np.ndarray:
    """height x width x 3 RGB array; rows are independent and reassembled in order."""
    _LOGGER.debug(
        "Rendering %sx%s %s around %s", job.width, job.height, job.mode, job.center
    )
    with ThreadPoolExecutor(max_workers=threads) as executor:
        rows = list(executor.map(lambda y: _colour_row(job, y), range(job.height)))
    return np.stack(rows)


def ppm_bytes(image: np.ndarray) -> bytes:
    height, width, _ = image.shape
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def write_ppm(path, image: np.ndarray) -> Path:
    path = Path(path)
    path.write_bytes(ppm_bytes(image))
    _LOGGER.info("Wrote %s", path)
    return path


def write_png(path, image: np.ndarray) -> Path:
    path = Path(path)
    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), "RGB").save(path, "PNG")
    _LOGGER.info("Wrote %s", path)
    return path


def write_image(path, image: np.ndarray) -> Path:
    if Path(path).suffix.lower() == ".png":
        return write_png(path, image)
    return write_ppm(path, image)


def transitions(colours: np.ndarray) -> int:
    """Number of colour changes along a line of pixels."""
    colours = np.asarray(colours)
    return int(np.count_nonzero(np.any(colours[1:] != colours[:-1], axis=-1)))

"""Numerical Cantor-circle certification: traps, ring images, covering degrees, verdict."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .abstract_map import (
    AbstractMap,
    Check,
    Disk,
    RingAnnulus,
    Signature,
    TrapLayout,
    load_map,
    unresolved,
)
from .cantor_exception import (
    CantorException,
    ConvergenceError,
    ResolutionError,
    SpecError,
)
from .const import (
    DEFAULT_SAMPLES,
    EMPIRICAL_RING_PAD,
    RING_CIRCLES,
    TRAP_FIT_GRID,
    TRAP_FIT_SPAN,
    Basin,
    Target,
    TrapMode,
    Verdict,
)
from .helper import band_sign, json_float, ring_target

_LOGGER: logging.Logger = logging.getLogger(__name__)

BAND_CAVEAT = (
    "Bands are separated by rings fitted around the critical points; "
    "they coincide with the covering bands only for budget certifications."
)


@dataclass(frozen=True)
class TrapSpec:
    """User-supplied trap radii; either may be left to the fit."""

    s: float | None = None
    outer: float | None = None


@dataclass
class CertificationReport:
    spec_hash: str
    kind: str
    trap_mode: TrapMode
    layout: TrapLayout
    signature: Signature
    checks: list[Check] = field(default_factory=list)
    winding_profile: list[tuple[float, int]] = field(default_factory=list)
    expected_degrees: tuple[int, ...] = ()
    verdict: Verdict = Verdict.INCONCLUSIVE
    reasons: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    clusters: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == Verdict.CERTIFIED

    @property
    def ring_checks(self) -> list[Check]:
        return [check for check in self.checks if check.name.startswith("ring_")]

    def check(self, name: str) -> Check:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def as_dict(self):
        return {
            "spec_hash": self.spec_hash,
            "kind": self.kind,
            "trap_mode": self.trap_mode.value,
            "layout": self.layout.as_dict(),
            "checks": [check.as_dict() for check in self.checks],
            "winding_profile": [
                {"radius": json_float(r), "degree": d} for r, d in self.winding_profile
            ],
            "signature": self.signature.as_dict(),
            "verdict": self.verdict.value,
            "reasons": list(self.reasons),
            "notes": list(self.notes),
            "critical": [cluster.as_dict() for cluster in self.clusters],
        }


def _ring_radii(inner: float, outer: float, circles: int) -> np.ndarray:
    if inner > 0.0:
        return np.geomspace(inner, outer, circles)
    return np.linspace(outer / circles, outer, circles)


def ring_image_check(
    amap: AbstractMap,
    layout: TrapLayout,
    i: int,
    inner_radius: float | None = None,
    outer_radius: float | None = None,
    samples: int = DEFAULT_SAMPLES,
    circles: int = RING_CIRCLES,
) -> Check:
    """|f| over circles filling ring i against the small or large trap threshold."""
    ring = layout.rings[i - 1]
    inner = ring.inner if inner_radius is None else inner_radius
    outer = ring.outer if outer_radius is None else outer_radius
    radii = _ring_radii(inner, outer, circles)
    return amap.image_check(
        f"ring_{ring.index}", list(radii), ring.target, layout, samples
    )


def with_traps(layout: TrapLayout, s_trap: float, outer_trap: float) -> TrapLayout:
    return replace(
        layout,
        inner=Disk(layout.inner.center, s_trap),
        outer_radius=outer_trap,
        small_threshold=s_trap,
        large_threshold=outer_trap,
    )


def trap_checks(
    amap: AbstractMap,
    s_trap: float | None = None,
    outer_trap: float | None = None,
    layout: TrapLayout | None = None,
    samples: int = DEFAULT_SAMPLES,
) -> list[Check]:
    if layout is None:
        layout = amap.default_layout()
    if s_trap is not None or outer_trap is not None:
        layout = with_traps(
            layout,
            layout.inner.radius if s_trap is None else s_trap,
            layout.outer_radius if outer_trap is None else outer_trap,
        )
    return amap.trap_checks(layout, samples)


def winding_profile(
    amap: AbstractMap, radii, samples: int = DEFAULT_SAMPLES
) -> list[tuple[float, int]]:
    return [(float(r), amap.winding(float(r), samples)) for r in radii]


def invert_signature(signature: Signature) -> Signature:
    """Signature after conjugating by z -> 1/z."""
    p = signature.p if signature.n % 2 else 1 - signature.p
    return Signature(p, signature.n, tuple(reversed(signature.degrees)))


def expected_winding(signature: Signature) -> tuple[int, ...]:
    """Signed winding degrees of f on its bands, innermost first."""
    n, p = signature.n, signature.p
    return tuple(
        band_sign(n, k, p) * d for k, d in enumerate(signature.degrees, start=1)
    )


def signatures_conjugate(s1: Signature, s2: Signature) -> bool:
    return s1 == s2 or s1 == invert_signature(s2)


def _extremes(amap: AbstractMap, radii, samples: int) -> tuple[float, float]:
    logs = np.concatenate([amap.circle_log_abs(r, samples) for r in radii])
    return float(np.max(logs)), float(np.min(logs))


def empirical_rings(amap: AbstractMap, clusters) -> tuple[RingAnnulus, ...]:
    """Rings around the refined critical points, padded by 0.5 %."""
    spec = amap.spec
    rings = []
    for cluster in clusters:
        moduli = [abs(w) for w in cluster.refined]
        rings.append(
            RingAnnulus(
                cluster.ring_index,
                min(moduli) * (1 - EMPIRICAL_RING_PAD),
                max(moduli) * (1 + EMPIRICAL_RING_PAD),
                ring_target(spec.n, cluster.ring_index, spec.p),
                f"A{cluster.ring_index}",
            )
        )
    return tuple(rings)


def fit_traps(
    amap: AbstractMap,
    rings: tuple[RingAnnulus, ...],
    traps: TrapSpec | None = None,
    samples: int = DEFAULT_SAMPLES,
    circles: int = RING_CIRCLES,
) -> TrapLayout:
    """Trap radii on a log grid maximising the worst trap and ring margin."""
    traps = traps or TrapSpec()
    innermost = rings[0].inner
    outermost = rings[-1].outer
    steps = np.arange(1, TRAP_FIT_GRID + 1) / TRAP_FIT_GRID
    if traps.s is not None:
        s_grid = np.array([traps.s])
    else:
        s_grid = innermost * np.exp(-TRAP_FIT_SPAN * steps)
    if traps.outer is not None:
        r_grid = np.array([traps.outer])
    else:
        r_grid = outermost * np.exp(TRAP_FIT_SPAN * steps)

    inner_image, outer_image = amap.basin_images()
    log_s = np.log(s_grid)[:, None]
    log_r = np.log(r_grid)[None, :]
    worst = np.full((len(s_grid), len(r_grid)), np.inf)

    def fold(margin):
        nonlocal worst
        worst = np.minimum(worst, margin)

    for ring in rings:
        hi, lo = _extremes(amap, _ring_radii(ring.inner, ring.outer, circles), samples)
        fold(log_s - hi if ring.target == Target.SMALL else lo - log_r)
    inner_stats = np.array(
        [_extremes(amap, [s, s / 2, s / 4], samples) for s in s_grid]
    )
    outer_stats = np.array(
        [_extremes(amap, [r, 2 * r, 4 * r], samples) for r in r_grid]
    )
    if inner_image == Basin.BASIN_0:
        fold(log_s - inner_stats[:, 0][:, None])
    else:
        fold(inner_stats[:, 1][:, None] - log_r)
    if outer_image == Basin.BASIN_0:
        fold(log_s - outer_stats[:, 0][None, :])
    else:
        fold(outer_stats[:, 1][None, :] - log_r)

    with np.errstate(invalid="ignore"):
        best = np.unravel_index(np.nanargmax(worst), worst.shape)
    s_trap = float(s_grid[best[0]])
    outer_trap = float(r_grid[best[1]])
    _LOGGER.debug(
        "Fitted traps s=%s, outer=%s with worst margin %s",
        s_trap,
        outer_trap,
        worst[best],
    )
    return TrapLayout(
        TrapMode.EMPIRICAL, Disk(0j, s_trap), outer_trap, s_trap, outer_trap, rings
    )


def critical_values_check(amap: AbstractMap, layout: TrapLayout, clusters) -> Check:
    """Every refined critical point must land inside one of the traps."""
    points = np.array(
        [w for cluster in clusters for w in cluster.points], dtype=complex
    )
    values = amap.step(points)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = math.log(layout.inner.radius) - np.log(np.abs(values - layout.inner.center))
        outer = np.log(np.abs(values)) - math.log(layout.outer_radius)
    margins = np.nan_to_num(np.maximum(inner, outer), nan=-np.inf)
    margin = float(np.min(margins)) if len(margins) else math.inf
    return Check("critical_values", margin, margin > 0, detail={"count": len(points)})


def localization_check(clusters) -> Check:
    """Refined points against the predicted positions, log(bound / distance)."""
    margin = math.inf
    for cluster in clusters:
        for distance in cluster.distances:
            if distance > 0:
                margin = min(margin, math.log(cluster.bound) - math.log(distance))
    distinct = all(cluster.distinct for cluster in clusters)
    return Check(
        "critical_localization",
        margin,
        margin > 0 and distinct,
        detail={"distinct": distinct},
    )


def margins_at(
    amap: AbstractMap,
    layout: TrapLayout,
    samples: int,
    circles: int = RING_CIRCLES,
) -> dict[str, float | None]:
    """Trap and ring margins at one sample density."""
    checks = amap.trap_checks(layout, samples)
    checks += [
        ring_image_check(amap, layout, i, samples=samples, circles=circles)
        for i in range(1, len(layout.rings) + 1)
    ]
    return {check.name: check.margin for check in checks}


def _budget_passes(amap: AbstractMap) -> bool:
    from .params import audit_budget

    try:
        return audit_budget(amap.spec, amap.fitted_budget()).passed
    except (CantorException, ValueError) as ex:
        _LOGGER.debug("No usable budget: %s", ex)
        return False


def resolve_mode(amap: AbstractMap, mode: TrapMode) -> TrapMode:
    has_budget = hasattr(amap, "fitted_budget")
    match TrapMode(mode):
        case TrapMode.AUTO:
            if not has_budget:
                return TrapMode.LEMMA
            return TrapMode.BUDGET if _budget_passes(amap) else TrapMode.EMPIRICAL
        case TrapMode.EMPIRICAL if not has_budget:
            raise SpecError("Empirical traps need a hyperbolic family map", field="traps")
        case TrapMode.BUDGET | TrapMode.LEMMA if has_budget:
            return TrapMode.BUDGET
        case TrapMode.BUDGET | TrapMode.LEMMA:
            return TrapMode.LEMMA
    return TrapMode(mode)


def assemble_verdict(report: CertificationReport) -> CertificationReport:
    failed = [check.name for check in report.checks if check.resolved and not check.passed]
    pending = [check.name for check in report.checks if not check.resolved]
    degrees = tuple(d for _, d in report.winding_profile)
    if not report.winding_profile:
        pending.append("winding_profile")
    elif degrees != tuple(report.expected_degrees):
        _LOGGER.info(
            "Winding degrees %s differ from %s", degrees, tuple(report.expected_degrees)
        )
        failed.append("winding_profile")
    if failed:
        report.verdict = Verdict.FAILED
        report.reasons = failed + pending
    elif pending:
        report.verdict = Verdict.INCONCLUSIVE
        report.reasons = pending
    else:
        report.verdict = Verdict.CERTIFIED
        report.reasons = []
    _LOGGER.info("Verdict %s for %s", report.verdict.value, report.spec_hash[:12])
    return report


def certify(
    obj,
    traps: TrapSpec | None = None,
    mode: TrapMode = TrapMode.AUTO,
    samples: int = DEFAULT_SAMPLES,
    circles: int = RING_CIRCLES,
    threads: int | None = None,
    extra_checks: list[Check] | None = None,
) -> CertificationReport:
    """Run every trap, ring, critical-value and winding check and assemble the verdict."""
    amap = load_map(obj)
    mode = resolve_mode(amap, mode)
    notes = list(amap.notes())
    checks: list[Check] = list(extra_checks or [])

    clusters = []
    try:
        clusters = amap.critical_clusters(threads)
    except (ConvergenceError, ResolutionError) as ex:
        checks.append(unresolved("critical_points", ex))

    if mode == TrapMode.EMPIRICAL:
        if clusters:
            layout = fit_traps(amap, empirical_rings(amap, clusters), traps, samples, circles)
        else:
            layout = amap.default_layout()
        notes.append(BAND_CAVEAT)
    else:
        layout = amap.default_layout()
        if traps is not None:
            layout = with_traps(
                layout,
                traps.s or layout.inner.radius,
                traps.outer or layout.outer_radius,
            )

    checks += amap.trap_checks(layout, samples)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        checks += list(
            executor.map(
                lambda i: ring_image_check(
                    amap, layout, i, samples=samples, circles=circles
                ),
                range(1, len(layout.rings) + 1),
            )
        )
    if clusters:
        checks.append(critical_values_check(amap, layout, clusters))
        if mode in (TrapMode.BUDGET, TrapMode.LEMMA):
            checks.append(localization_check(clusters))

    signature = amap.signature()
    report = CertificationReport(
        amap.spec_hash(),
        amap.kind.value,
        mode,
        layout,
        signature,
        checks,
        expected_degrees=expected_winding(signature),
        notes=notes,
        clusters=clusters,
    )
    try:
        report.winding_profile = winding_profile(amap, layout.band_radii(), samples)
    except ResolutionError as ex:
        _LOGGER.warning("Winding profile unresolved: %s", ex)
        report.notes.append(f"winding profile unresolved: {ex}")
    return assemble_verdict(report)

"""Critical points of f_{p,d1..dn}: prediction, Newton refinement and a root-finder oracle."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as P

from .cantor_exception import ConvergenceError, PoleError, ScaleError
from .const import (
    MAX_ORACLE_DEGREE,
    NEWTON_GUARD,
    NEWTON_MAX_STEPS,
    NEWTON_TOL,
    RESOLUTION_FLOOR,
)
from .family import FamilySpec, log_deriv_with_slope
from .helper import complex_to_dict, json_float, parity_sign
from .numerics import ONE, ZERO, XComplex

_LOGGER: logging.Logger = logging.getLogger(__name__)

ABERTH_MAX_ITER = 500
ABERTH_TOL = 1e-14
POLISH_STEPS = 3
# Smallest |alpha|^D the oracle expands before giving up on the double range
MIN_SCALED_POWER = 1e-290
# Newton stops once a step moves z by less than this, relative to |z|
STEP_TOL = 1e-13


@dataclass
class CriticalCluster:
    ring_index: int
    r_i: float
    predicted: list[complex]
    bound: float
    annulus: tuple[float, float]
    refined: list[complex] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    within_bound: bool | None = None
    distinct: bool | None = None
    in_annulus: bool | None = None
    # predicted and refined are offsets from origin
    origin: complex = 0j
    # |refined - predicted| with unresolved displacements replaced by estimates
    deviations: list[float] = field(default_factory=list)

    @property
    def points(self) -> list[complex]:
        return [self.origin + w for w in self.refined]

    @property
    def distances(self) -> list[float]:
        if self.deviations:
            return list(self.deviations)
        return [abs(w - w0) for w, w0 in zip(self.refined, self.predicted)]

    def as_dict(self):
        return {
            "ring_index": self.ring_index,
            "origin": complex_to_dict(self.origin),
            "r_i": self.r_i,
            "bound": json_float(self.bound),
            "annulus": [json_float(r) for r in self.annulus],
            "predicted": [complex_to_dict(w) for w in self.predicted],
            "refined": [complex_to_dict(w) for w in self.refined],
            "distances": [json_float(d) for d in self.distances],
            "residuals": [json_float(r) for r in self.residuals],
            "within_bound": self.within_bound,
            "distinct": self.distinct,
            "in_annulus": self.in_annulus,
        }


def predicted(spec: FamilySpec, budget=None) -> list[CriticalCluster]:
    """D_i points r_i a_i exp(i pi (2j-1)/D_i) per ring, with the u^(2/K)|a_i| bound."""
    from .params import budget_layout, fit_budget

    if budget is None:
        budget = fit_budget(spec)
    layout = budget_layout(spec, budget)
    eps = math.exp(2 / budget.K * budget.log_u)
    clusters = []
    for i, D in enumerate(spec.D, start=1):
        a = spec.param(i).to_complex()
        if a == 0:
            raise ScaleError(f"a{i} underflows the double range")
        r = (spec.degrees[i - 1] / spec.degrees[i]) ** (1 / D)
        points = [
            r * a * np.exp(1j * math.pi * (2 * j - 1) / D) for j in range(1, D + 1)
        ]
        ring = layout.rings[i - 1]
        clusters.append(
            CriticalCluster(
                i,
                r,
                [complex(w) for w in points],
                eps * abs(a),
                (ring.inner, ring.outer),
            )
        )
    return clusters


def _newton(spec: FamilySpec, seed: complex, annulus, tol: float):
    """Newton on g = (-1)^p z f'/f from one seed; returns (root, |g(root)|)."""
    inner, outer = annulus[0] / NEWTON_GUARD, annulus[1] * NEWTON_GUARD
    z = seed
    for step in range(NEWTON_MAX_STEPS):
        try:
            value, slope = log_deriv_with_slope(spec, z)
        except PoleError as ex:
            raise ConvergenceError(f"Newton hit a pole from {seed}", seed) from ex
        if slope == 0:
            raise ConvergenceError(f"Flat Newton step from {seed}", seed)
        delta = z * value / slope
        z = z - delta
        if not inner <= abs(z) <= outer:
            raise ConvergenceError(
                f"Newton iterate {z} left the annulus [{inner}, {outer}]", seed
            )
        if abs(delta) <= STEP_TOL * abs(z):
            _LOGGER.debug("Seed %s converged in %s steps", seed, step + 1)
            break
    residual = abs(log_deriv_with_slope(spec, z)[0])
    if not residual < tol:
        raise ConvergenceError(
            f"No convergence from {seed} in {NEWTON_MAX_STEPS} steps "
            f"(residual {residual})",
            seed,
        )
    return z, residual


def displacement_estimate(spec: FamilySpec, i: int, seed: complex) -> float:
    """First-order |w - seed| for the ring-i critical point near its predicted seed.

    The seed is an exact root of g with every other ring at its limit (t -> 0
    inside, t -> infinity outside); the remaining tails, summed in XComplex,
    give the Newton displacement without cancellation.
    """
    xz = XComplex.from_complex(seed)
    tail = ZERO
    curvature = 0j
    for j, D in enumerate(spec.D, start=1):
        ratio = spec.param(j).div(xz)
        if ratio.log_abs() <= 0.0:
            t = ratio.int_pow(D)
            part = t.div(ONE.sub(t))
        else:
            t = ratio.int_pow(-D)
            part = t.div(ONE.sub(t)).neg()
        sign = parity_sign(spec.n - j)
        if j == i:
            curvature = -sign * D * D * t.div(ONE.sub(t).int_pow(2)).to_complex()
        else:
            tail = tail.add(part.mul(XComplex.from_complex(complex(sign * D))))
    if tail.is_zero or curvature == 0:
        return 0.0
    step = tail.div(XComplex.from_complex(curvature))
    return abs(seed) * math.exp(step.log_abs())


def _deviation(spec: FamilySpec, i: int, refined: complex, seed: complex) -> float:
    measured = abs(refined - seed)
    if measured > RESOLUTION_FLOOR * abs(seed):
        return measured
    return displacement_estimate(spec, i, seed)


def _within(radius: float, inner: float, outer: float) -> bool:
    slack = RESOLUTION_FLOOR * radius
    return inner - slack < radius < outer + slack


def _separated(points: list[complex], bound: float) -> bool:
    for k, w in enumerate(points):
        for other in points[k + 1 :]:
            if not abs(w - other) > bound:
                return False
    return True


def refine(
    spec: FamilySpec,
    clusters: list[CriticalCluster],
    threads: int | None = None,
    tol: float = NEWTON_TOL,
) -> list[CriticalCluster]:
    """Polish every predicted point and record the bound, distinctness and annulus flags."""
    seeds = [(cluster, w) for cluster in clusters for w in cluster.predicted]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(
            executor.map(
                lambda item: _newton(spec, item[1], item[0].annulus, tol), seeds
            )
        )

    refined = []
    offset = 0
    for cluster in clusters:
        chunk = results[offset : offset + len(cluster.predicted)]
        offset += len(cluster.predicted)
        points = [z for z, _ in chunk]
        inner, outer = cluster.annulus
        deviations = [
            _deviation(spec, cluster.ring_index, w, w0)
            for w, w0 in zip(points, cluster.predicted)
        ]
        updated = replace(
            cluster,
            refined=points,
            residuals=[res for _, res in chunk],
            deviations=deviations,
            within_bound=all(d < cluster.bound for d in deviations),
            distinct=_separated(points, cluster.bound),
            in_annulus=all(_within(abs(w), inner, outer) for w in points),
        )
        if not updated.within_bound:
            _LOGGER.info(
                "Ring %s: critical points farther than %s from prediction",
                cluster.ring_index,
                cluster.bound,
            )
        refined.append(updated)
    return refined


def _hull_radii(coeffs: np.ndarray) -> list[tuple[int, float]]:
    """Upper Newton polygon of log|c_k|: (root count, modulus) per edge."""
    logs = np.full(len(coeffs), -np.inf)
    nonzero = coeffs != 0
    logs[nonzero] = np.log(np.abs(coeffs[nonzero]))
    hull = []
    for k in np.flatnonzero(nonzero):
        while len(hull) >= 2:
            h0, h1 = hull[-2], hull[-1]
            if (logs[h1] - logs[h0]) * (k - h0) <= (logs[k] - logs[h0]) * (h1 - h0):
                hull.pop()
            else:
                break
        hull.append(k)
    return [
        (int(j - i), math.exp((logs[i] - logs[j]) / (j - i)))
        for i, j in zip(hull, hull[1:])
    ]


def _initial_guesses(coeffs: np.ndarray) -> np.ndarray:
    guesses = []
    for count, radius in _hull_radii(coeffs):
        phi = math.pi / (2 * count) + 0.4
        guesses.extend(
            radius * np.exp(1j * (2 * math.pi * np.arange(1, count + 1) / count + phi))
        )
    return np.array(guesses, dtype=complex)


def aberth_roots(
    coeffs, max_iter: int = ABERTH_MAX_ITER, tol: float = ABERTH_TOL
) -> np.ndarray:
    """All roots of sum c_k z^k (ascending coefficients) by Aberth-Ehrlich iteration."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if not np.all(np.isfinite(coeffs)):
        raise ScaleError("Non-finite polynomial coefficients, use log-space evaluation")
    coeffs = np.trim_zeros(coeffs, "b")
    if len(coeffs) == 0:
        raise ScaleError("Zero polynomial has no isolated roots")
    low_zeros = len(coeffs) - len(np.trim_zeros(coeffs, "f"))
    core = coeffs[low_zeros:]
    degree = len(core) - 1
    if degree == 0:
        return np.zeros(low_zeros, dtype=complex)

    deriv = P.polyder(core)
    z = _initial_guesses(core)
    active = np.ones(degree, dtype=bool)
    for iteration in range(max_iter):
        idx = np.flatnonzero(active)
        zi = z[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = P.polyval(zi, core) / P.polyval(zi, deriv)
            diff = zi[:, None] - z[None, :]
            diff[np.arange(len(idx)), idx] = np.inf
            repulsion = np.sum(1.0 / diff, axis=1)
            w = ratio / (1.0 - ratio * repulsion)
        w[~np.isfinite(w)] = 0.0
        z[idx] = zi - w
        active[idx] = np.abs(w) > tol * np.abs(z[idx])
        if not active.any():
            _LOGGER.debug("Aberth converged after %s iterations", iteration + 1)
            break
    else:
        _LOGGER.debug("Aberth stopped with %s roots unconverged", int(active.sum()))

    for _ in range(POLISH_STEPS):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = P.polyval(z, core) / P.polyval(z, deriv)
        step[~np.isfinite(step)] = 0.0
        z = z - step
    return np.concatenate([np.zeros(low_zeros, dtype=complex), z])


def _scaled_factors(spec: FamilySpec):
    """Numerator and denominator of f(c zeta)/C with c = |a_(n-1)|, ascending coefficients."""
    if spec.degree > MAX_ORACLE_DEGREE:
        raise ScaleError(
            f"Degree {spec.degree} exceeds {MAX_ORACLE_DEGREE}, use log-space evaluation"
        )
    log_c = spec.log_mags[-1]
    num = np.array([1.0 + 0j])
    den = np.array([1.0 + 0j])
    e0 = spec.leading_exponent
    monomial = np.zeros(abs(e0) + 1, dtype=complex)
    monomial[-1] = 1.0
    if e0 > 0:
        num = monomial
    else:
        den = monomial
    for i, (D, sigma) in enumerate(zip(spec.D, spec.exponents), start=1):
        log_alpha = spec.log_mags[i - 1] - log_c
        if D * log_alpha < math.log(MIN_SCALED_POWER):
            raise ScaleError(
                f"|a{i}/a{spec.n - 1}|^{D} underflows, use log-space evaluation"
            )
        alpha_pow = math.exp(D * log_alpha) * np.exp(1j * D * spec.phases[i - 1])
        factor = np.zeros(D + 1, dtype=complex)
        factor[0] = -alpha_pow
        factor[-1] = 1.0
        if sigma > 0:
            num = P.polymul(num, factor)
        else:
            den = P.polymul(den, factor)
    exponent = e0 + sum(s * D for s, D in zip(spec.exponents, spec.D))
    return num, den, log_c, exponent


@dataclass(frozen=True)
class OracleResult:
    free_roots: np.ndarray
    zero_multiplicity: int
    infinity_multiplicity: int
    degree: int

    @property
    def total(self) -> int:
        return len(self.free_roots) + self.zero_multiplicity + self.infinity_multiplicity

    @property
    def expected(self) -> int:
        return 2 * self.degree - 2

    def as_dict(self):
        return {
            "free_roots": [complex_to_dict(complex(w)) for w in self.free_roots],
            "zero_multiplicity": self.zero_multiplicity,
            "infinity_multiplicity": self.infinity_multiplicity,
            "total": self.total,
            "expected": self.expected,
        }


def oracle_all_critical(spec: FamilySpec) -> OracleResult:
    """Critical points as the roots of P'Q - PQ' for f = C P/Q after rescaling."""
    num, den, log_c, _ = _scaled_factors(spec)
    wronskian = P.polysub(
        P.polymul(P.polyder(num), den), P.polymul(num, P.polyder(den))
    )
    wronskian = np.trim_zeros(wronskian, "b")
    low_zeros = len(wronskian) - len(np.trim_zeros(wronskian, "f"))
    roots = aberth_roots(wronskian[low_zeros:])
    degree = max(len(num), len(den)) - 1
    infinity = 2 * degree - 2 - (len(wronskian) - 1)
    result = OracleResult(roots * math.exp(log_c), low_zeros, infinity, degree)
    if result.total != result.expected:
        _LOGGER.warning(
            "Critical count %s differs from 2 deg - 2 = %s", result.total, result.expected
        )
    return result


def preimages(spec: FamilySpec, w: complex) -> np.ndarray:
    """All solutions of f(z) = w, as roots of P - (w/C) Q."""
    num, den, log_c, exponent = _scaled_factors(spec)
    log_ratio = -exponent * log_c
    if w != 0 and math.log(abs(w)) + log_ratio > 700.0:
        raise ScaleError(f"w/C overflows for w={w}")
    target = complex(w) * math.exp(log_ratio) if w != 0 else 0j
    return aberth_roots(P.polysub(num, target * den)) * math.exp(log_c)

"""The hyperbolic family f_{p,d1..dn} and the McMullen maps z^k + eta/z^l."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
import logging
import math

import numpy as np
import voluptuous as vol

from .abstract_map import AbstractMap, Check, Signature, TrapLayout
from .cantor_exception import PoleError, SpecError
from .const import POLE_PROXIMITY, Basin, MapKind, Target
from .helper import complex_to_dict, dict_to_complex, json_pointer, parity_sign
from .numerics import XComplex, log1m, scale_log

_LOGGER: logging.Logger = logging.getLogger(__name__)

LN10 = math.log(10.0)
TWO_PI = 2.0 * math.pi

PARAM_SCHEMA = vol.Schema(
    {
        vol.Required("log10_mag"): vol.Coerce(float),
        vol.Required("phase_rad"): vol.Coerce(float),
    }
)

FAMILY_SCHEMA = vol.Schema(
    {
        vol.Optional("kind"): MapKind.FAMILY.value,
        vol.Required("p"): vol.In([0, 1]),
        vol.Required("degrees"): [int],
        vol.Required("params"): [PARAM_SCHEMA],
    }
)

MCMULLEN_SCHEMA = vol.Schema(
    {
        vol.Required("kind"): MapKind.MCMULLEN.value,
        vol.Required("k"): vol.All(int, vol.Range(min=2)),
        vol.Required("l"): vol.All(int, vol.Range(min=2)),
        vol.Required("eta"): vol.Any(
            {vol.Required("re"): vol.Coerce(float), vol.Required("im"): vol.Coerce(float)},
            vol.Coerce(float),
        ),
    }
)


def _validated(schema: vol.Schema, obj, what: str) -> dict:
    try:
        return schema(obj)
    except vol.MultipleInvalid as ex:
        _LOGGER.error("Invalid %s spec: %s", what, ex)
        raise SpecError(
            f"Invalid {what} spec: {ex.msg}", field=json_pointer(ex.path)
        ) from ex


@dataclass(frozen=True)
class FamilySpec:
    """One map f_{p,d1..dn}; a_i stored as (log10 |a_i|, phase)."""

    p: int
    degrees: tuple[int, ...]
    log10_mags: tuple[float, ...]
    phases: tuple[float, ...]

    @classmethod
    def from_magnitudes(cls, p: int, degrees, mags, phases=None) -> FamilySpec:
        return cls.from_log_mags(p, degrees, [math.log(m) for m in mags], phases)

    @classmethod
    def from_log_mags(cls, p: int, degrees, log_mags, phases=None) -> FamilySpec:
        """Natural-log magnitudes, which may lie far below the double range."""
        if phases is None:
            phases = [0.0] * len(log_mags)
        return cls(
            int(p),
            tuple(int(d) for d in degrees),
            tuple(float(lm) / LN10 for lm in log_mags),
            tuple(float(ph) % TWO_PI for ph in phases),
        )

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def D(self) -> tuple[int, ...]:
        return tuple(a + b for a, b in zip(self.degrees, self.degrees[1:]))

    @property
    def leading_exponent(self) -> int:
        return parity_sign(self.n - self.p) * self.degrees[0]

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(parity_sign(self.n - i - self.p) for i in range(1, self.n))

    @property
    def xi(self) -> Fraction:
        return sum((Fraction(1, d) for d in self.degrees), Fraction(0))

    @property
    def K(self) -> int:
        return max(self.degrees)

    @property
    def degree(self) -> int:
        return sum(self.degrees)

    @property
    def log_mags(self) -> tuple[float, ...]:
        return tuple(m * LN10 for m in self.log10_mags)

    def param(self, i: int) -> XComplex:
        """a_i, 1-based."""
        return XComplex.from_log_polar(self.log_mags[i - 1], self.phases[i - 1])

    def with_param(self, i: int, mag: float, phase: float | None = None) -> FamilySpec:
        log10_mags = list(self.log10_mags)
        phases = list(self.phases)
        log10_mags[i - 1] = math.log10(mag)
        if phase is not None:
            phases[i - 1] = phase % TWO_PI
        return replace(self, log10_mags=tuple(log10_mags), phases=tuple(phases))

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "degrees": list(self.degrees),
            "params": [
                {"log10_mag": m, "phase_rad": ph}
                for m, ph in zip(self.log10_mags, self.phases)
            ],
        }

    @classmethod
    def from_json(cls, obj) -> FamilySpec:
        data = _validated(FAMILY_SCHEMA, obj, "family")
        return cls(
            data["p"],
            tuple(data["degrees"]),
            tuple(param["log10_mag"] for param in data["params"]),
            tuple(param["phase_rad"] for param in data["params"]),
        )


@dataclass(frozen=True)
class McMullenSpec:
    k: int
    l: int  # noqa: E741
    eta: complex

    def to_json(self) -> dict:
        return {
            "kind": MapKind.MCMULLEN.value,
            "k": self.k,
            "l": self.l,
            "eta": complex_to_dict(self.eta),
        }

    @classmethod
    def from_json(cls, obj) -> McMullenSpec:
        data = _validated(MCMULLEN_SCHEMA, obj, "McMullen")
        eta = dict_to_complex(data["eta"])
        if eta == 0:
            raise SpecError("eta must be nonzero", field="/eta")
        return cls(data["k"], data["l"], eta)


def violations(spec: FamilySpec) -> list[tuple[str, str]]:
    """(JSON pointer, message) per violated invariant."""
    found = []
    if spec.p not in (0, 1):
        found.append(("/p", f"p must be 0 or 1, got {spec.p}"))
    if spec.n < 2:
        found.append(("/degrees", f"n = {spec.n} not >= 2"))
    small = [d for d in spec.degrees if d < 2]
    if small:
        found.append(("/degrees", f"degrees must be >= 2, got {small}"))
    if len(spec.log10_mags) != spec.n - 1 or len(spec.phases) != spec.n - 1:
        found.append(
            ("/params", f"expected {spec.n - 1} parameters, got {len(spec.log10_mags)}")
        )
        return found
    if spec.degrees and min(spec.degrees) > 0 and spec.xi >= 1:
        found.append(("/degrees", f"Σ1/dᵢ = {spec.xi} not < 1"))
    for i, m in enumerate(spec.log10_mags, start=1):
        pointer = json_pointer(["params", i - 1, "log10_mag"])
        if math.isnan(m):
            found.append((pointer, f"|a{i}| is not a number"))
        elif m == -math.inf:
            found.append((pointer, f"|a{i}| = 0 not > 0"))
        elif m >= 0.0:
            found.append((pointer, f"|a{i}| = 10^{m} not < 1"))
    for i, (m0, m1) in enumerate(zip(spec.log10_mags, spec.log10_mags[1:]), start=1):
        if not m0 < m1:
            found.append(
                (
                    json_pointer(["params", i, "log10_mag"]),
                    f"strict magnitude ordering violated: "
                    f"|a{i}| = 10^{m0} not < |a{i + 1}| = 10^{m1}",
                )
            )
    for i, ph in enumerate(spec.phases, start=1):
        if not 0.0 <= ph < TWO_PI:
            found.append(
                (
                    json_pointer(["params", i - 1, "phase_rad"]),
                    f"phase of a{i} = {ph} not in [0, 2π)",
                )
            )
    return found


def validate(spec: FamilySpec) -> list[str]:
    return [message for _, message in violations(spec)]


def singular_circles(spec: FamilySpec) -> list[dict]:
    """Circles carrying the zeros and poles of f, innermost first."""
    circles = [
        {
            "label": "z=0",
            "radius": 0.0,
            "kind": "zero" if spec.leading_exponent > 0 else "pole",
        }
    ]
    for i, (lm, sigma) in enumerate(zip(spec.log_mags, spec.exponents), start=1):
        circles.append(
            {
                "label": f"ring {i}",
                "radius": math.exp(lm),
                "kind": "zero" if sigma > 0 else "pole",
            }
        )
    return circles


def evaluate(spec: FamilySpec, z: complex) -> XComplex:
    """f(z) evaluated factor by factor in extended-exponent arithmetic."""
    z = complex(z)
    e0 = spec.leading_exponent
    if z == 0:
        if e0 < 0:
            raise PoleError("f has a pole at z=0", pole="z=0")
        return XComplex()
    xz = XComplex.from_complex(z)
    result = xz.int_pow(e0)
    for i, (D, sigma) in enumerate(zip(spec.D, spec.exponents), start=1):
        z_pow = xz.int_pow(D)
        a_pow = spec.param(i).int_pow(D)
        factor = z_pow.sub(a_pow)
        if factor.is_zero:
            if sigma < 0:
                raise PoleError(f"f has a pole at {z} on ring {i}", pole=f"ring {i}")
            return XComplex()
        scale = max(z_pow.log_abs(), a_pow.log_abs())
        if factor.log_abs() - scale < math.log(POLE_PROXIMITY):
            _LOGGER.debug("Low-confidence evaluation near ring %s at z=%s", i, z)
        result = result.mul(factor) if sigma > 0 else result.div(factor)
    return result


def _ring_terms(spec: FamilySpec, z: complex):
    """(D_i, 1/(1 - t_i), t_i/(1 - t_i)^2) with t_i = (a_i/z)^D_i or its inverse."""
    if z == 0:
        raise PoleError("Logarithmic derivative undefined at z=0", pole="z=0")
    xz = XComplex.from_complex(z)
    for i, D in enumerate(spec.D, start=1):
        ratio = spec.param(i).div(xz)
        if ratio.log_abs() <= 0.0:
            t = ratio.int_pow(D).to_complex()
            if t == 1:
                raise PoleError(f"z={z} lies on ring {i}", pole=f"ring {i}")
            yield D, 1.0 / (1.0 - t), t / (1.0 - t) ** 2
        else:
            w = ratio.int_pow(-D).to_complex()
            if w == 1:
                raise PoleError(f"z={z} lies on ring {i}", pole=f"ring {i}")
            yield D, -w / (1.0 - w), w / (1.0 - w) ** 2


def eval_log_deriv(spec: FamilySpec, z: complex) -> complex:
    """(-1)^p z f'(z) / f(z)."""
    value = parity_sign(spec.n) * spec.degrees[0]
    for i, (D, inv, _) in enumerate(_ring_terms(spec, complex(z)), start=1):
        value += parity_sign(spec.n - i) * D * inv
    return complex(value)


def log_deriv_with_slope(spec: FamilySpec, z: complex) -> tuple[complex, complex]:
    """g = (-1)^p z f'/f together with z g'(z), for Newton steps."""
    value = complex(parity_sign(spec.n) * spec.degrees[0])
    slope = 0j
    for i, (D, inv, curvature) in enumerate(_ring_terms(spec, complex(z)), start=1):
        sign = parity_sign(spec.n - i)
        value += sign * D * inv
        slope -= sign * D * D * curvature
    return value, slope


def log_eval(spec: FamilySpec, z: np.ndarray) -> np.ndarray:
    """Vectorized complex log of f; real part log|f| never under- or overflows."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(z)
    result = scale_log(lz, spec.leading_exponent)
    for la, phase, D, sigma in zip(spec.log_mags, spec.phases, spec.D, spec.exponents):
        log_a = complex(la, phase)
        outside = lz.real >= la
        term = np.empty(z.shape, dtype=complex)
        lo = lz[outside]
        term[outside] = scale_log(lo, D) + log1m(np.exp(scale_log(log_a - lo, D)))
        li = lz[~outside]
        term[~outside] = (
            D * log_a + 1j * math.pi + log1m(np.exp(scale_log(li - log_a, D)))
        )
        with np.errstate(invalid="ignore"):
            result = result + term if sigma > 0 else result - term
    return result


def mcmullen_eval(spec: McMullenSpec, z: complex) -> complex:
    z = complex(z)
    if z == 0:
        raise PoleError("McMullen map has a pole at z=0", pole="z=0")
    return z**spec.k + spec.eta / z**spec.l


def mcmullen_to_family(spec: McMullenSpec) -> FamilySpec:
    """z^k + eta/z^l as f_{1,l,k} with a1^(k+l) = -eta."""
    D = spec.k + spec.l
    log_mag = math.log(abs(spec.eta)) / D
    phase = math.atan2(-spec.eta.imag, -spec.eta.real) / D
    return FamilySpec.from_log_mags(1, (spec.l, spec.k), [log_mag], [phase])


def basin_combinatorics(p: int, n: int) -> tuple[Basin, Basin]:
    """Images of the inner and the outer trap."""
    match (p, n % 2):
        case (1, 1):
            return Basin.BASIN_0, Basin.BASIN_INFINITY
        case (1, 0):
            return Basin.BASIN_INFINITY, Basin.BASIN_INFINITY
        case (0, 1):
            return Basin.BASIN_INFINITY, Basin.BASIN_0
        case (0, 0):
            return Basin.BASIN_0, Basin.BASIN_0
    raise SpecError(f"p must be 0 or 1, got {p}", field="/p")


class FamilyMap(AbstractMap):
    """Adapter for f_{p,d1..dn}, optionally remembering a budget or a McMullen origin."""

    kind = MapKind.FAMILY

    def __init__(self, spec: FamilySpec, budget=None, origin: McMullenSpec = None):
        found = violations(spec)
        if found:
            pointer, message = found[0]
            _LOGGER.error("Invalid family spec at %s: %s", pointer, message)
            raise SpecError(message, field=pointer)
        self.spec = spec
        self.budget = budget
        self.origin = origin
        if origin is not None:
            self.kind = MapKind.MCMULLEN

    @classmethod
    def from_mcmullen(cls, spec: McMullenSpec) -> FamilyMap:
        return cls(mcmullen_to_family(spec), origin=spec)

    def log_eval(self, z):
        return log_eval(self.spec, z)

    def signature(self) -> Signature:
        return Signature(self.spec.p, self.spec.n, tuple(self.spec.degrees))

    def basin_images(self):
        return basin_combinatorics(self.spec.p, self.spec.n)

    def fitted_budget(self):
        from .params import fit_budget

        if self.budget is None:
            self.budget = fit_budget(self.spec)
        return self.budget

    def default_layout(self) -> TrapLayout:
        from .params import budget_layout

        return budget_layout(self.spec, self.fitted_budget())

    def trap_checks(self, layout: TrapLayout, samples: int) -> list[Check]:
        inner_image, outer_image = self.basin_images()
        s = layout.inner.radius
        R = layout.outer_radius
        return [
            self.image_check(
                "inner_trap",
                [s, s / 2, s / 4],
                Target.SMALL if inner_image == Basin.BASIN_0 else Target.LARGE,
                layout,
                samples,
            ),
            self.image_check(
                "outer_trap",
                [R, 2 * R, 4 * R],
                Target.SMALL if outer_image == Basin.BASIN_0 else Target.LARGE,
                layout,
                samples,
            ),
        ]

    def critical_clusters(self, threads: int | None = None) -> list:
        from .critical import predicted, refine

        return refine(self.spec, predicted(self.spec, self.fitted_budget()), threads)

    def to_json(self) -> dict:
        if self.origin is not None:
            return self.origin.to_json()
        return self.spec.to_json()

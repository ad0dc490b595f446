"""The parabolic families P_lambda and P_n.

Evaluation, fixed points, traps and critical points.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
import logging
import math

import numpy as np
from numpy.polynomial import polynomial as P
import voluptuous as vol

from .abstract_map import (
    AbstractMap,
    Check,
    Disk,
    RingAnnulus,
    Signature,
    TrapLayout,
    unresolved,
)
from .cantor_exception import (
    ConvergenceError,
    DomainError,
    PoleError,
    ResolutionError,
    SpecError,
)
from .const import (
    DEFAULT_SAMPLES,
    EXCLUSION_ANGLE,
    NEWTON_MAX_STEPS,
    NEWTON_TOL,
    NON_STRICT_SLACK,
    Basin,
    MapKind,
    Target,
    TrapMode,
)
from .critical import STEP_TOL, CriticalCluster
from .helper import (
    complex_to_dict,
    dict_to_complex,
    json_float,
    json_pointer,
    parity_sign,
)
from .numerics import (
    ONE,
    XComplex,
    circle_points,
    log1m,
    log_add,
    scale_log,
    wind_around,
)

_LOGGER: logging.Logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
TWO_PI = 2.0 * math.pi
# Richardson step for multiplier estimates
DERIVATIVE_STEP = 1e-4

PLAMBDA_SCHEMA = vol.Schema(
    {
        vol.Required("kind"): MapKind.PLAMBDA.value,
        vol.Required("m"): vol.All(int, vol.Range(min=2)),
        vol.Required("n"): vol.All(int, vol.Range(min=2)),
        vol.Required("lambda"): vol.Any(
            {vol.Required("re"): vol.Coerce(float), vol.Required("im"): vol.Coerce(float)},
            vol.Coerce(float),
        ),
    }
)

PN_SCHEMA = vol.Schema(
    vol.All(
        {
            vol.Required("kind"): MapKind.PN.value,
            vol.Required("n"): vol.All(int, vol.Range(min=2)),
            vol.Optional("s"): vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False)),
            vol.Optional("b"): [
                {
                    vol.Required("log10_mag"): vol.Coerce(float),
                    vol.Required("phase_rad"): vol.Coerce(float),
                }
            ],
        },
        vol.Any(vol.Schema({vol.Required("s"): object}, extra=vol.ALLOW_EXTRA),
                vol.Schema({vol.Required("b"): object}, extra=vol.ALLOW_EXTRA)),
    )
)


def _validated(schema: vol.Schema, obj, what: str) -> dict:
    try:
        return schema(obj)
    except vol.Invalid as ex:
        _LOGGER.error("Invalid %s spec: %s", what, ex)
        raise SpecError(f"Invalid {what} spec: {ex.msg}", field=json_pointer(ex.path)) from ex


@dataclass(frozen=True)
class PLambdaSpec:
    m: int
    n: int
    lam: complex

    def __post_init__(self):
        if self.m < 2 or self.n < 2 or 1 / self.m + 1 / self.n >= 1:
            raise DomainError(f"Need m, n >= 2 with 1/m + 1/n < 1, got ({self.m}, {self.n})")
        if self.lam == 0:
            raise DomainError("lambda must be nonzero")

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def r0(self) -> float:
        return (self.n / self.m) ** (1 / self.N)

    @property
    def hypothesis_bound(self) -> float:
        return 1.0 / (2.0 ** (10 * self.m) * self.n**3)

    @property
    def satisfies_hypothesis(self) -> bool:
        return abs(self.lam) <= self.hypothesis_bound

    def to_json(self) -> dict:
        return {
            "kind": MapKind.PLAMBDA.value,
            "m": self.m,
            "n": self.n,
            "lambda": complex_to_dict(self.lam),
        }

    @classmethod
    def from_json(cls, obj) -> PLambdaSpec:
        data = _validated(PLAMBDA_SCHEMA, obj, "P_lambda")
        try:
            return cls(data["m"], data["n"], dict_to_complex(data["lambda"]))
        except DomainError as ex:
            raise SpecError(ex.message, field="/lambda") from ex


@dataclass(frozen=True)
class PnSpec:
    """P_n with b_i stored as (log10 |b_i|, phase)."""

    n: int
    log10_mags: tuple[float, ...]
    phases: tuple[float, ...]

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"Need n >= 2, got {self.n}")
        if len(self.log10_mags) != self.n - 1 or len(self.phases) != self.n - 1:
            raise DomainError(f"P_{self.n} needs {self.n - 1} parameters b_i")
        mags = (0.0,) + tuple(self.log10_mags)
        if any(not hi > lo for hi, lo in zip(mags, mags[1:])):
            raise DomainError(f"Need 1 > |b_1| > ... > |b_(n-1)| > 0, got 10^{self.log10_mags}")

    @classmethod
    def from_scale(cls, n: int, s: float, phases=None) -> PnSpec:
        """|b_i| = s^i."""
        if not 0.0 < s < 1.0:
            raise DomainError(f"s must lie in (0, 1), got {s}")
        if phases is None:
            phases = [0.0] * (n - 1)
        return cls(
            n,
            tuple(i * math.log10(s) for i in range(1, n)),
            tuple(float(ph) % TWO_PI for ph in phases),
        )

    @property
    def D(self) -> int:
        return 2 * self.n + 2

    @property
    def s(self) -> float:
        return 10.0 ** self.log10_mags[0]

    @property
    def log_mags(self) -> tuple[float, ...]:
        return tuple(m * math.log(10.0) for m in self.log10_mags)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(parity_sign(i - 1) for i in range(1, self.n))

    @property
    def leading_exponent(self) -> int:
        return parity_sign(self.n + 1) * (self.n + 1)

    def b(self, i: int) -> XComplex:
        return XComplex.from_log_polar(self.log_mags[i - 1], self.phases[i - 1])

    def beta(self, i: int) -> XComplex:
        """b_i^(2n+2)."""
        return XComplex.from_log_polar(
            self.D * self.log_mags[i - 1], self.D * self.phases[i - 1]
        )

    @cached_property
    def ABC(self) -> tuple[complex, complex, complex]:
        return compute_ABC(self.n, [self.b(i) for i in range(1, self.n)])

    @property
    def is_geometric(self) -> bool:
        s = self.log10_mags[0]
        return all(
            math.isclose(m, i * s, rel_tol=1e-12)
            for i, m in enumerate(self.log10_mags, start=1)
        )

    @property
    def hypothesis_bound(self) -> float:
        return 1.0 / (25 * self.n**2)

    @property
    def satisfies_hypothesis(self) -> bool:
        return self.is_geometric and self.s <= self.hypothesis_bound

    def to_json(self) -> dict:
        return {
            "kind": MapKind.PN.value,
            "n": self.n,
            "b": [
                {"log10_mag": m, "phase_rad": ph}
                for m, ph in zip(self.log10_mags, self.phases)
            ],
        }

    @classmethod
    def from_json(cls, obj) -> PnSpec:
        data = _validated(PN_SCHEMA, obj, "P_n")
        try:
            if "b" in data:
                return cls(
                    data["n"],
                    tuple(b["log10_mag"] for b in data["b"]),
                    tuple(b["phase_rad"] % TWO_PI for b in data["b"]),
                )
            return cls.from_scale(data["n"], data["s"])
        except DomainError as ex:
            raise SpecError(ex.message, field="/b" if "b" in data else "/s") from ex


def _binomial_tail(n: int) -> np.ndarray:
    """Ascending coefficients of ((1+z)^n - 1)/z."""
    return np.array([math.comb(n, k) for k in range(1, n + 1)], dtype=float)


def ptilde_eval(n: int, z: complex) -> complex:
    """The parabolic polynomial ((1+z)^n - 1)/n."""
    z = complex(z)
    return z * complex(P.polyval(z, _binomial_tail(n))) / n


def base_map_eval(n: int, z: complex) -> complex:
    """Q(z) = (n+1) z^(n+1) / (n z^(n+1) + 1)."""
    q = n * complex(z) ** (n + 1)
    if q == -1:
        raise PoleError(f"Q has a pole at {z}", pole=f"z={z}")
    return (n + 1) * complex(z) ** (n + 1) / (q + 1)


def plambda_eval(spec: PLambdaSpec, z: complex) -> complex:
    """P_lambda(z) with (lambda z)^(m+n) taken in extended-exponent arithmetic."""
    xz = XComplex.from_complex(z)
    t = XComplex.from_complex(spec.lam).mul(xz).int_pow(spec.N)
    den = ONE.sub(t)
    if den.is_zero:
        raise PoleError(f"P_lambda has a pole at {z}", pole=f"z={z}")
    ptilde = XComplex()
    for k in range(1, spec.n + 1):
        ptilde = ptilde.add(xz.int_pow(k).mul(XComplex.from_complex(math.comb(spec.n, k))))
    num = ptilde.div(XComplex.from_complex(spec.n)).add(t)
    return num.div(den).to_complex()


def _log_ptilde(n: int, z: np.ndarray) -> np.ndarray:
    """Complex log of (1+z)^n - 1."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    big = np.abs(1.0 + z) > 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        l1z = n * np.log(1.0 + z[big])
        out[big] = l1z + log1m(np.exp(-l1z))
        small = z[~big]
        out[~big] = np.log(small * P.polyval(small, _binomial_tail(n)))
    return out


def _log_one_minus(log_t: np.ndarray) -> np.ndarray:
    """Complex log of 1 - t given log t."""
    out = np.empty(log_t.shape, dtype=complex)
    inside = log_t.real <= 0.0
    out[inside] = log1m(np.exp(log_t[inside]))
    lt = log_t[~inside]
    out[~inside] = lt + 1j * math.pi + log1m(np.exp(-lt))
    return out


def _plambda_parts(spec: PLambdaSpec, z: np.ndarray):
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(z)
    log_lam = complex(math.log(abs(spec.lam)), math.atan2(spec.lam.imag, spec.lam.real))
    log_t = scale_log(lz, spec.N) + spec.N * log_lam
    log_pt = _log_ptilde(spec.n, z) - math.log(spec.n)
    return log_pt, log_t, _log_one_minus(log_t)


def plambda_log_eval(spec: PLambdaSpec, z: np.ndarray) -> np.ndarray:
    log_pt, log_t, log_den = _plambda_parts(spec, z)
    return log_add(log_pt, log_t) - log_den


def plambda_log_plus_one(spec: PLambdaSpec, z: np.ndarray) -> np.ndarray:
    """log(P_lambda + 1) = log(((1+z)^n - 1)/n + 1) - log(1 - (lambda z)^N)."""
    log_pt, _, log_den = _plambda_parts(spec, z)
    return log_add(log_pt, 0j) - log_den


def compute_ABC(n: int, b) -> tuple[complex, complex, complex]:
    """A_n, B_n, C_n making 1 a fixed point of multiplier one."""
    D = 2 * n + 2
    C = 0j
    correction = 1.0 + 0j
    for i, bi in enumerate(b, start=1):
        beta = (bi if isinstance(bi, XComplex) else XComplex.from_complex(bi)).int_pow(D)
        if ONE.sub(beta).is_zero:
            raise DomainError(f"b{i}^{D} = 1")
        beta = beta.to_complex()
        C += parity_sign(i - 1) * beta / (1.0 - beta)
        correction *= (1.0 - beta) ** parity_sign(i)
    denominator = 1.0 + D * C
    if denominator == 0:
        raise DomainError(f"1 + {D} C_{n} = 0")
    return correction / denominator, D * C / denominator, C


def pn_eval(spec: PnSpec, z: complex) -> complex:
    A, B, _ = spec.ABC
    e0 = spec.leading_exponent
    if z == 0:
        if e0 < 0:
            raise PoleError(f"P_{spec.n} has a pole at z=0", pole="z=0")
        return B
    xz = XComplex.from_complex(z)
    q = xz.int_pow(spec.n + 1).mul(XComplex.from_complex(spec.n)).add(ONE)
    if q.is_zero:
        raise PoleError(f"P_{spec.n} has a pole at {z}", pole=f"n z^{spec.n + 1} = -1")
    value = xz.int_pow(e0).mul(XComplex.from_complex(spec.n + 1)).div(q)
    for i, sigma in enumerate(spec.exponents, start=1):
        factor = xz.int_pow(spec.D).sub(spec.beta(i))
        if factor.is_zero:
            if sigma < 0:
                raise PoleError(f"P_{spec.n} has a pole at {z}", pole=f"ring {i}")
            return B
        value = value.mul(factor) if sigma > 0 else value.div(factor)
    return (value.mul(XComplex.from_complex(A)).to_complex()) + B


def pn_log_rational(spec: PnSpec, z: np.ndarray) -> np.ndarray:
    """Complex log of P_n - B_n = A_n R_n."""
    A, _, _ = spec.ABC
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(z)
    result = scale_log(lz, spec.leading_exponent) + math.log(spec.n + 1)
    result -= log_add(scale_log(lz, spec.n + 1) + math.log(spec.n), 0j)
    D = spec.D
    lzD = scale_log(lz, D)
    for lb, phase, sigma in zip(spec.log_mags, spec.phases, spec.exponents):
        log_beta = D * complex(lb, phase)
        outside = lzD.real >= log_beta.real
        term = np.empty(z.shape, dtype=complex)
        lo = lzD[outside]
        term[outside] = lo + log1m(np.exp(log_beta - lo))
        term[~outside] = log_beta + 1j * math.pi + log1m(np.exp(lzD[~outside] - log_beta))
        with np.errstate(invalid="ignore"):
            result = result + term if sigma > 0 else result - term
    return result + np.log(complex(A))


def pn_log_eval(spec: PnSpec, z: np.ndarray) -> np.ndarray:
    B = spec.ABC[1]
    log_b = np.log(complex(B)) if B != 0 else complex(-np.inf, 0.0)
    return log_add(pn_log_rational(spec, z), log_b)


def sum_of_check(n: int, i: int) -> int:
    """Alternating-sign identity behind the P_n critical clusters; always 0."""
    if not 1 <= i <= n - 1:
        raise DomainError(f"i = {i} outside [1, {n - 1}]")
    return (
        sum(parity_sign(j) for j in range(1, i))
        + sum(parity_sign(j - 1) for j in range(i + 1, n))
        + (1 + parity_sign(n + 1)) // 2
    )


def r0_bounds(m: int, n: int) -> tuple[float, float, float]:
    """(m^(-1/m), r0, n^(1/n)), which sit inside (2/3, 3/2) in this order."""
    return m ** (-1 / m), (n / m) ** (1 / (m + n)), n ** (1 / n)


@dataclass(frozen=True)
class FixedPointResiduals:
    fixed_point: complex
    value: complex
    multiplier: complex
    expected_multiplier: complex = 1.0

    @property
    def fixed_residual(self) -> float:
        return abs(self.value - self.fixed_point)

    @property
    def multiplier_residual(self) -> float:
        return abs(self.multiplier - self.expected_multiplier)

    def check(self, tol: float = 1e-8) -> Check:
        worst = max(self.fixed_residual, self.multiplier_residual)
        margin = math.inf if worst == 0 else math.log(tol) - math.log(worst)
        return Check("parabolic_fixed", margin, margin > 0, detail=self.as_dict())

    def as_dict(self):
        return {
            "fixed_point": complex_to_dict(self.fixed_point),
            "fixed_residual": json_float(self.fixed_residual),
            "multiplier": complex_to_dict(self.multiplier),
            "multiplier_residual": json_float(self.multiplier_residual),
        }


def parabolic_fixed_check(
    amap: AbstractMap,
    fixed_point: complex,
    expected_multiplier: complex = 1.0,
    h: float = DERIVATIVE_STEP,
) -> FixedPointResiduals:
    """f(z*) and a Richardson-extrapolated central-difference f'(z*)."""

    def central(step):
        return (amap.evaluate(fixed_point + step) - amap.evaluate(fixed_point - step)) / (
            2 * step
        )

    multiplier = (4 * central(h / 2) - central(h)) / 3
    return FixedPointResiduals(
        complex(fixed_point), amap.evaluate(fixed_point), multiplier, expected_multiplier
    )


def _boundary_check(
    name: str,
    margins_of,
    center: complex,
    radius: float,
    contacts,
    exclusion: float,
    samples: int,
) -> Check:
    """Strict margin away from the contact angles, non-strict within `exclusion` of them."""
    theta = TWO_PI * np.arange(samples) / samples
    margins = margins_of(circle_points(center, radius, samples))
    if np.any(np.isnan(margins)):
        return unresolved(name, ResolutionError(f"Undefined samples on {name}"))
    gap = np.full(samples, np.inf)
    for angle in contacts:
        offset = np.abs((theta - angle + math.pi) % TWO_PI - math.pi)
        gap = np.minimum(gap, offset)
    near = gap < exclusion
    strict = float(np.min(margins[~near]))
    contact = float(np.min(margins[near])) if near.any() else None
    contact_ok = contact is None or contact >= -NON_STRICT_SLACK
    _LOGGER.debug("%s margin %s, contact margin %s", name, strict, contact)
    return Check(
        name,
        strict,
        strict > 0 and contact_ok,
        detail={
            "excluded": int(near.sum()),
            "contact_margin": None if contact is None else json_float(contact),
        },
    )


@dataclass
class ParabolicCritical:
    clusters: list[CriticalCluster]
    expected_total: int
    accounted: int
    near_count: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def count_identity(self) -> bool:
        return self.accounted == self.expected_total

    def as_dict(self):
        return {
            "clusters": [cluster.as_dict() for cluster in self.clusters],
            "expected_total": self.expected_total,
            "accounted": self.accounted,
            "count_identity": self.count_identity,
            "near_count": self.near_count,
        }


def _polish(step, seed: complex, inside, tol: float, scale=abs):
    """Newton from seed with step(z) -> (value, derivative); inside(z) guards the region."""
    z = seed
    for count in range(NEWTON_MAX_STEPS):
        value, slope = step(z)
        if value == 0:
            break
        if slope == 0:
            raise ConvergenceError(f"Flat Newton step from {seed}", seed)
        delta = value / slope
        z = z - delta
        if not inside(z):
            raise ConvergenceError(f"Newton iterate {z} left its region", seed)
        if abs(delta) <= STEP_TOL * scale(z):
            _LOGGER.debug("Seed %s converged in %s steps", seed, count + 1)
            break
    residual = abs(step(z)[0])
    if not residual < tol:
        raise ConvergenceError(f"No convergence from {seed} (residual {residual})", seed)
    return z, residual


def _plambda_free_step(spec: PLambdaSpec, z: complex):
    """1 + lambda^N z^(N-1) (m/n z + (m+n)/n (1 + (n-1)/(1+z)^(n-1))) and its derivative."""
    m, n, N = spec.m, spec.n, spec.N
    T = (spec.lam * z) ** N
    tail = 1 + (n - 1) * (1 + z) ** (1 - n)
    value = 1 + (m / n) * T + ((m + n) / n) * (T / z) * tail
    slope = (m / n) * N * T / z + ((m + n) / n) * (
        (N - 1) * T / z**2 * tail + (T / z) * (n - 1) * (1 - n) * (1 + z) ** (-n)
    )
    return value, slope


def _plambda_near_step(spec: PLambdaSpec, w: complex):
    """Critical equation in w = z + 1, multiplied through by (1+z)^(n-1)."""
    m, n, N = spec.m, spec.n, spec.N
    lamN = spec.lam**N
    H = (1 + m / n) * (w**n + n - 1) - (w - 1) * w ** (n - 1)
    dH = ((1 + m / n) * n - 1) * w ** (n - 1) - (n - 1) * (w - 1) * w ** (n - 2)
    value = w ** (n - 1) + lamN * (w - 1) ** (N - 1) * H
    slope = (n - 1) * w ** (n - 2) + lamN * (
        (N - 1) * (w - 1) ** (N - 2) * H + (w - 1) ** (N - 1) * dH
    )
    return value, slope


def _run_seeds(polish_one, seeds, threads):
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(polish_one, seeds))


def _separated(points, bound: float) -> bool:
    return all(
        abs(w - other) > bound for k, w in enumerate(points) for other in points[k + 1 :]
    )


def plambda_critical(
    spec: PLambdaSpec, threads: int | None = None, tol: float = NEWTON_TOL
) -> ParabolicCritical:
    lam_abs = abs(spec.lam)
    m, n, N = spec.m, spec.n, spec.N

    kappa = -(spec.lam**N) * (-1) ** (N - 1) * (m + n) * (n - 1) / n
    near_seeds = [
        abs(kappa) ** (1 / (n - 1))
        * np.exp(1j * (np.angle(kappa) + TWO_PI * k) / (n - 1))
        for k in range(n - 1)
    ]
    near = _run_seeds(
        lambda w0: _polish(
            lambda w: _plambda_near_step(spec, w),
            complex(w0),
            lambda w: abs(w) < lam_abs,
            tol,
        ),
        near_seeds,
        threads,
    )
    near_w = [w for w, _ in near]
    near_cluster = CriticalCluster(
        0,
        abs(kappa) ** (1 / (n - 1)),
        [complex(w0) for w0 in near_seeds],
        lam_abs,
        (0.0, lam_abs),
        refined=near_w,
        residuals=[res for _, res in near],
        within_bound=all(abs(w) < lam_abs for w in near_w),
        distinct=_separated(near_w, 0.0),
        in_annulus=all(abs(w) < lam_abs for w in near_w),
        origin=-1 + 0j,
    )
    near_count = wind_around(
        lambda w: np.array([_plambda_near_step(spec, x)[0] for x in w]), 0j, lam_abs, 256
    )

    inner, outer = 1 / (2 * lam_abs), 2 / lam_abs
    free_seeds = [
        spec.r0 / spec.lam * np.exp(1j * math.pi * (2 * j - 1) / N) for j in range(1, N + 1)
    ]
    bound = 2 * N / m
    free = _run_seeds(
        lambda z0: _polish(
            lambda z: _plambda_free_step(spec, z),
            complex(z0),
            lambda z: inner < abs(z) < outer,
            tol,
        ),
        free_seeds,
        threads,
    )
    free_points = [z for z, _ in free]
    free_cluster = CriticalCluster(
        1,
        spec.r0,
        [complex(z) for z in free_seeds],
        bound,
        (inner, outer),
        refined=free_points,
        residuals=[res for _, res in free],
        within_bound=all(abs(z - z0) < bound for z, z0 in zip(free_points, free_seeds)),
        distinct=_separated(free_points, bound),
        in_annulus=all(inner < abs(z) < outer for z in free_points),
    )
    return ParabolicCritical(
        [near_cluster, free_cluster],
        2 * N - 2,
        (m - 1) + len(near_w) + len(free_points),
        near_count,
    )


def _pn_ring_terms(spec: PnSpec, z: complex):
    xz = XComplex.from_complex(z)
    for i in range(1, spec.n):
        ratio = spec.b(i).div(xz)
        if ratio.log_abs() <= 0.0:
            t = ratio.int_pow(spec.D).to_complex()
            if t == 1:
                raise PoleError(f"z={z} lies on ring {i}", pole=f"ring {i}")
            yield 1.0 / (1.0 - t), t / (1.0 - t) ** 2
        else:
            w = ratio.int_pow(-spec.D).to_complex()
            if w == 1:
                raise PoleError(f"z={z} lies on ring {i}", pole=f"ring {i}")
            yield -w / (1.0 - w), w / (1.0 - w) ** 2


def pn_log_deriv(spec: PnSpec, z: complex) -> tuple[complex, complex]:
    """F_n = z P_n'/(P_n - B_n) and z F_n'."""
    n, D = spec.n, spec.D
    q = n * complex(z) ** (n + 1)
    value = complex(parity_sign(n + 1) * (n + 1)) - (n + 1) * q / (q + 1)
    slope = -((n + 1) ** 2) * q / (q + 1) ** 2
    for i, (inv, curvature) in enumerate(_pn_ring_terms(spec, z), start=1):
        sign = parity_sign(i - 1)
        value += sign * D * inv
        slope -= sign * D * D * curvature
    return value, slope


def pn_critical(
    spec: PnSpec, threads: int | None = None, tol: float = NEWTON_TOL
) -> ParabolicCritical:
    n, D = spec.n, spec.D
    r = spec.s ** (n + 0.5)
    clusters = []
    for i in range(1, n):
        b = spec.b(i).to_complex()
        seeds = [b * np.exp(1j * math.pi * (2 * j - 1) / D) for j in range(1, D + 1)]
        inner, outer = abs(b) * (1 - 2 * r), abs(b) * (1 + 2 * r)

        def log_step(z):
            value, slope = pn_log_deriv(spec, z)
            return value, slope / z

        polished = _run_seeds(
            lambda z0: _polish(
                log_step, complex(z0), lambda z: inner < abs(z) < outer, tol
            ),
            seeds,
            threads,
        )
        points = [z for z, _ in polished]
        bound = r * abs(b)
        clusters.append(
            CriticalCluster(
                i,
                1.0,
                [complex(w) for w in seeds],
                bound,
                (inner, outer),
                refined=points,
                residuals=[res for _, res in polished],
                within_bound=all(abs(w - w0) < bound for w, w0 in zip(points, seeds)),
                distinct=_separated(points, bound),
                in_annulus=all(inner < abs(w) < outer for w in points),
            )
        )
    accounted = 2 * n + sum(len(cluster.refined) for cluster in clusters)
    return ParabolicCritical(clusters, 2 * (n * n + n) - 2, accounted)


class ParabolicMap(AbstractMap):
    fixed_point: complex = 0j

    def __init__(self, spec, exclusion: float = EXCLUSION_ANGLE):
        self.spec = spec
        self.exclusion = exclusion

    def to_json(self) -> dict:
        return self.spec.to_json()

    def critical_clusters(self, threads: int | None = None) -> list:
        return parabolic_critical(self, threads).clusters

    def fixed_check(self) -> FixedPointResiduals:
        return parabolic_fixed_check(self, self.fixed_point)


class PLambdaMap(ParabolicMap):
    kind = MapKind.PLAMBDA
    winding_target = -1 + 0j
    fixed_point = 0j

    def log_eval(self, z):
        return plambda_log_eval(self.spec, z)

    def log_shifted(self, z):
        return plambda_log_plus_one(self.spec, np.asarray(z, dtype=complex))

    def signature(self) -> Signature:
        return Signature(0, 2, (self.spec.n, self.spec.m))

    def basin_images(self):
        return Basin.BASIN_0, Basin.BASIN_0

    @property
    def outer_radius(self) -> float:
        """2/|lambda|^(1+n/m), where |P_lambda + 1| < 1/2 from outward."""
        spec = self.spec
        return 2.0 * abs(spec.lam) ** (-(1 + spec.n / spec.m))

    def default_layout(self) -> TrapLayout:
        lam_abs = abs(self.spec.lam)
        R = self.outer_radius
        ring = RingAnnulus(1, 1 / (2 * lam_abs), 2 / lam_abs, Target.LARGE, "A1")
        return TrapLayout(TrapMode.LEMMA, Disk(-0.75 + 0j, 0.75), R, 0.75, R, (ring,))

    def trap_checks(self, layout: TrapLayout, samples: int) -> list[Check]:
        def disk_margin(z):
            with np.errstate(divide="ignore", invalid="ignore"):
                return math.log(0.75) - np.log(np.abs(self.step(z) + 0.75))

        checks = [
            _boundary_check(
                "parabolic_disk",
                disk_margin,
                layout.inner.center,
                layout.inner.radius,
                [0.0],
                self.exclusion,
                samples,
            )
        ]
        try:
            logs = np.concatenate(
                [
                    self.log_shifted(circle_points(0j, r, samples)).real
                    for r in layout.outer_radius * np.array([1.0, 2.0, 4.0])
                ]
            )
            margin = -LN2 - float(np.max(logs))
            checks.append(Check("parabolic_outer", margin, margin > 0))
        except ResolutionError as ex:
            checks.append(unresolved("parabolic_outer", ex))
        return checks

    def notes(self) -> list[str]:
        if self.spec.satisfies_hypothesis:
            return []
        _LOGGER.warning(
            "|lambda| = %s exceeds %s", abs(self.spec.lam), self.spec.hypothesis_bound
        )
        return [f"|lambda| above the certified range {self.spec.hypothesis_bound}"]


class PnMap(ParabolicMap):
    kind = MapKind.PN
    fixed_point = 1 + 0j

    def log_eval(self, z):
        return pn_log_eval(self.spec, z)

    @property
    def winding_target(self) -> complex:
        return self.spec.ABC[1]

    def log_shifted(self, z):
        return pn_log_rational(self.spec, np.asarray(z, dtype=complex))

    def signature(self) -> Signature:
        n = self.spec.n
        return Signature(1, n, (n + 1,) * n)

    def basin_images(self):
        inner = Basin.BASIN_0 if self.spec.n % 2 else Basin.BASIN_INFINITY
        return inner, Basin.BASIN_INFINITY

    @property
    def trap_radius(self) -> float:
        return self.spec.s ** (self.spec.n + 0.5)

    def default_layout(self) -> TrapLayout:
        r = self.trap_radius
        rings = []
        for i in range(self.spec.n - 1, 0, -1):
            mag = math.exp(self.spec.log_mags[i - 1])
            rings.append(
                RingAnnulus(
                    i,
                    mag * (1 - 2 * r),
                    mag * (1 + 2 * r),
                    Target.SMALL if i % 2 else Target.LARGE,
                    f"A{i}",
                )
            )
        return TrapLayout(TrapMode.LEMMA, Disk(0j, r), 1.0, r, 1.0, tuple(rings))

    def trap_checks(self, layout: TrapLayout, samples: int) -> list[Check]:
        inner_image, _ = self.basin_images()
        r = layout.inner.radius
        n = self.spec.n

        def outside_margin(z):
            return self.log_eval(z).real

        return [
            self.image_check(
                "inner_trap",
                [r, r / 2, r / 4],
                Target.SMALL if inner_image == Basin.BASIN_0 else Target.LARGE,
                layout,
                samples,
            ),
            _boundary_check(
                "unit_circle",
                outside_margin,
                0j,
                1.0,
                [TWO_PI * k / (n + 1) for k in range(n + 1)],
                self.exclusion,
                samples,
            ),
            self.image_check("outer_trap", [2.0, 4.0, 16.0], Target.LARGE, layout, samples),
        ]

    def notes(self) -> list[str]:
        if self.spec.satisfies_hypothesis:
            return []
        _LOGGER.warning(
            "P_%s parameters outside |b_i| = s^i, s <= %s",
            self.spec.n,
            self.spec.hypothesis_bound,
        )
        return [f"parameters outside |b_i| = s^i with s <= {self.spec.hypothesis_bound}"]


def parabolic_critical(
    amap: ParabolicMap, threads: int | None = None, tol: float = NEWTON_TOL
) -> ParabolicCritical:
    if isinstance(amap, PLambdaMap):
        result = plambda_critical(amap.spec, threads, tol)
    else:
        result = pn_critical(amap.spec, threads, tol)
    if not result.count_identity:
        _LOGGER.warning(
            "Accounted for %s of %s critical points", result.accounted, result.expected_total
        )
    return result


def trap_checks_parabolic(amap: ParabolicMap, samples: int = DEFAULT_SAMPLES) -> list[Check]:
    return amap.trap_checks(amap.default_layout(), samples)


def certify_parabolic(
    amap: ParabolicMap, samples: int = DEFAULT_SAMPLES, threads: int | None = None
):
    from .certify import certify

    return certify(
        amap,
        mode=TrapMode.LEMMA,
        samples=samples,
        threads=threads,
        extra_checks=[amap.fixed_check().check()],
    )

"""Extended-exponent complex arithmetic, circle sampling and winding numbers."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
import logging
import math

import numpy as np

from .cantor_exception import DomainError, ResolutionError
from .const import DEFAULT_SAMPLES, MAX_INT_POWER, MAX_SAMPLES, MIN_SAMPLES, Operation
from .helper import is_power_of_two

_LOGGER: logging.Logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
TWO_PI = 2.0 * math.pi
# Largest phase step between consecutive samples that still fixes the branch
MAX_PHASE_STEP = math.pi / 2


@dataclass(frozen=True)
class XComplex:
    """(re_m + i im_m) * 2**e2 with max(|re_m|, |im_m|) in [1/2, 1), or exact zero."""

    re_m: float = 0.0
    im_m: float = 0.0
    e2: int = 0

    @classmethod
    def normalized(cls, re: float, im: float, e2: int = 0) -> XComplex:
        if not (math.isfinite(re) and math.isfinite(im)):
            raise DomainError(f"Non-finite mantissa ({re}, {im})")
        if re == 0.0 and im == 0.0:
            return ZERO
        _, shift = math.frexp(max(abs(re), abs(im)))
        return cls(math.ldexp(re, -shift), math.ldexp(im, -shift), e2 + shift)

    @classmethod
    def from_complex(cls, z: complex) -> XComplex:
        z = complex(z)
        return cls.normalized(z.real, z.imag, 0)

    @classmethod
    def from_log_polar(cls, log_mag: float, phase: float = 0.0) -> XComplex:
        if log_mag == -math.inf:
            return ZERO
        e2 = math.floor(log_mag / LN2)
        mag = math.exp(log_mag - e2 * LN2)
        return cls.normalized(mag * math.cos(phase), mag * math.sin(phase), e2)

    @property
    def is_zero(self) -> bool:
        return self.re_m == 0.0 and self.im_m == 0.0

    def to_complex(self) -> complex:
        return complex(_ldexp(self.re_m, self.e2), _ldexp(self.im_m, self.e2))

    def log_abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log(math.hypot(self.re_m, self.im_m)) + self.e2 * LN2

    def arg(self) -> float:
        return math.atan2(self.im_m, self.re_m)

    def mul(self, other: XComplex) -> XComplex:
        if self.is_zero or other.is_zero:
            return ZERO
        return XComplex.normalized(
            self.re_m * other.re_m - self.im_m * other.im_m,
            self.re_m * other.im_m + self.im_m * other.re_m,
            self.e2 + other.e2,
        )

    def div(self, other: XComplex) -> XComplex:
        if other.is_zero:
            raise DomainError("Division by exact zero")
        if self.is_zero:
            return ZERO
        q = complex(self.re_m, self.im_m) / complex(other.re_m, other.im_m)
        return XComplex.normalized(q.real, q.imag, self.e2 - other.e2)

    def add(self, other: XComplex) -> XComplex:
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        e2 = max(self.e2, other.e2)
        return XComplex.normalized(
            math.ldexp(self.re_m, self.e2 - e2) + math.ldexp(other.re_m, other.e2 - e2),
            math.ldexp(self.im_m, self.e2 - e2) + math.ldexp(other.im_m, other.e2 - e2),
            e2,
        )

    def neg(self) -> XComplex:
        if self.is_zero:
            return ZERO
        return XComplex(-self.re_m, -self.im_m, self.e2)

    def sub(self, other: XComplex) -> XComplex:
        return self.add(other.neg())

    def int_pow(self, exponent: int) -> XComplex:
        if abs(exponent) > MAX_INT_POWER:
            raise DomainError(f"Exponent {exponent} exceeds 2**16 in magnitude")
        if exponent == 0:
            return ONE
        if self.is_zero:
            if exponent < 0:
                raise DomainError("Division by exact zero")
            return ZERO
        result = ONE
        base = self
        k = abs(exponent)
        while k:
            if k & 1:
                result = result.mul(base)
            k >>= 1
            if k:
                base = base.mul(base)
        if exponent < 0:
            return ONE.div(result)
        return result

    def __add__(self, other) -> XComplex:
        return self.add(_coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> XComplex:
        return self.sub(_coerce(other))

    def __rsub__(self, other) -> XComplex:
        return _coerce(other).sub(self)

    def __mul__(self, other) -> XComplex:
        return self.mul(_coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> XComplex:
        return self.div(_coerce(other))

    def __rtruediv__(self, other) -> XComplex:
        return _coerce(other).div(self)

    def __pow__(self, exponent: int) -> XComplex:
        return self.int_pow(int(exponent))

    def __neg__(self) -> XComplex:
        return self.neg()

    def __complex__(self) -> complex:
        return self.to_complex()

    def __abs__(self) -> float:
        return abs(self.to_complex())


ZERO = XComplex(0.0, 0.0, 0)
ONE = XComplex(0.5, 0.0, 1)


def _ldexp(mantissa: float, e2: int) -> float:
    try:
        return math.ldexp(mantissa, e2)
    except OverflowError:
        return math.copysign(math.inf, mantissa) if mantissa else 0.0


def _coerce(value) -> XComplex:
    if isinstance(value, XComplex):
        return value
    return XComplex.from_complex(complex(value))


def xc_arith(a: XComplex, b: XComplex | int, op: Operation | str) -> XComplex:
    match Operation(op):
        case Operation.ADD:
            return a.add(b)
        case Operation.SUB:
            return a.sub(b)
        case Operation.MUL:
            return a.mul(b)
        case Operation.DIV:
            return a.div(b)
        case Operation.INT_POW:
            if isinstance(b, XComplex):
                value = b.to_complex()
                if value.imag != 0.0 or value.real != int(value.real):
                    raise DomainError(f"Non-integer exponent {value}")
                b = int(value.real)
            return a.int_pow(int(b))


def xc_product(factors) -> XComplex:
    result = ONE
    for factor in factors:
        result = result.mul(factor)
    return result


def scale_log(values: np.ndarray, k: float) -> np.ndarray:
    """k * values for complex logarithms, keeping -inf real parts NaN-free."""
    values = np.asarray(values, dtype=complex)
    out = np.empty(values.shape, dtype=complex)
    with np.errstate(invalid="ignore"):
        out.real = k * values.real
        out.imag = k * values.imag
    out.imag[~np.isfinite(out.imag)] = 0.0
    return out


def log1m(t: np.ndarray) -> np.ndarray:
    """Principal log(1 - t), accurate for small |t|."""
    t = np.asarray(t, dtype=complex)
    out = np.empty(t.shape, dtype=complex)
    small = np.abs(t) < 1e-4
    ts = t[small]
    out[small] = -ts * (1.0 + ts * (0.5 + ts * (1.0 / 3.0 + ts * 0.25)))
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~small] = np.log(1.0 - t[~small])
    return out


def log_add(la, lb) -> np.ndarray:
    """Complex log of exp(la) + exp(lb), elementwise."""
    la, lb = np.broadcast_arrays(
        np.asarray(la, dtype=complex), np.asarray(lb, dtype=complex)
    )
    swap = lb.real > la.real
    hi = np.where(swap, lb, la)
    lo = np.where(swap, la, lb)
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.asarray(hi + log1m(-np.exp(lo - hi)))
    out = np.where(hi.real == -np.inf, complex(-np.inf, 0.0), out)
    out = np.where(hi.real == np.inf, hi, out)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CircleSamples:
    center: complex
    radius: float
    values: np.ndarray

    def __post_init__(self):
        if not self.radius > 0.0:
            raise DomainError(f"Circle radius must be positive, got {self.radius}")
        count = len(self.values)
        if count < MIN_SAMPLES or not is_power_of_two(count):
            raise DomainError(f"Sample count {count} is not a power of two >= 64")

    @property
    def count(self) -> int:
        return len(self.values)


def circle_points(center: complex, radius: float, count: int, offset: float = 0.0):
    theta = TWO_PI * (np.arange(count) + offset) / count
    return center + radius * np.exp(1j * theta)


def sample_circle(
    func: Callable[[np.ndarray], np.ndarray],
    center: complex,
    radius: float,
    count: int = DEFAULT_SAMPLES,
) -> CircleSamples:
    values = np.asarray(func(circle_points(center, radius, count)), dtype=complex)
    return CircleSamples(complex(center), float(radius), values)


def winding_number(samples: CircleSamples) -> int:
    values = samples.values
    if not np.all(np.isfinite(values)) or np.any(values == 0):
        raise ResolutionError(
            f"Zero or non-finite sample on |z - {samples.center}| = {samples.radius}"
        )
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        steps = np.angle(np.roll(values, -1) / values)
    if not np.all(np.isfinite(steps)) or np.any(np.abs(steps) >= MAX_PHASE_STEP):
        raise ResolutionError(
            f"Phase jump >= pi/2 with {samples.count} samples on radius {samples.radius}"
        )
    return int(round(float(np.sum(steps)) / TWO_PI))


def wind_around(
    func: Callable[[np.ndarray], np.ndarray],
    center: complex,
    radius: float,
    count: int = DEFAULT_SAMPLES,
) -> int:
    """Winding number of func around 0 on a circle, doubling the samples as needed."""
    while True:
        try:
            return winding_number(sample_circle(func, center, radius, count))
        except ResolutionError as ex:
            count *= 2
            if count > MAX_SAMPLES:
                raise ResolutionError(
                    f"Gave up on radius {radius} past {MAX_SAMPLES} samples"
                ) from ex
            _LOGGER.debug("Resampling radius %s with %s samples", radius, count)

"""Parameter budgets: synthesis, audit and the elementary bounds behind them."""

from __future__ import annotations

from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from .abstract_map import Disk, RingAnnulus, TrapLayout
from .cantor_exception import DomainError, SpecError
from .const import NON_STRICT_SLACK, TrapMode
from .family import FamilySpec
from .helper import format_log_value, ring_target

_LOGGER: logging.Logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
# Relative float guard for the strict elementary bounds
FLOAT_GUARD = 1e-15


@dataclass(frozen=True)
class ParamBudget:
    """Derived quantities s, u, v and log|a_i|, all carried as natural logs."""

    p: int
    degrees: tuple[int, ...]
    xi: float
    K: int
    log_s: float
    log_u: float
    log_v: float
    log_a: tuple[float, ...]
    log_s_bounds: tuple[tuple[str, float], ...] = ()
    shrink: float = 1.0
    fitted: bool = False

    @property
    def s(self) -> float:
        return math.exp(self.log_s)

    @property
    def u(self) -> float:
        return math.exp(self.log_u)

    @property
    def v(self) -> float:
        return math.exp(self.log_v)

    @property
    def log_s_max(self) -> float:
        return min(value for _, value in self.log_s_bounds)

    def to_spec(self, phases=None) -> FamilySpec:
        return FamilySpec.from_log_mags(self.p, self.degrees, self.log_a, phases)

    def as_dict(self):
        def quantity(log_value):
            return {"ln": log_value, "value": format_log_value(log_value)}

        return {
            "p": self.p,
            "degrees": list(self.degrees),
            "xi": self.xi,
            "K": self.K,
            "s": quantity(self.log_s),
            "u": quantity(self.log_u),
            "v": quantity(self.log_v),
            "log_a": list(self.log_a),
            "s_bounds": [
                {"name": name, **quantity(value)} for name, value in self.log_s_bounds
            ],
            "shrink": self.shrink,
            "fitted": self.fitted,
        }

    @classmethod
    def from_dict(cls, data) -> ParamBudget:
        try:
            return cls(
                int(data["p"]),
                tuple(int(d) for d in data["degrees"]),
                float(data["xi"]),
                int(data["K"]),
                float(data["s"]["ln"]),
                float(data["u"]["ln"]),
                float(data["v"]["ln"]),
                tuple(float(la) for la in data["log_a"]),
                tuple(
                    (str(bound["name"]), float(bound["ln"]))
                    for bound in data.get("s_bounds", [])
                ),
                float(data.get("shrink", 1.0)),
                bool(data.get("fitted", False)),
            )
        except (KeyError, TypeError, ValueError) as ex:
            raise SpecError(f"Invalid budget: {ex}", field="/budget") from ex

    def __str__(self):
        return (
            f"p={self.p}, degrees={self.degrees}, K={self.K}, "
            f"s={format_log_value(self.log_s)}, u={format_log_value(self.log_u)}, "
            f"v={format_log_value(self.log_v)}"
        )


@dataclass(frozen=True)
class AuditEntry:
    name: str
    lhs_log: float
    rhs_log: float
    margin_log: float
    passed: bool
    strict: bool = True

    def as_dict(self):
        return {
            "name": self.name,
            "lhs_log": self.lhs_log,
            "rhs_log": self.rhs_log,
            "margin_log": self.margin_log,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class AuditReport:
    entries: tuple[AuditEntry, ...]

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def failures(self) -> list[AuditEntry]:
        return [entry for entry in self.entries if not entry.passed]

    def as_list(self):
        return [entry.as_dict() for entry in self.entries]


def _check_degrees(p: int, degrees) -> tuple[int, ...]:
    degrees = tuple(int(d) for d in degrees)
    if p not in (0, 1):
        raise DomainError(f"p must be 0 or 1, got {p}")
    if len(degrees) < 2:
        raise DomainError(f"Need n >= 2 degrees, got {len(degrees)}")
    if min(degrees) < 2:
        raise DomainError(f"Degrees must be >= 2, got {degrees}")
    if sum(1 / d for d in degrees) >= 1:
        raise DomainError(f"Σ1/dᵢ = {sum(1 / d for d in degrees)} not < 1")
    return degrees


def _s_bounds(p: int, degrees) -> tuple[tuple[str, float], ...]:
    xi = sum(1 / d for d in degrees)
    K = max(degrees)
    dn = degrees[-1]
    lnK = math.log(K)
    if p == 1:
        return (
            ("K^(-5xi/(1-xi))", -5 * xi / (1 - xi) * lnK),
            ("K^(5-2K)", (5 - 2 * K) * lnK),
        )
    return (
        ("2^(-1/((1-xi)(1+1/dn-2xi/3)))", -LN2 / ((1 - xi) * (1 + 1 / dn - 2 * xi / 3))),
        ("(4K)^(-3/(1-xi))", -3 / (1 - xi) * math.log(4 * K)),
        ("K^(-2K/(1+1/dn+2(1-xi)/3))", -2 * K / (1 + 1 / dn + 2 * (1 - xi) / 3) * lnK),
    )


def _derive(p: int, degrees, log_s: float) -> tuple[float, float, tuple[float, ...]]:
    xi = sum(1 / d for d in degrees)
    lnK = math.log(max(degrees))
    dn = degrees[-1]
    if p == 1:
        log_u = log_s - 5 * lnK
        log_v = log_s - 2 * lnK
    else:
        log_u = log_s * (1 + 1 / dn + 2 * (1 - xi) / 3)
        log_v = log_s * (1 / dn + (1 - xi) / 3)
    n = len(degrees)
    log_a = [0.0] * (n - 1)
    log_a[n - 2] = log_v / dn
    for i in range(n - 3, -1, -1):
        log_a[i] = log_u / degrees[i + 1] + log_a[i + 1]
    return log_u, log_v, tuple(log_a)


def synth(p: int, degrees, shrink: float = 1.0) -> tuple[FamilySpec, ParamBudget]:
    degrees = _check_degrees(p, degrees)
    if not 0.0 < shrink <= 1.0:
        raise DomainError(f"shrink must lie in (0, 1], got {shrink}")
    bounds = _s_bounds(p, degrees)
    log_s = min(value for _, value in bounds) + math.log(shrink)
    log_u, log_v, log_a = _derive(p, degrees, log_s)
    budget = ParamBudget(
        p,
        degrees,
        sum(1 / d for d in degrees),
        max(degrees),
        log_s,
        log_u,
        log_v,
        log_a,
        bounds,
        shrink,
    )
    _LOGGER.debug("Synthesized budget %s", budget)
    return budget.to_spec(), budget


def synth_uniform(n: int, s: float) -> FamilySpec:
    """f_{1,n+1,..,n+1} with |a_(n-i)| = (n/(n+1))^(i-1) s^i."""
    if n < 2:
        raise DomainError(f"Need n >= 2, got {n}")
    if not 0.0 < s <= 0.1:
        raise DomainError(f"s must lie in (0, 1/10], got {s}")
    log_a = [0.0] * (n - 1)
    for i in range(1, n):
        log_a[n - i - 1] = (i - 1) * math.log(n / (n + 1)) + i * math.log(s)
    return FamilySpec.from_log_mags(1, [n + 1] * n, log_a)


def fit_budget(spec: FamilySpec) -> ParamBudget:
    """Recover s, u and v from the magnitudes of an arbitrary spec."""
    degrees = spec.degrees
    xi = sum(1 / d for d in degrees)
    K = max(degrees)
    dn = degrees[-1]
    la = spec.log_mags
    log_v = dn * la[-1]
    if spec.p == 1:
        log_s = log_v + 2 * math.log(K)
    else:
        log_s = log_v / (1 / dn + (1 - xi) / 3)
    log_u, _, _ = _derive(spec.p, degrees, log_s)
    if spec.n >= 3:
        log_u = max(
            degrees[i + 1] * (la[i] - la[i + 1]) for i in range(spec.n - 2)
        )
    bounds = _s_bounds(spec.p, degrees) if xi < 1 else ()
    shrink = math.exp(min(log_s - min(v for _, v in bounds), 700.0)) if bounds else 1.0
    return ParamBudget(
        spec.p,
        tuple(degrees),
        xi,
        K,
        log_s,
        log_u,
        log_v,
        tuple(la),
        bounds,
        shrink,
        fitted=True,
    )


def inflate(budget: ParamBudget, factor: float) -> ParamBudget:
    log_s = budget.log_s + math.log(factor)
    log_u, log_v, log_a = _derive(budget.p, budget.degrees, log_s)
    return replace(
        budget,
        log_s=log_s,
        log_u=log_u,
        log_v=log_v,
        log_a=log_a,
        shrink=budget.shrink * factor,
    )


def _entry(name: str, lhs: float, rhs: float, strict: bool = True) -> AuditEntry:
    margin = rhs - lhs
    if strict:
        passed = margin > 0
    else:
        passed = margin >= -NON_STRICT_SLACK * max(1.0, abs(lhs), abs(rhs))
    return AuditEntry(name, lhs, rhs, margin, passed, strict)


def audit_budget(spec: FamilySpec, budget: ParamBudget) -> AuditReport:
    """Every inequality of the budget lemma in log form, lhs < rhs."""
    K = budget.K
    lnK = math.log(K)
    ls, lu, lv = budget.log_s, budget.log_u, budget.log_v
    la = spec.log_mags
    d1 = spec.degrees[0]
    dn = spec.degrees[-1]
    entries = [
        _entry("xi_below_one", math.log(budget.xi), 0.0),
    ]
    if budget.log_s_bounds:
        entries.append(_entry("s_range", ls, budget.log_s_max, strict=False))
    entries.append(_entry("(1) u^(2/K) <= K^-4", 2 / K * lu, -4 * lnK, strict=False))
    for i in range(2, spec.n):
        for j in range(1, i):
            entries.append(
                _entry(
                    f"(2) |a{j}/a{i}| <= u^(({i}-{j})/K)",
                    la[j - 1] - la[i - 1],
                    (i - j) / K * lu,
                    strict=False,
                )
            )
    if budget.p == 1:
        entries.append(
            _entry("(3a) (s/|a1|)^d1 < su/(2v)", d1 * (ls - la[0]), ls + lu - lv - LN2)
        )
        entries.append(
            _entry("(3b) (|a1|/s)^d1 v/2 > K", lnK, d1 * (la[0] - ls) + lv - LN2)
        )
    else:
        entries.append(_entry("(4a) 2Ku/v < s", LN2 + lnK + lu - lv, ls))
        entries.append(
            _entry("(4a) 1/(2Kv) > (2/s)^(1/dn)", (LN2 - ls) / dn, -LN2 - lnK - lv)
        )
        entries.append(
            _entry("(4b) (s/|a1|)^d1 < sv/2", d1 * (ls - la[0]), ls + lv - LN2)
        )
        entries.append(_entry("(4b) sv/2 < u^(1/2)/2", ls + lv, lu / 2))
        entries.append(
            _entry(
                "(4c) (|a1|/s)^d1 u/(2v) > (2/s)^(1/dn)",
                (LN2 - ls) / dn,
                d1 * (la[0] - ls) + lu - LN2 - lv,
            )
        )
    report = AuditReport(tuple(entries))
    for entry in report.failures:
        _LOGGER.info("Audit %s failed with margin %s", entry.name, entry.margin_log)
    return report


def budget_layout(spec: FamilySpec, budget: ParamBudget) -> TrapLayout:
    """Traps D_s and |z| > K (p=1) or |z| > M = (2/s)^(1/dn) (p=0), rings A_i."""
    eps = math.exp(2 / budget.K * budget.log_u)
    rings = []
    for i, (la, D) in enumerate(zip(spec.log_mags, spec.D), start=1):
        r = (spec.degrees[i - 1] / spec.degrees[i]) ** (1 / D)
        mag = math.exp(la)
        rings.append(
            RingAnnulus(
                i,
                max(min(r, 1.0) - 2 * eps, 0.0) * mag,
                (max(r, 1.0) + 2 * eps) * mag,
                ring_target(spec.n, i, spec.p),
                f"A{i}",
            )
        )
    s = budget.s
    if spec.p == 1:
        outer = float(budget.K)
    else:
        outer = math.exp((LN2 - budget.log_s) / spec.degrees[-1])
    return TrapLayout(TrapMode.BUDGET, Disk(0j, s), outer, s, outer, tuple(rings))


def _below(lhs: float, rhs: float) -> bool:
    return lhs < rhs + FLOAT_GUARD * abs(rhs)


def power_bounds(n: int, eps: float) -> bool:
    """n eps < (1+eps)^n - 1 < 3n eps and n eps/3 < 1 - (1-eps)^n < n eps."""
    if not 0.0 < eps < 1.0 / n:
        raise DomainError(f"eps = {eps} outside (0, 1/{n})")
    grow = math.expm1(n * math.log1p(eps))
    shrink = -math.expm1(n * math.log1p(-eps))
    return (
        _below(n * eps, grow)
        and _below(grow, 3 * n * eps)
        and _below(n * eps / 3, shrink)
        and _below(shrink, n * eps)
    )


def factor_bound(z: complex, a: complex, n: int, eps: float) -> bool:
    """|z - a| <= eps|a| implies |z^n - a^n| <= ((1+eps)^n - 1)|a|^n."""
    if not abs(z - a) <= eps * abs(a):
        raise DomainError(f"|z - a| > eps|a| for z={z}, a={a}")
    bound = math.expm1(n * math.log1p(eps)) * abs(a) ** n
    return _below(abs(z**n - a**n), bound)


def root_proximity(z: complex, a: complex, n: int, eps: float) -> bool:
    """|z^n - a^n| <= eps|a|^n implies |a/z|^n < 1+2eps and z is eps|a|-close to a root."""
    if not abs(z**n - a**n) <= eps * abs(a) ** n:
        raise DomainError(f"|z^n - a^n| > eps|a|^n for z={z}, a={a}")
    roots = a * np.exp(2j * np.pi * np.arange(1, n + 1) / n)
    closest = float(np.min(np.abs(z - roots)))
    return _below(abs(a / z) ** n, 1 + 2 * eps) and _below(closest, eps * abs(a))

import math

import numpy as np
import pytest

from cantor_rings.cantor_exception import DomainError
from cantor_rings.params import (
    ParamBudget,
    audit_budget,
    budget_layout,
    factor_bound,
    fit_budget,
    inflate,
    power_bounds,
    root_proximity,
    synth,
    synth_uniform,
)

GRID = [
    (1, (4, 4, 4)),
    (1, (5, 5, 5, 5)),
    (0, (4, 5, 6)),
    (0, (5, 5, 5, 5)),
    (1, (6, 6)),
    (0, (5, 6)),
]


@pytest.mark.parametrize("p, degrees", GRID)
def test_synth_passes_audit(p, degrees):
    spec, budget = synth(p, degrees)
    report = audit_budget(spec, budget)
    assert report.passed, report.failures
    assert spec.degrees == degrees
    assert all(lo < hi for lo, hi in zip(spec.log10_mags, spec.log10_mags[1:]))


@pytest.mark.parametrize("p, degrees", GRID)
def test_fit_budget_recovers_synth(p, degrees):
    spec, budget = synth(p, degrees)
    fitted = fit_budget(spec)
    assert fitted.fitted
    assert fitted.log_s == pytest.approx(budget.log_s, rel=1e-9)
    assert fitted.log_v == pytest.approx(budget.log_v, rel=1e-9)


def test_inflated_budget_fails_audit():
    _, budget = synth(1, (5, 5, 5, 5))
    inflated = inflate(budget, 1e3)
    report = audit_budget(inflated.to_spec(), inflated)
    assert not report.passed
    assert "s_range" in [entry.name for entry in report.failures]


def test_budget_dict_round_trip():
    _, budget = synth(0, (4, 5, 6))
    assert ParamBudget.from_dict(budget.as_dict()) == budget


def test_budget_layout_rings_are_ordered():
    spec, budget = synth(1, (5, 5, 5, 5))
    layout = budget_layout(spec, budget)
    assert len(layout.rings) == 3
    assert layout.outer_radius == 5.0
    edges = [layout.inner.radius]
    for ring in layout.rings:
        edges += [ring.inner, ring.outer]
    assert edges == sorted(edges)


@pytest.mark.parametrize(
    "p, degrees", [(1, (2, 2)), (2, (5, 5)), (1, (5,)), (0, (1, 5, 5))]
)
def test_synth_rejects(p, degrees):
    with pytest.raises(DomainError):
        synth(p, degrees)


def test_synth_uniform():
    spec = synth_uniform(3, 0.01)
    assert spec.degrees == (4, 4, 4)
    assert 10 ** spec.log10_mags[-1] == pytest.approx(0.01)
    assert 10 ** spec.log10_mags[0] == pytest.approx(0.75 * 0.01**2)
    with pytest.raises(DomainError):
        synth_uniform(3, 0.5)


def test_elementary_bounds_randomized():
    rng = np.random.default_rng(20240607)
    for _ in range(10_000):
        n = int(rng.integers(2, 9))
        eps = float(rng.uniform(1e-6, 0.99 / n))
        assert power_bounds(n, eps)

        a = complex(*rng.normal(size=2))
        radius = 0.9 * eps * abs(a) * rng.uniform()
        z = a + radius * np.exp(2j * math.pi * rng.uniform())
        assert factor_bound(z, a, n, eps)

        small = 0.1 * eps
        delta = 0.9 * small * rng.uniform() * np.exp(2j * math.pi * rng.uniform())
        w = a * (1 + delta) ** (1 / n)
        assert root_proximity(w, a, n, small)


def test_elementary_bounds_reject_bad_input():
    with pytest.raises(DomainError):
        power_bounds(3, 0.5)
    with pytest.raises(DomainError):
        factor_bound(2.0, 1.0, 3, 0.1)

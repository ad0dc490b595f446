import math

import numpy as np
import pytest

from cantor_rings.abstract_map import load_map
from cantor_rings.cantor_exception import PoleError, SpecError
from cantor_rings.const import Basin, MapKind, Target
from cantor_rings.family import (
    FamilyMap,
    FamilySpec,
    McMullenSpec,
    basin_combinatorics,
    eval_log_deriv,
    evaluate,
    log_eval,
    mcmullen_eval,
    mcmullen_to_family,
    singular_circles,
    validate,
)
from cantor_rings.helper import canonical_json, ring_target


def direct(z, c=1e-6):
    return z**-3 * (z**6 - c)


def test_shape_of_small_spec(small_spec):
    assert small_spec.n == 2
    assert small_spec.D == (6,)
    assert small_spec.leading_exponent == -3
    assert small_spec.exponents == (1,)
    assert small_spec.degree == 6
    assert validate(small_spec) == []


@pytest.mark.parametrize("z", [0.5, 0.3 + 0.2j, -0.05j, 2.0 - 1.0j])
def test_evaluate_matches_formula(small_spec, z):
    assert evaluate(small_spec, z).to_complex() == pytest.approx(direct(z), rel=1e-12)


def test_log_eval_matches_formula(small_spec):
    z = np.array([0.5, 0.3 + 0.2j, -0.05j, 0.09 + 0.01j, 40.0])
    assert np.exp(log_eval(small_spec, z)) == pytest.approx(direct(z), rel=1e-10)


def test_log_eval_never_underflows():
    spec = FamilySpec.from_log_mags(1, [5, 5, 5], [-400.0, -200.0])
    values = log_eval(spec, np.array([math.exp(-300.0), math.exp(-500.0)]))
    assert np.all(np.isfinite(values.real))


def test_pole_at_origin(small_spec):
    with pytest.raises(PoleError):
        evaluate(small_spec, 0)


def test_log_derivative(small_spec):
    z = 0.2 + 0.05j
    w = z**6
    assert eval_log_deriv(small_spec, z) == pytest.approx(-(-3 + 6 * w / (w - 1e-6)))


def test_mcmullen_conversion():
    spec = McMullenSpec(3, 3, 0.001 + 0j)
    family = mcmullen_to_family(spec)
    assert family.degrees == (3, 3)
    for z in (0.7 + 0.1j, -0.2 + 0.4j):
        assert evaluate(family, z).to_complex() == pytest.approx(mcmullen_eval(spec, z))


def test_validate_flags_violations():
    spec = FamilySpec(1, (3, 3, 3), (-1.0, -2.0), (0.0, 0.0))
    violations = validate(spec)
    assert any("Σ1/dᵢ" in v for v in violations)
    assert any("ordering" in v for v in violations)


def test_json_round_trip_is_canonical(fig1_map):
    obj = fig1_map.spec.to_json()
    assert FamilySpec.from_json(obj) == fig1_map.spec
    assert canonical_json(FamilySpec.from_json(obj).to_json()) == canonical_json(obj)


def test_malformed_json_names_field():
    obj = {"p": 1, "degrees": [5, 5], "params": [{"log10_mag": "x", "phase_rad": 0}]}
    with pytest.raises(SpecError) as info:
        FamilySpec.from_json(obj)
    assert info.value.field == "/params/0/log10_mag"


@pytest.mark.parametrize(
    "p, n, images",
    [
        (1, 3, (Basin.BASIN_0, Basin.BASIN_INFINITY)),
        (1, 4, (Basin.BASIN_INFINITY, Basin.BASIN_INFINITY)),
        (0, 3, (Basin.BASIN_INFINITY, Basin.BASIN_0)),
        (0, 2, (Basin.BASIN_0, Basin.BASIN_0)),
    ],
)
def test_basin_combinatorics(p, n, images):
    assert basin_combinatorics(p, n) == images


@pytest.mark.parametrize(
    "n, i, p, target",
    [(4, 1, 1, Target.SMALL), (4, 2, 1, Target.LARGE), (4, 2, 0, Target.SMALL)],
)
def test_ring_target(n, i, p, target):
    assert ring_target(n, i, p) == target


def test_singular_circles(fig1_map):
    circles = singular_circles(fig1_map.spec)
    assert [c["kind"] for c in circles] == ["pole", "zero", "pole", "zero"]
    assert circles[1]["radius"] == pytest.approx(0.00025)


def test_load_map_kinds(fig1_map):
    assert isinstance(load_map(fig1_map.spec.to_json()), FamilyMap)
    mcmullen = load_map({"kind": "mcmullen", "k": 3, "l": 3, "eta": 0.001})
    assert mcmullen.kind == MapKind.MCMULLEN
    assert mcmullen.to_json()["kind"] == "mcmullen"
    with pytest.raises(SpecError):
        load_map({"kind": "newton"})


def test_signatures(fig1_map, mcmullen_map):
    assert str(fig1_map.signature()) == "(1, 4, (5, 5, 5, 5))"
    assert mcmullen_map.signature().degrees == (3, 3)


def test_log_derivative_matches_finite_differences(fig1_map):
    spec = fig1_map.spec
    rng = np.random.default_rng(5)
    log_r = rng.uniform(min(spec.log_mags) - 2.0, max(spec.log_mags) + 2.0, 1000)
    clear = np.min(np.abs(log_r[:, None] - np.array(spec.log_mags)[None, :]), axis=1)
    z = np.exp(log_r + 1j * rng.uniform(0.0, 2 * math.pi, 1000))[clear > 0.05]
    h = 1e-5
    diff = log_eval(spec, z * math.exp(h)) - log_eval(spec, z * math.exp(-h))
    wrapped = diff.real + 1j * ((diff.imag + math.pi) % (2 * math.pi) - math.pi)
    numeric = wrapped / (2 * h) * (-1) ** spec.p
    exact = np.array([eval_log_deriv(spec, w) for w in z])
    assert len(z) > 500
    assert exact == pytest.approx(numeric, rel=1e-5, abs=1e-5)

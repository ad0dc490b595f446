from fractions import Fraction
import itertools

import pytest

from cantor_rings.abstract_map import Check, Disk, Signature, TrapLayout
from cantor_rings.cantor_exception import SpecError
from cantor_rings.certify import (
    CertificationReport,
    TrapSpec,
    assemble_verdict,
    certify,
    expected_winding,
    invert_signature,
    signatures_conjugate,
    trap_checks,
    winding_profile,
)
from cantor_rings.const import TrapMode, Verdict
from cantor_rings.family import FamilyMap
from cantor_rings.params import audit_budget, synth


def test_fig1_is_certified(fig1_report):
    assert fig1_report.verdict == Verdict.CERTIFIED, fig1_report.reasons
    assert fig1_report.trap_mode == TrapMode.EMPIRICAL
    assert str(fig1_report.signature) == "(1, 4, (5, 5, 5, 5))"
    assert [d for _, d in fig1_report.winding_profile] == [-5, 5, -5, 5]
    assert len(fig1_report.ring_checks) == 3
    assert fig1_report.check("critical_values").passed


def test_fig1_winding_at_fixed_radii(fig1_map):
    profile = winding_profile(fig1_map, [1e-4, 1e-3, 0.02, 0.5])
    assert [d for _, d in profile] == [-5, 5, -5, 5]


def test_report_as_dict(fig1_report):
    data = fig1_report.as_dict()
    assert data["verdict"] == "Certified"
    assert data["trap_mode"] == "empirical"
    assert data["signature"] == {"p": 1, "n": 4, "degrees": [5, 5, 5, 5]}
    assert len(data["critical"]) == 3
    assert data["notes"]


def test_mcmullen_signature(mcmullen_map, fig1_map):
    report = certify(mcmullen_map)
    assert report.verdict == Verdict.CERTIFIED, report.reasons
    assert report.signature == Signature(1, 2, (3, 3))
    assert not signatures_conjugate(report.signature, fig1_map.signature())


def test_invert_signature():
    assert invert_signature(Signature(1, 4, (2, 3, 4, 5))) == Signature(0, 4, (5, 4, 3, 2))
    assert invert_signature(Signature(1, 3, (2, 3, 4))) == Signature(1, 3, (4, 3, 2))
    assert signatures_conjugate(Signature(0, 2, (3, 4)), Signature(1, 2, (4, 3)))


def test_bad_traps_fail(fig1_map):
    checks = trap_checks(fig1_map, s_trap=0.05)
    assert not checks[0].passed
    report = certify(fig1_map, traps=TrapSpec(s=0.05), mode=TrapMode.EMPIRICAL)
    assert report.verdict == Verdict.FAILED
    assert "inner_trap" in report.reasons


def _report(checks, profile, expected=(3, 3)):
    layout = TrapLayout(TrapMode.BUDGET, Disk(0j, 0.1), 10.0, 0.1, 10.0)
    return CertificationReport(
        "0" * 64,
        "family",
        TrapMode.BUDGET,
        layout,
        Signature(1, 2, expected),
        checks,
        profile,
        expected_winding(Signature(1, 2, expected)),
    )


def test_assemble_verdict():
    good = Check("inner_trap", 1.0, True)
    bad = Check("ring_1", -0.5, False)
    pending = Check("outer_trap", None, False)
    profile = [(0.5, -3), (5.0, 3)]

    assert assemble_verdict(_report([good], profile)).verdict == Verdict.CERTIFIED
    inconclusive = assemble_verdict(_report([good, pending], profile))
    assert inconclusive.verdict == Verdict.INCONCLUSIVE
    assert inconclusive.reasons == ["outer_trap"]
    failed = assemble_verdict(_report([bad, pending], profile))
    assert failed.verdict == Verdict.FAILED
    assert failed.reasons == ["ring_1", "outer_trap"]
    assert assemble_verdict(_report([good], [(0.5, 2), (5.0, 3)])).verdict == Verdict.FAILED
    assert assemble_verdict(_report([good], [(0.5, 3), (5.0, 3)])).verdict == Verdict.FAILED
    assert assemble_verdict(_report([good], [])).verdict == Verdict.INCONCLUSIVE


def test_empirical_needs_family(fig4_map):
    with pytest.raises(SpecError):
        certify(fig4_map, mode=TrapMode.EMPIRICAL)


@pytest.mark.parametrize(
    "signature, expected",
    [
        (Signature(1, 4, (5, 5, 5, 5)), (-5, 5, -5, 5)),
        (Signature(1, 2, (3, 3)), (-3, 3)),
        (Signature(0, 2, (2, 3)), (2, -3)),
        (Signature(0, 3, (4, 5, 6)), (-4, 5, -6)),
    ],
)
def test_expected_winding_alternates(signature, expected):
    assert expected_winding(signature) == expected


ACCEPTANCE_GRID = [
    (p, degrees)
    for p in (0, 1)
    for n in (2, 3, 4)
    for degrees in itertools.product((4, 5, 6), repeat=n)
    if sum(Fraction(1, d) for d in degrees) < 1
]


def test_acceptance_grid_size():
    assert len(ACCEPTANCE_GRID) == 232


@pytest.mark.parametrize("p, degrees", ACCEPTANCE_GRID)
def test_synthesized_specs_certify(p, degrees):
    spec, budget = synth(p, degrees)
    assert audit_budget(spec, budget).passed
    report = certify(FamilyMap(spec, budget=budget))
    assert report.trap_mode == TrapMode.BUDGET
    assert report.verdict == Verdict.CERTIFIED, report.reasons
    assert len(report.clusters) == len(degrees) - 1
    for cluster in report.clusters:
        assert cluster.within_bound
        assert cluster.in_annulus
        assert max(cluster.residuals) < 1e-9
    assert report.check("critical_localization").passed


def test_inflated_ring_parameter_fails():
    spec, budget = synth(1, (4, 4, 4))
    amap = FamilyMap(spec.with_param(2, 0.9), budget=budget)
    report = certify(amap, mode=TrapMode.BUDGET)
    assert report.verdict == Verdict.FAILED
    assert "ring_2" in report.reasons


def test_misordered_spec_is_rejected(fig1_map):
    with pytest.raises(SpecError) as info:
        certify(fig1_map.spec.with_param(2, 0.9))
    assert info.value.field == "/params/2/log10_mag"

import numpy as np
import pytest

from cantor_rings.cantor_exception import ScaleError
from cantor_rings.critical import (
    aberth_roots,
    displacement_estimate,
    oracle_all_critical,
    predicted,
    preimages,
    refine,
)
from cantor_rings.family import FamilySpec, mcmullen_eval
from cantor_rings.params import synth


@pytest.mark.parametrize(
    "coeffs, roots",
    [
        ([-6, 11, -6, 1], [1, 2, 3]),
        ([0, 0, -1, 0, 1], [-1, 0, 0, 1]),
        ([1, 0, 1], [-1j, 1j]),
    ],
)
def test_aberth_simple(coeffs, roots):
    found = aberth_roots(coeffs)
    key = lambda w: (round(w.real, 6), round(w.imag, 6))  # noqa: E731
    assert sorted(found, key=key) == pytest.approx(sorted(roots, key=key), abs=1e-10)


def test_aberth_rejects_non_finite():
    with pytest.raises(ScaleError):
        aberth_roots([1.0, np.inf, 1.0])
    with pytest.raises(ScaleError):
        aberth_roots([0.0, 0.0])


def test_mcmullen_critical_points(mcmullen_map):
    spec = mcmullen_map.spec
    oracle = oracle_all_critical(spec)
    assert oracle.total == oracle.expected == 10
    assert oracle.zero_multiplicity == 2
    assert oracle.infinity_multiplicity == 2

    clusters = refine(spec, predicted(spec), threads=2)
    assert len(clusters) == 1
    cluster = clusters[0]
    assert cluster.within_bound and cluster.distinct and cluster.in_annulus
    assert len(cluster.refined) == 6
    for w in cluster.refined:
        assert np.min(np.abs(oracle.free_roots - w)) < 1e-8
        assert abs(w**6 - 0.001) < 1e-10


def test_oracle_count_on_synthesized_spec():
    spec, _ = synth(1, (4, 4, 4))
    oracle = oracle_all_critical(spec)
    assert len(oracle.free_roots) == 16
    assert oracle.zero_multiplicity == 3
    assert oracle.infinity_multiplicity == 3
    assert oracle.total == oracle.expected == 22


def test_fig1_clusters(fig1_map):
    clusters = fig1_map.critical_clusters(threads=2)
    assert [cluster.ring_index for cluster in clusters] == [1, 2, 3]
    for cluster in clusters:
        assert len(cluster.refined) == 10
        assert all(res < 1e-9 for res in cluster.residuals)
        assert cluster.distinct
        assert cluster.points == cluster.refined


def test_cluster_as_dict(mcmullen_map):
    cluster = refine(mcmullen_map.spec, predicted(mcmullen_map.spec))[0]
    data = cluster.as_dict()
    assert data["ring_index"] == 1
    assert len(data["refined"]) == len(data["distances"]) == 6
    assert data["origin"] == {"re": 0.0, "im": 0.0}


def test_preimages(mcmullen_map):
    origin = mcmullen_map.origin
    roots = preimages(mcmullen_map.spec, 0.5)
    assert len(roots) == 6
    for z in roots:
        assert mcmullen_eval(origin, z) == pytest.approx(0.5, abs=1e-8)


def test_displacement_estimate_matches_newton():
    spec = FamilySpec.from_magnitudes(1, [4, 4, 4], [0.3, 0.6])
    for cluster in refine(spec, predicted(spec)):
        for w, w0 in zip(cluster.refined, cluster.predicted):
            estimate = displacement_estimate(spec, cluster.ring_index, w0)
            assert estimate == pytest.approx(abs(w - w0), rel=0.05)
        assert cluster.distances == pytest.approx(
            [abs(w - w0) for w, w0 in zip(cluster.refined, cluster.predicted)]
        )


@pytest.mark.parametrize(
    "p, degrees", [(1, (4, 4, 4, 5)), (0, (5, 5, 6, 6)), (1, (6, 6, 6, 6))]
)
def test_unresolved_displacements_stay_within_bound(p, degrees):
    spec, budget = synth(p, degrees)
    for cluster in refine(spec, predicted(spec, budget)):
        assert cluster.within_bound
        assert cluster.in_annulus
        assert all(d < cluster.bound for d in cluster.distances)
        assert all(res < 1e-9 for res in cluster.residuals)

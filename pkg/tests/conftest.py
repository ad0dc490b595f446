"""Shared maps and certification reports."""

import pytest

from cantor_rings.abstract_map import preset_map
from cantor_rings.certify import certify
from cantor_rings.family import FamilySpec
from cantor_rings.parabolic import PnMap, PnSpec


@pytest.fixture(scope="session")
def fig1_map():
    return preset_map("fig1")


@pytest.fixture(scope="session")
def fig1_report(fig1_map):
    return certify(fig1_map)


@pytest.fixture(scope="session")
def mcmullen_map():
    return preset_map("fig1-mcmullen")


@pytest.fixture(scope="session")
def fig4_map():
    return preset_map("fig4")


@pytest.fixture(scope="session")
def fig4_report(fig4_map):
    from cantor_rings.parabolic import certify_parabolic

    return certify_parabolic(fig4_map)


@pytest.fixture(scope="session")
def fig5_map():
    return preset_map("fig5")


@pytest.fixture(scope="session")
def pn_maps():
    return {n: PnMap(PnSpec.from_scale(n, 1 / (25 * n * n))) for n in (2, 3, 4)}


@pytest.fixture
def small_spec():
    """z^-3 (z^6 - 10^-6)."""
    return FamilySpec.from_magnitudes(1, [3, 3], [0.1])

import math

import numpy as np
import pytest

from cantor_rings.cantor_exception import DomainError, ResolutionError
from cantor_rings.const import Operation
from cantor_rings.numerics import (
    ONE,
    ZERO,
    CircleSamples,
    XComplex,
    log1m,
    log_add,
    sample_circle,
    scale_log,
    wind_around,
    winding_number,
    xc_arith,
    xc_product,
)


def test_extended_exponent_survives_underflow():
    tiny = XComplex.from_log_polar(-2000.0)
    huge = XComplex.from_log_polar(2000.0)
    assert tiny.to_complex() == 0
    assert huge.to_complex().real == math.inf
    assert tiny.log_abs() == pytest.approx(-2000.0, rel=1e-12)
    assert abs(tiny.mul(huge).to_complex() - 1) < 1e-9


def test_int_pow_far_below_double_range():
    half = XComplex.from_complex(0.5)
    assert half.int_pow(2000).log_abs() == pytest.approx(2000 * math.log(0.5), rel=1e-12)
    assert half.int_pow(-3).to_complex() == pytest.approx(8.0)
    assert half.int_pow(0) == ONE


def test_operator_overloads():
    two = XComplex.from_complex(2)
    assert complex((two + 3) * 2) == pytest.approx(10)
    assert complex(1 - two) == pytest.approx(-1)
    assert complex(two / 4) == pytest.approx(0.5)
    assert complex(two**10) == pytest.approx(1024)
    assert complex(-two) == pytest.approx(-2)
    assert abs(XComplex.from_complex(3 + 4j)) == pytest.approx(5)


def test_arith_dispatch():
    a = XComplex.from_complex(1 + 1j)
    b = XComplex.from_complex(2)
    assert complex(xc_arith(a, b, Operation.MUL)) == pytest.approx(2 + 2j)
    assert complex(xc_arith(a, b, "sub")) == pytest.approx(-1 + 1j)
    assert complex(xc_arith(a, 2, Operation.INT_POW)) == pytest.approx(2j)
    assert complex(xc_product([a, a, b])) == pytest.approx(4j)


def test_arith_errors():
    with pytest.raises(DomainError):
        ONE.div(ZERO)
    with pytest.raises(DomainError):
        ZERO.int_pow(-1)
    with pytest.raises(DomainError):
        xc_arith(ONE, XComplex.from_complex(1.5), Operation.INT_POW)
    with pytest.raises(DomainError):
        ONE.int_pow(2**17)
    with pytest.raises(DomainError):
        XComplex.normalized(math.nan, 0.0)


def test_log_helpers():
    assert np.exp(log_add(math.log(2), math.log(3))) == pytest.approx(5)
    assert log_add(complex(-np.inf, 0), math.log(2)) == pytest.approx(math.log(2))
    assert log_add(complex(-np.inf, 0), complex(-np.inf, 0)).real == -np.inf
    assert log1m(np.array([1e-10]))[0] == pytest.approx(-1e-10, rel=1e-12)
    out = scale_log(np.array([complex(-np.inf, 1.0)]), 3)
    assert out[0].real == -np.inf
    assert np.isfinite(out[0].imag)


@pytest.mark.parametrize(
    "func, expected",
    [
        (lambda z: z**3, 3),
        (lambda z: z**-2, -2),
        (lambda z: z - 5, 0),
        (lambda z: (z - 0.5) * (z + 0.5j), 2),
    ],
)
def test_winding_number(func, expected):
    assert winding_number(sample_circle(func, 0j, 1.0, 256)) == expected


def test_wind_around_doubles_samples():
    assert wind_around(lambda z: z**40, 0j, 1.0, 64) == 40


def test_zero_sample_is_unresolved():
    with pytest.raises(ResolutionError):
        winding_number(sample_circle(lambda z: z - 1, 0j, 1.0, 64))


def test_coarse_sampling_is_unresolved():
    with pytest.raises(ResolutionError):
        winding_number(sample_circle(lambda z: z**40, 0j, 1.0, 64))


@pytest.mark.parametrize("count", [32, 100])
def test_sample_count_must_be_power_of_two(count):
    with pytest.raises(DomainError):
        CircleSamples(0j, 1.0, np.ones(count, dtype=complex))


def test_circle_radius_must_be_positive():
    with pytest.raises(DomainError):
        CircleSamples(0j, 0.0, np.ones(64, dtype=complex))


def test_log_add_scalars_and_arrays_agree():
    scalar = log_add(math.log(2), math.log(3))
    assert np.ndim(scalar) == 0
    array = log_add(np.array([math.log(2), -np.inf]), np.array([math.log(3), 0.0]))
    assert array[0] == pytest.approx(scalar)
    assert array[1] == pytest.approx(0.0)


def test_random_arithmetic_matches_complex():
    rng = np.random.default_rng(17)
    count = 100_000
    scale = 10.0 ** rng.uniform(-100, 100, (2, count))
    za = (rng.normal(size=count) + 1j * rng.normal(size=count)) * scale[0]
    zb = (rng.normal(size=count) + 1j * rng.normal(size=count)) * scale[1]
    got = np.empty((4, count), dtype=complex)
    for k in range(count):
        a = XComplex.from_complex(za[k])
        b = XComplex.from_complex(zb[k])
        got[0, k] = a.mul(b).to_complex()
        got[1, k] = a.div(b).to_complex()
        got[2, k] = a.add(b).to_complex()
        got[3, k] = a.sub(b).to_complex()
    tol = 1e-14
    assert np.all(np.abs(got[0] - za * zb) <= tol * np.abs(za * zb))
    assert np.all(np.abs(got[1] - za / zb) <= tol * np.abs(za / zb))
    size = np.abs(za) + np.abs(zb)
    assert np.all(np.abs(got[2] - (za + zb)) <= tol * size)
    assert np.all(np.abs(got[3] - (za - zb)) <= tol * size)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckesieve import arith
from heckesieve.errors import InvalidSatakeData, MissingPrime, NonRealCoefficient
from heckesieve.satake import (
    SatakeData,
    hecke_eigenvalue,
    hecke_prime_power,
    hecke_series,
    realify,
    validate_kim_sarnak,
)


def power_sum(alpha, m):
    return sum(alpha ** (m - 2 * j) for j in range(m + 1)).real


@pytest.mark.parametrize("m, expected", [(0, 1.0), (1, 2.0), (3, 4.0), (7, 8.0)])
def test_degenerate_prime_power(trivial_form, m, expected):
    assert hecke_prime_power(trivial_form, 5, m) == expected


def test_prime_power_m2_is_square_minus_one(unitary_form):
    for p in (2, 3, 97, 1009):
        t1 = hecke_prime_power(unitary_form, p, 1)
        assert hecke_prime_power(unitary_form, p, 2) == pytest.approx(t1 * t1 - 1, abs=1e-12)


def test_eigenvalue_small_cases(unitary_form):
    t = lambda n: hecke_eigenvalue(unitary_form, n)
    assert t(1) == 1.0
    assert t(6) == pytest.approx(t(2) * t(3), abs=1e-14)
    assert t(4) == pytest.approx(t(2) ** 2 - 1, abs=1e-14)
    assert t(12) == pytest.approx(t(4) * t(3), abs=1e-14)


def test_eigenvalue_rejects_zero(unitary_form):
    with pytest.raises(ValueError):
        hecke_eigenvalue(unitary_form, 0)
    with pytest.raises(ValueError):
        hecke_prime_power(unitary_form, 2, -1)


def test_brute_force_euler_product_up_to_12(unitary_form):
    # multiply truncated local series as polynomials in n^-s, one prime at a time
    coeffs = {1: 1.0}
    for p in (2, 3, 5, 7, 11):
        local = {p ** m: power_sum(unitary_form.alpha(p), m) for m in range(4) if p ** m <= 12}
        coeffs = {a * b: ca * cb for a, ca in coeffs.items() for b, cb in local.items() if a * b <= 12}
    series = hecke_series(unitary_form, 12)
    for n in range(1, 13):
        assert series[n] == pytest.approx(coeffs[n], abs=1e-13)


def test_series_matches_pointwise(mixed_form):
    series = hecke_series(mixed_form, 500)
    for n in range(1, 501):
        assert series[n] == pytest.approx(hecke_eigenvalue(mixed_form, n), rel=1e-12, abs=1e-12)


def test_multiplicativity_exhaustive(unitary_form):
    tau = hecke_series(unitary_form, 1000).padded()
    for m in range(1, 32):
        for n in range(1, 1000 // m + 1):
            if math.gcd(m, n) == 1:
                assert abs(tau[m * n] - tau[m] * tau[n]) < 1e-12


@pytest.mark.parametrize("p", [2, 3, 13, 101, 7919])
def test_hecke_recursion(mixed_form, p):
    t = [hecke_prime_power(mixed_form, p, m) for m in range(22)]
    for m in range(1, 21):
        assert t[m + 1] == pytest.approx(t[1] * t[m] - t[m - 1], rel=1e-9, abs=1e-9)


def test_inversion_symmetry(mixed_form):
    inverted = SatakeData(mixed_form.nu_abs, mixed_form.primes, 1 / mixed_form.alphas, "inv")
    a = hecke_series(mixed_form, 3000).coeffs
    b = hecke_series(inverted, 3000).coeffs
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


def test_unitary_prime_power_bound(unitary_form):
    for p in arith.primes_upto(200).tolist():
        for m in range(12):
            assert abs(hecke_prime_power(unitary_form, p, m)) <= m + 1 + 1e-9


def test_kim_sarnak_trivial_and_unitary(unitary_form, mixed_form):
    r = validate_kim_sarnak(unitary_form, 1)
    assert r.passed and r.worst_case == 1 and r.details["worst_ratio"] == 1.0
    assert validate_kim_sarnak(unitary_form, 10_000).passed
    assert validate_kim_sarnak(mixed_form, 10_000).passed


def test_kim_sarnak_detects_large_parameter(unitary_form):
    p = 9973
    bad = unitary_form.with_alpha(p, p ** 0.2)
    r = validate_kim_sarnak(bad, 10_000)
    assert not r.passed
    assert r.worst_case % p == 0


def test_construction_rejects_bad_data():
    with pytest.raises(InvalidSatakeData):
        SatakeData.from_mapping({2: 1.0, 5: 1.0})  # 3 missing
    with pytest.raises(InvalidSatakeData):
        SatakeData.from_mapping({2: 1.5j})  # neither unitary nor real
    with pytest.raises(InvalidSatakeData):
        SatakeData.from_mapping({2: 2.0})  # beyond 2^(7/64)


def test_missing_prime(unitary_form):
    with pytest.raises(MissingPrime):
        unitary_form.alpha(20_011)
    with pytest.raises(MissingPrime):
        hecke_series(unitary_form, 30_000)


def test_realify_relative_tolerance():
    assert realify(1e6 + 1e-4j) == 1e6
    with pytest.raises(NonRealCoefficient):
        realify(1.0 + 1e-6j)


def test_immutable(unitary_form):
    with pytest.raises(ValueError):
        unitary_form.alphas[0] = 1.0


@settings(max_examples=60, deadline=None)
@given(theta=st.floats(0.0, math.pi), m=st.integers(0, 15))
def test_chebyshev_closed_form(theta, m):
    # tau(p^m) = sin((m+1) theta) / sin(theta) for alpha = e^{i theta}
    data = SatakeData.from_mapping({2: complex(math.cos(theta), math.sin(theta))})
    got = hecke_prime_power(data, 2, m)
    s = math.sin(theta)
    expected = math.sin((m + 1) * theta) / s if abs(s) > 1e-6 else None
    if expected is not None:
        assert got == pytest.approx(expected, abs=1e-8 / abs(s))
    assert abs(got) <= m + 1 + 1e-9

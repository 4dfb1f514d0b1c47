import math
import warnings

import numpy as np
import pytest

from heckesieve import arith
from heckesieve.analytic import (
    compare_smoothed_sharp,
    l_value_at_one,
    rankin_residue,
    short_interval_prime_sum,
    smooth_window,
    smoothed_prime_sum,
    verify_mean_value,
    verify_window_derivatives,
)
from heckesieve.errors import CoverageExceeded, DivergentLocal, InvalidTaper
from heckesieve.ingest import synthesize_form
from heckesieve.satake import SatakeData
from heckesieve.sympower import rankin_series


@pytest.fixture(scope="module")
def wide_form():
    return synthesize_form(3, 10 ** 6)


def euler_oracle(data, ell, cutoff):
    # direct loop over primes, exponents written out by hand
    out = 1.0
    for p in arith.primes_upto(cutoff).tolist():
        a = data.alpha(p)
        f = 1.0
        for e in range(-ell, ell + 1, 2):
            f *= 1 - a ** e / p
        out *= (1 / f).real
    return out


def test_l_value_empty_product(unitary_form):
    est = l_value_at_one(unitary_form, "sym2", 1)
    assert est.value == 1.0
    with pytest.raises(ValueError):
        l_value_at_one(unitary_form, "sym3", 100)


@pytest.mark.parametrize("which, ell", [("sym2", 2), ("sym4", 4)])
def test_l_value_matches_loop(mixed_form, which, ell):
    est = l_value_at_one(mixed_form, which, 5000)
    assert est.value == pytest.approx(euler_oracle(mixed_form, ell, 5000), rel=1e-10)
    assert est.tail_bound > 0


def test_l_value_degenerate(trivial_form):
    est = l_value_at_one(trivial_form, "sym2", 1000)
    assert est.degenerate and est.tail_bound == math.inf


def test_l_value_divergent_local():
    # inadmissible alpha = 1.3: 1 - alpha^4/2 < 0 while every other factor stays positive
    bad = SatakeData.from_mapping({2: 1.3}, check=False)
    with pytest.raises(DivergentLocal):
        l_value_at_one(bad, "sym4", 2)


def test_l_value_cutoff_consistency(wide_form):
    for which in ("sym2", "sym4"):
        lo = l_value_at_one(wide_form, which, 10 ** 5)
        hi = l_value_at_one(wide_form, which, 10 ** 6)
        assert abs(lo.value - hi.value) <= lo.tail_bound
        assert hi.tail_bound < lo.tail_bound


def test_rankin_residue_product(wide_form):
    val, bound = rankin_residue(wide_form, 10 ** 5)
    l2 = l_value_at_one(wide_form, "sym2", 10 ** 5).value
    l4 = l_value_at_one(wide_form, "sym4", 10 ** 5).value
    assert val == pytest.approx(l2 * l4) and bound > 0


def test_mean_value_small(unitary_form):
    assert rankin_series(unitary_form, 2, 1).coeffs.sum() == 1.0
    r = verify_mean_value(unitary_form, [10, 100, 1000])
    assert set(r.details["ratios"]) == {10, 100, 1000}
    assert r.details["L2_L4"] > 0


def test_partial_sums_nondecreasing(mixed_form):
    c = rankin_series(mixed_form, 2, 20_000).coeffs
    assert np.all(np.diff(np.cumsum(c)) >= -1e-12)


def test_prime_sum_empty_interval(wide_form):
    # 114 < n < 127 is a prime gap; x = 126, y = 126^0.4 ~ 6.9
    r = short_interval_prime_sum(wide_form, 126, 0.6)
    assert r.prime_count == 0 and r.sum_value == 0.0 and r.ratio == 0.0


def test_prime_sum_fields(wide_form):
    r = short_interval_prime_sum(wide_form, 10 ** 6, 0.3)
    assert r.y == (10 ** 6) ** 0.7
    assert r.main_term == pytest.approx(r.y / math.log(10 ** 6))
    assert r.ratio == pytest.approx(r.sum_value / r.main_term)
    primes = arith.primes_in_interval(math.ceil(r.x - r.y), 10 ** 6)
    oracle = sum((wide_form.alpha(p) + 1 / wide_form.alpha(p)).real ** 2 for p in primes.tolist())
    assert r.sum_value == pytest.approx(oracle, rel=1e-12)
    assert r.prime_count == primes.size


def test_prime_sum_nesting(wide_form):
    small = short_interval_prime_sum(wide_form, 5 * 10 ** 5, 0.4)
    large = short_interval_prime_sum(wide_form, 5 * 10 ** 5, 0.3)
    assert large.sum_value >= small.sum_value and large.prime_count >= small.prime_count


def test_prime_sum_coverage_and_warning(unitary_form):
    with pytest.raises(CoverageExceeded):
        short_interval_prime_sum(unitary_form, 10 ** 6, 0.3)
    with pytest.warns(UserWarning):
        short_interval_prime_sum(unitary_form, 10 ** 4, 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        short_interval_prime_sum(unitary_form, 10 ** 4, 0.5)


def test_window_values():
    w = smooth_window(1000.0, 200.0, 50.0)
    assert w(900.0) == 1.0
    assert w(1000.0 + 100.0) == 0.0
    assert w(700.0) == 0.0
    assert w.support == (750.0, 1050.0)
    xs = np.linspace(700, 1100, 4001)
    g = w(xs)
    assert np.all((g >= 0) & (g <= 1))
    assert np.all(g[(xs >= 800) & (xs <= 1000)] == 1.0)


@pytest.mark.parametrize("M, U", [(200.0, 50.0), (1e4, 1e3), (10.0, 5.0)])
def test_window_integral(M, U):
    w = smooth_window(1e5, M, U)
    lo, hi = w.support
    xs = np.linspace(lo, hi, 200_001)
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    integral = trapezoid(w(xs), xs)
    assert integral == pytest.approx(M + U, rel=0.05)


def test_window_invalid():
    with pytest.raises(InvalidTaper):
        smooth_window(100.0, 10.0, 6.0)
    with pytest.raises(InvalidTaper):
        smooth_window(100.0, 10.0, 0.0)


@pytest.mark.parametrize("U", [1.0, 10.0, 1000.0])
def test_window_derivatives(U):
    r = verify_window_derivatives(smooth_window(1e5, 4 * U, U))
    assert r.passed, r.details


def test_smoothed_vs_sharp(wide_form):
    c = compare_smoothed_sharp(wide_form, 1e5, 1e4, 1e3)
    assert abs(c.difference) <= c.taper_bound
    assert smoothed_prime_sum(wide_form, 1e5, 1e4, 1e3) == c.smoothed


def test_smoothed_empty_and_plateau(wide_form):
    # window [115.5, 126.5] lies inside the prime gap 113 < n < 127
    assert smoothed_prime_sum(wide_form, 125.0, 8.0, 1.5) == 0.0
    c = compare_smoothed_sharp(wide_form, 5e4, 1e3, 1e-3)
    primes = arith.primes_in_interval(49_000, 50_000)
    oracle = sum(math.log(p) * (wide_form.alpha(p) + 1 / wide_form.alpha(p)).real ** 2
                 for p in primes.tolist())
    assert c.sharp == pytest.approx(oracle, rel=1e-12)
    assert c.smoothed == pytest.approx(oracle, rel=1e-12)

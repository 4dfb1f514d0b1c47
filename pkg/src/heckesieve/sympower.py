"""Symmetric-power and Rankin-Selberg coefficients, and the identities linking them.

Local roots:

* ``sym^l``: ``alpha^(l - 2j)``, ``j = 0..l``
* ``sym^l x sym^l``: ``alpha^(2(l - j - k))``, ``j, k = 0..l``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import arith
from .dirichlet import (
    CoeffSeries,
    EulerLocal,
    convolve,
    dilate,
    expand_table,
    pointwise,
    zeta_series,
)
from .errors import NegativeCoefficient
from .report import VerificationReport
from .satake import SatakeData, hecke_series, local_table, realify

IDENTITY_TOL = 1e-9
MAX_ELL = 4


@dataclass(frozen=True, eq=False)
class SymPowerSpec:
    ell: int
    data: SatakeData

    def __post_init__(self) -> None:
        if not 1 <= self.ell <= MAX_ELL:
            raise ValueError(f"ell must lie in 1..{MAX_ELL}, got {self.ell}")


def sym_exponents(ell: int) -> list[int]:
    return [ell - 2 * j for j in range(ell + 1)]


def rankin_exponents(ell: int) -> list[int]:
    return [2 * (ell - j - k) for j in range(ell + 1) for k in range(ell + 1)]


def sym_local(spec: SymPowerSpec, p: int, deg: int) -> EulerLocal:
    a = np.array([spec.data.alpha(p)])
    c = local_table(a, sym_exponents(spec.ell), deg, what=f"sym^{spec.ell} local at p={p}")
    return EulerLocal(p, c[0])


def rankin_local(spec: SymPowerSpec, p: int, deg: int) -> EulerLocal:
    a = np.array([spec.data.alpha(p)])
    c = local_table(a, rankin_exponents(spec.ell), deg, what=f"Rankin local at p={p}")[0]
    _check_nonnegative(c, f"Rankin sym^{spec.ell} local at p={p}")
    return EulerLocal(p, c)


def _check_nonnegative(c: np.ndarray, what: str, tol: float = IDENTITY_TOL) -> None:
    scale = np.maximum(1.0, np.abs(c))
    if np.any(c < -tol * scale):
        i = np.unravel_index(int(np.argmin(c / scale)), c.shape)
        raise NegativeCoefficient(f"{what}: coefficient {c[i]!r} at {i} is negative")


def sym_table(data: SatakeData, ell: int, n_max: int, deg: int | None = None):
    primes, alphas = data.alphas_upto(n_max)
    deg = arith.max_power(2, n_max) if deg is None else deg
    return primes, local_table(alphas, sym_exponents(ell), deg, what=f"sym^{ell} local")


def rankin_table(data: SatakeData, ell: int, n_max: int, deg: int | None = None):
    primes, alphas = data.alphas_upto(n_max)
    deg = arith.max_power(2, n_max) if deg is None else deg
    table = local_table(alphas, rankin_exponents(ell), deg, what=f"Rankin sym^{ell} local")
    _check_nonnegative(table, f"Rankin sym^{ell} table")
    return primes, table


def sym_series(data: SatakeData, ell: int, n_max: int) -> CoeffSeries:
    """``tau^(ell)(1..n_max)``."""
    primes, table = sym_table(data, ell, n_max)
    return expand_table(primes, table, n_max, label=f"sym{ell}")


def rankin_series(data: SatakeData, ell: int, n_max: int) -> CoeffSeries:
    """``tau^(ell)_{VxV}(1..n_max)``, the Rankin-Selberg coefficients."""
    primes, table = rankin_table(data, ell, n_max)
    return expand_table(primes, table, n_max, label=f"rankin{ell}")


# -- closed-form prime-power coefficients via compositions -------------------

def compositions(m: int) -> Iterator[tuple[int, ...]]:
    """All ordered tuples of positive integers summing to ``m``."""
    if m == 0:
        yield ()
        return
    for first in range(1, m + 1):
        for rest in compositions(m - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _compositions_by_length(m: int) -> dict[int, tuple[tuple[int, ...], ...]]:
    out: dict[int, list[tuple[int, ...]]] = {}
    for h in compositions(m):
        out.setdefault(len(h), []).append(h)
    return {k: tuple(v) for k, v in out.items()}


def exp_log_coefficient(m: int, weight) -> complex:
    """Coefficient of ``X^m`` in ``exp(sum_h weight(h) X^h / h)``, by compositions."""
    total = 0
    for k, comps in _compositions_by_length(m).items():
        acc = 0
        for h in comps:
            term = 1
            for hr in h:
                term *= weight(hr) / hr
            acc += term
        total += acc / math.factorial(k)
    return total


def prime_power_coeff_formula(spec: SymPowerSpec, p: int, m: int) -> float:
    """``tau^(ell)(p^m)`` from the exponential/composition expansion (``m <= 12``)."""
    if m > 12:
        raise ValueError("composition formula limited to m <= 12")
    a = spec.data.alpha(p)
    exps = sym_exponents(spec.ell)

    @lru_cache(maxsize=None)
    def weight(h: int) -> complex:
        return sum(a ** (h * e) for e in exps)

    return realify(exp_log_coefficient(m, weight), what="composition formula")


def unit_weight_identity(m: int) -> Fraction:
    """``sum_k 1/k! sum_{h_1+..+h_k=m} 1/(h_1..h_k)`` in exact rationals (always 1)."""
    total = Fraction(0)
    for k, comps in _compositions_by_length(m).items():
        acc = Fraction(0)
        for h in comps:
            acc += Fraction(1, math.prod(h))
        total += acc / math.factorial(k)
    return total


# -- identity sweeps -----------------------------------------------------------

def _compare(name: str, lhs: np.ndarray, rhs: np.ndarray, tol: float, what: str,
             details: dict | None = None) -> VerificationReport:
    diff = np.abs(np.asarray(lhs) - np.asarray(rhs))
    i = int(np.argmax(diff)) if diff.size else 0
    return VerificationReport(
        check_name=name,
        range_tested=what,
        max_abs_error=float(diff[i]) if diff.size else 0.0,
        worst_case=i + 1,
        tolerance=tol,
        details=details or {},
    )


def verify_domination(spec: SymPowerSpec, n_max: int,
                      sym: CoeffSeries | None = None,
                      rankin: CoeffSeries | None = None,
                      tol: float = IDENTITY_TOL) -> VerificationReport:
    """``tau^(ell)(n)^2 <= tau^(ell)_{VxV}(n)`` for all ``n <= n_max``.

    ``sym`` / ``rankin`` may be supplied precomputed (fault-injection hook).
    """
    if spec.ell not in (1, 2):
        raise ValueError("domination is only supported for ell in {1, 2}")
    sym = sym_series(spec.data, spec.ell, n_max) if sym is None else sym
    rankin = rankin_series(spec.data, spec.ell, n_max) if rankin is None else rankin
    excess = sym.coeffs ** 2 - rankin.coeffs
    i = int(np.argmax(excess))
    return VerificationReport(
        check_name=f"domination_ell{spec.ell}",
        range_tested=f"1 <= n <= {n_max}",
        max_abs_error=max(0.0, float(excess[i])),
        worst_case=i + 1,
        tolerance=tol,
        details={
            "equality_at_1": bool(sym.coeffs[0] ** 2 == rankin.coeffs[0] == 1.0),
            "max_excess": float(excess[i]),
            "form": spec.data.source_tag,
        },
    )


def verify_shimura(data: SatakeData, n_max: int, tol: float = IDENTITY_TOL) -> VerificationReport:
    """``zeta(2s) sum tau(n)^2 n^-s = zeta(s) L(s; sym^2)`` coefficientwise."""
    tau = hecke_series(data, n_max)
    zeta = zeta_series(n_max)
    lhs = convolve(dilate(zeta, 2), pointwise(tau, tau))
    rhs = convolve(zeta, sym_series(data, 2, n_max))
    return _compare("shimura", lhs.coeffs, rhs.coeffs, tol, f"1 <= n <= {n_max}",
                    {"form": data.source_tag})


def verify_rankin_factorization(spec: SymPowerSpec, n_max: int,
                                tol: float = IDENTITY_TOL) -> VerificationReport:
    """``L(s; sym^l x sym^l) = zeta(s) prod_{k=1}^{l} L(s; sym^{2k})`` coefficientwise."""
    if spec.ell not in (1, 2):
        raise ValueError("Rankin factorization is only supported for ell in {1, 2}")
    lhs = rankin_series(spec.data, spec.ell, n_max)
    rhs = zeta_series(n_max)
    for k in range(1, spec.ell + 1):
        rhs = convolve(rhs, sym_series(spec.data, 2 * k, n_max))
    return _compare(f"rankin_factorization_ell{spec.ell}", lhs.coeffs, rhs.coeffs, tol,
                    f"1 <= n <= {n_max}", {"form": spec.data.source_tag})


def chebyshev_forms(ell: int, x: complex) -> tuple[complex, complex, complex]:
    """The three expressions of the Chebyshev-type identity at ``X = x``.

    The quotient form is ``nan`` at ``x = +-1`` where it has a removable singularity.
    """
    double = sum(x ** (2 * (ell - j - k)) for j in range(ell + 1) for k in range(ell + 1))
    den = x - 1 / x
    quotient = ((x ** (ell + 1) - x ** (-(ell + 1))) / den) ** 2 if abs(den) > 1e-12 else complex("nan")
    nested = sum(x ** (2 * (l - m)) for l in range(ell + 1) for m in range(2 * l + 1))
    return complex(double), complex(quotient), complex(nested)


def chebyshev_identity_check(ell: int, sample_points: Iterable[complex],
                             tol: float = 1e-10) -> VerificationReport:
    worst, worst_x = 0.0, None
    count = 0
    for x in sample_points:
        a, b, c = chebyshev_forms(ell, x)
        errs = [abs(a - c)]
        if not np.isnan(b.real):
            errs += [abs(a - b), abs(b - c)]
        e = max(errs)
        count += 1
        if e > worst or worst_x is None:
            worst, worst_x = e, x
    a1, _, c1 = chebyshev_forms(ell, 1.0)
    limit_err = max(abs(a1 - (ell + 1) ** 2), abs(c1 - (ell + 1) ** 2))
    if limit_err > worst:
        worst, worst_x = limit_err, 1.0
    return VerificationReport(
        check_name=f"chebyshev_ell{ell}",
        range_tested=f"{count} points on |X|=1, plus X=1 limit",
        max_abs_error=float(worst),
        worst_case=worst_x,
        tolerance=tol,
        details={"limit_value": a1.real, "expected_limit": (ell + 1) ** 2},
    )


def verify_composition_formula(spec: SymPowerSpec, p_limit: int, m_max: int,
                               tol: float = IDENTITY_TOL) -> VerificationReport:
    """Composition formula against the Euler expansion for ``p <= p_limit``, ``m <= m_max``."""
    worst, where = 0.0, None
    for p in arith.primes_upto(p_limit).tolist():
        loc = sym_local(spec, p, m_max)
        for m in range(m_max + 1):
            e = abs(prime_power_coeff_formula(spec, p, m) - loc.c[m])
            if where is None or e > worst:
                worst, where = e, (p, m)
    return VerificationReport(
        check_name=f"composition_formula_ell{spec.ell}",
        range_tested=f"p <= {p_limit}, m <= {m_max}",
        max_abs_error=worst,
        worst_case=where,
        tolerance=tol,
        details={"form": spec.data.source_tag},
    )


def random_unit_circle(rng: np.random.Generator, k: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(k))


def degree_one_powersums(data: SatakeData, ell: int, primes: Sequence[int]) -> np.ndarray:
    a = np.array([data.alpha(p) for p in primes])
    return realify(sum(a ** e for e in sym_exponents(ell)))

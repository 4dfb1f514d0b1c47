"""Satake parameters of a Hecke-Maass form and its Hecke eigenvalues.

The local factor at ``p`` is ``[(1 - a X)(1 - X/a)]^{-1}`` with ``X = p^{-s}``,
so ``tau(p^m)`` is the power sum ``sum_{j=0}^{m} a^{m-2j}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import arith
from .dirichlet import CoeffSeries, expand_table
from .errors import InvalidSatakeData, MissingPrime, NonRealCoefficient
from .report import VerificationReport

KIM_SARNAK = 7 / 64
REAL_TOL = 1e-9
UNIT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SatakeData:
    """Per-prime Satake parameters ``alpha(p)`` for every prime ``p <= p_max``.

    ``alpha`` and ``1/alpha`` are interchangeable; nothing here depends on
    which member of the pair is stored.
    """

    nu_abs: float
    primes: np.ndarray
    alphas: np.ndarray
    source_tag: str
    parity: int | None = None
    rho1: complex | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        primes = np.asarray(self.primes, dtype=np.int64)
        alphas = np.asarray(self.alphas, dtype=np.complex128)
        primes.setflags(write=False)
        alphas.setflags(write=False)
        object.__setattr__(self, "primes", primes)
        object.__setattr__(self, "alphas", alphas)
        if primes.shape != alphas.shape:
            raise InvalidSatakeData("primes and alphas differ in length")
        if self.check:
            self._validate()

    def _validate(self) -> None:
        expected = arith.primes_upto(self.p_max)
        if not np.array_equal(expected, self.primes):
            raise InvalidSatakeData("prime list is not the complete list of primes <= p_max")
        bad = ~ramanujan_admissible(self.primes, self.alphas)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise InvalidSatakeData(
                f"alpha({int(self.primes[i])}) = {self.alphas[i]!r} is neither unitary "
                f"nor real within p^(7/64)"
            )

    @classmethod
    def from_mapping(cls, alphas: Mapping[int, complex], nu_abs: float = 0.0,
                     source_tag: str = "manual", **kw) -> "SatakeData":
        ps = sorted(alphas)
        return cls(nu_abs, np.array(ps, dtype=np.int64),
                   np.array([alphas[p] for p in ps], dtype=np.complex128), source_tag, **kw)

    @classmethod
    def constant(cls, alpha: complex, p_max: int, source_tag: str = "constant") -> "SatakeData":
        """Every prime gets the same ``alpha`` (``alpha=1`` is the degenerate test point)."""
        ps = arith.primes_upto(p_max)
        return cls(0.0, ps, np.full(ps.size, alpha, dtype=np.complex128), source_tag)

    @property
    def p_max(self) -> int:
        return int(self.primes[-1]) if self.primes.size else 1

    def alpha(self, p: int) -> complex:
        i = int(np.searchsorted(self.primes, p))
        if i >= self.primes.size or self.primes[i] != p:
            raise MissingPrime(p, self.p_max)
        return complex(self.alphas[i])

    def covers(self, limit: float) -> bool:
        """True when every prime ``<= limit`` has data."""
        limit = int(math.floor(limit))
        return limit <= self.p_max or arith.primes_upto(limit).size == self.primes.size

    def alphas_upto(self, limit: int) -> tuple[np.ndarray, np.ndarray]:
        """``(primes, alphas)`` restricted to ``p <= limit``; raises if data runs out."""
        if limit > self.p_max and arith.primes_upto(limit).size > self.primes.size:
            missing = int(arith.primes_upto(limit)[self.primes.size])
            raise MissingPrime(missing, self.p_max)
        k = int(np.searchsorted(self.primes, limit, side="right"))
        return self.primes[:k], self.alphas[:k]

    def as_dict(self) -> dict[int, complex]:
        return {int(p): complex(a) for p, a in zip(self.primes, self.alphas)}

    def with_alpha(self, p: int, alpha: complex, check: bool = False) -> "SatakeData":
        """Copy with ``alpha(p)`` replaced (used for fault injection)."""
        i = int(np.searchsorted(self.primes, p))
        if i >= self.primes.size or self.primes[i] != p:
            raise MissingPrime(p, self.p_max)
        alphas = self.alphas.copy()
        alphas[i] = alpha
        return SatakeData(self.nu_abs, self.primes, alphas, self.source_tag + "+patched",
                          self.parity, self.rho1, check=check)

    def is_unitary(self) -> np.ndarray:
        return np.abs(np.abs(self.alphas) - 1.0) <= UNIT_TOL


def ramanujan_admissible(primes: np.ndarray, alphas: np.ndarray, rel_tol: float = UNIT_TOL) -> np.ndarray:
    """Mask of parameters allowed by the Kim-Sarnak form of the local bound.

    Either ``|alpha| = 1`` or ``alpha`` is real with ``1 < |alpha| <= p^(7/64)``.
    The pair is unordered, so ``|alpha| < 1`` is judged through ``1/alpha``.
    """
    primes = np.asarray(primes, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.complex128)
    mod = np.abs(alphas)
    unitary = np.abs(mod - 1.0) <= rel_tol
    with np.errstate(divide="ignore"):
        big = np.where(mod >= 1.0, mod, 1.0 / mod)
    real = np.abs(alphas.imag) <= rel_tol * np.maximum(mod, 1.0)
    bounded = big <= primes ** KIM_SARNAK * (1.0 + rel_tol)
    return unitary | (real & bounded)


def realify(z, tol: float = REAL_TOL, what: str = "coefficient"):
    """Drop the imaginary part of ``z`` after checking it is rounding noise.

    The threshold is ``tol * max(1, |z|)`` so that large coefficients built
    from non-unitary parameters do not trip on relative rounding error.
    """
    arr = np.asarray(z, dtype=np.complex128)
    scale = np.maximum(1.0, np.abs(arr))
    resid = np.abs(arr.imag)
    if np.any(resid > tol * scale):
        i = int(np.argmax(resid / scale))
        raise NonRealCoefficient(
            f"{what} has imaginary part {resid.flat[i]:.3e} (value {arr.flat[i]!r}); "
            "Satake data is probably corrupt"
        )
    out = arr.real
    return float(out) if out.ndim == 0 else out


def complete_homogeneous(roots: Sequence[np.ndarray] | np.ndarray, deg: int) -> np.ndarray:
    """Coefficients of ``prod_j (1 - roots_j X)^{-1}`` up to ``X^deg``.

    ``roots`` has shape ``(k, P)``: ``k`` roots for each of ``P`` primes.
    Returns a complex array of shape ``(P, deg + 1)``.
    """
    roots = np.atleast_2d(np.asarray(roots, dtype=np.complex128))
    c = np.zeros((roots.shape[1], deg + 1), dtype=np.complex128)
    c[:, 0] = 1.0
    for beta in roots:
        for m in range(1, deg + 1):
            c[:, m] += beta * c[:, m - 1]
    return c


def local_table(alphas: np.ndarray, exponents: Sequence[int], deg: int,
                what: str = "local coefficient") -> np.ndarray:
    """Real coefficient table of ``prod_e (1 - alpha^e X)^{-1}``, one row per prime."""
    alphas = np.asarray(alphas, dtype=np.complex128)
    roots = np.array([alphas ** e for e in exponents]) if len(exponents) else np.ones((0, alphas.size))
    return realify(complete_homogeneous(roots, deg), what=what)


def hecke_prime_power(data: SatakeData, p: int, m: int) -> float:
    """``tau_V(p^m) = sum_{j=0}^m alpha^(m-2j)``."""
    if m < 0:
        raise ValueError("m must be non-negative")
    a = data.alpha(p)
    return realify(sum(a ** (m - 2 * j) for j in range(m + 1)), what=f"tau(p^{m}) at p={p}")


def hecke_eigenvalue(data: SatakeData, n: int) -> float:
    if n < 1:
        raise ValueError(f"Hecke eigenvalues are defined for n >= 1, got {n}")
    out = 1.0
    for p, m in arith.factorize(n).items():
        out *= hecke_prime_power(data, p, m)
    return out


def hecke_series(data: SatakeData, n_max: int) -> CoeffSeries:
    """Dense ``tau_V(1..n_max)`` by expanding the Hecke Euler product."""
    primes, alphas = data.alphas_upto(n_max)
    deg = arith.max_power(2, n_max)
    table = local_table(alphas, (1, -1), deg, what="Hecke eigenvalue")
    return expand_table(primes, table, n_max, label="tau")


def validate_kim_sarnak(data: SatakeData, n_max: int, tau: CoeffSeries | None = None) -> VerificationReport:
    """Sweep ``|tau_V(n)| <= d(n) n^(7/64)`` over ``n <= n_max``."""
    if tau is None:
        tau = hecke_series(data, n_max)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    d = arith.divisor_count_upto(n_max)[1:]
    ratio = np.abs(tau.coeffs) / (d * n ** KIM_SARNAK)
    i = int(np.argmax(ratio))
    worst = float(ratio[i])
    return VerificationReport(
        check_name="kim_sarnak",
        range_tested=f"1 <= n <= {n_max}",
        max_abs_error=max(0.0, worst - 1.0),
        worst_case=i + 1,
        tolerance=REAL_TOL,
        details={"worst_ratio": worst, "form": data.source_tag},
    )

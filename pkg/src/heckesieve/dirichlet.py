"""Finite Dirichlet-series arithmetic on dense coefficient arrays."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import arith
from .errors import InsufficientLocalDegree, LengthMismatch


@dataclass(frozen=True, eq=False)
class CoeffSeries:
    """Coefficients ``a_1 .. a_{n_max}``; ``coeffs[n - 1]`` holds ``a_n``."""

    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a coefficient series needs at least a_1")
        if not np.isfinite(arr[0]):
            raise ValueError("a_1 must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def n_max(self) -> int:
        return int(self.coeffs.size)

    def __getitem__(self, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise IndexError(f"n={n} outside 1..{self.n_max}")
        return float(self.coeffs[n - 1])

    def padded(self) -> np.ndarray:
        """Writable copy with a zero in slot 0, so that index ``n`` holds ``a_n``."""
        return np.concatenate(([0.0], self.coeffs))

    def truncate(self, n_max: int) -> "CoeffSeries":
        return CoeffSeries(self.coeffs[:n_max], self.label)

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.coeffs)

    @classmethod
    def from_padded(cls, arr: np.ndarray, label: str = "") -> "CoeffSeries":
        return cls(arr[1:], label)


@dataclass(frozen=True, eq=False)
class EulerLocal:
    """Truncated power series ``sum_l c[l] X^l`` in ``X = p^{-s}``, with ``c[0] = 1``."""

    p: int
    c: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.c, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("local factor needs a constant term")
        if arr[0] != 1.0:
            raise ValueError(f"local factor at p={self.p} has c[0]={arr[0]!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "c", arr)

    @property
    def deg_max(self) -> int:
        return int(self.c.size - 1)

    def value(self, s: float) -> float:
        """Truncated series evaluated at ``X = p^{-s}``."""
        x = float(self.p) ** (-s)
        return float(np.polynomial.polynomial.polyval(x, self.c))

    def __mul__(self, other: "EulerLocal") -> "EulerLocal":
        if self.p != other.p:
            raise ValueError("cannot multiply local factors at different primes")
        deg = min(self.deg_max, other.deg_max)
        return EulerLocal(self.p, np.convolve(self.c, other.c)[: deg + 1])


def local_from_roots(p: int, roots, deg: int) -> EulerLocal:
    """``prod_j (1 - roots_j X)^{-1}`` for real roots, truncated at ``deg``."""
    c = np.zeros(deg + 1)
    c[0] = 1.0
    for b in roots:
        for m in range(1, deg + 1):
            c[m] += b * c[m - 1]
    return EulerLocal(p, c)


def polynomial_local(p: int, poly) -> EulerLocal:
    """A finite local factor given by its polynomial coefficients."""
    return EulerLocal(p, np.asarray(poly, dtype=np.float64))


def invert_local(f: EulerLocal) -> EulerLocal:
    """Power-series reciprocal of ``f`` to the same degree."""
    c = f.c
    g = np.zeros_like(c)
    g[0] = 1.0
    for m in range(1, c.size):
        g[m] = -np.dot(c[1 : m + 1], g[m - 1 :: -1][:m])
    return EulerLocal(f.p, g)


def expand_table(primes: np.ndarray, table: np.ndarray, n_max: int, label: str = "") -> CoeffSeries:
    """Multiply out an Euler product given as a table of local coefficients.

    ``table[i, l]`` is the coefficient of ``p_i^{-ls}``. Every prime up to
    ``n_max`` must be present and carry degree at least ``log_p n_max``.
    """
    primes = np.asarray(primes, dtype=np.int64)
    needed = arith.primes_upto(n_max)
    if primes.size < needed.size or not np.array_equal(primes[: needed.size], needed):
        have = set(primes.tolist())
        missing = [int(q) for q in needed if int(q) not in have]
        raise InsufficientLocalDegree(f"no local factor for primes {missing[:10]}")
    a = np.ones(n_max + 1, dtype=np.float64)
    a[0] = 0.0
    deg = table.shape[1] - 1
    for i, p in enumerate(needed.tolist()):
        if p * p > n_max:
            # from here on every multiple has valuation exactly 1
            c1 = table[i : needed.size, 1]
            for q, c in zip(needed[i:].tolist(), c1.tolist()):
                a[q::q] *= c
            break
        k = arith.max_power(p, n_max)
        if k > deg:
            raise InsufficientLocalDegree(f"p={p} needs degree {k}, table has {deg}")
        v = arith.prime_valuations(p, n_max)
        a[p::p] *= table[i, v]
    return CoeffSeries.from_padded(a, label)


def euler_expand(local_factory: Callable[[int], EulerLocal], n_max: int, label: str = "") -> CoeffSeries:
    """Global coefficients from a prime -> local factor map.

    ``coeffs[n] = prod_{p^l || n} c_p[l]``.
    """
    a = np.ones(n_max + 1, dtype=np.float64)
    a[0] = 0.0
    for p in arith.primes_upto(n_max).tolist():
        loc = local_factory(p)
        k = arith.max_power(p, n_max)
        if loc.deg_max < k:
            raise InsufficientLocalDegree(f"p={p} needs degree {k}, local has {loc.deg_max}")
        v = arith.prime_valuations(p, n_max)
        a[p::p] *= loc.c[v]
    return CoeffSeries.from_padded(a, label)


def convolve(a: CoeffSeries, b: CoeffSeries, label: str = "") -> CoeffSeries:
    """Dirichlet convolution ``sum_{d|n} a_d b_{n/d}``."""
    if a.n_max != b.n_max:
        raise LengthMismatch(f"n_max differs: {a.n_max} vs {b.n_max}")
    n_max = a.n_max
    av, bv = a.padded(), b.padded()
    out = np.zeros(n_max + 1, dtype=np.float64)
    for d in range(1, n_max + 1):
        ad = av[d]
        if ad != 0.0:
            out[d::d] += ad * bv[1 : n_max // d + 1]
    return CoeffSeries.from_padded(out, label)


def dilate(a: CoeffSeries, k: int, label: str = "") -> CoeffSeries:
    """Substitution ``s -> k s``: moves ``a_n`` to position ``n^k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = np.zeros(a.n_max + 1, dtype=np.float64)
    n = 1
    while n ** k <= a.n_max:
        out[n ** k] = a[n]
        n += 1
    return CoeffSeries.from_padded(out, label)


def zeta_series(n_max: int) -> CoeffSeries:
    return CoeffSeries(np.ones(n_max), "zeta")


def delta_series(n_max: int) -> CoeffSeries:
    c = np.zeros(n_max)
    c[0] = 1.0
    return CoeffSeries(c, "delta")


def mobius_series(n_max: int) -> CoeffSeries:
    return CoeffSeries(arith.mobius_upto(n_max)[1:].astype(np.float64), "mobius")


def pointwise(a: CoeffSeries, b: CoeffSeries, label: str = "") -> CoeffSeries:
    if a.n_max != b.n_max:
        raise LengthMismatch(f"n_max differs: {a.n_max} vs {b.n_max}")
    return CoeffSeries(a.coeffs * b.coeffs, label)

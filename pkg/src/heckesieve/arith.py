"""Elementary arithmetic tables: primes, Moebius, divisor counts.

Everything returns dense numpy arrays indexed by ``n`` (slot 0 unused) so that
callers can slice multiples with ``a[p::p]``.
"""

from __future__ import annotations

import math

import numpy as np


def primes_upto(limit: int) -> np.ndarray:
    """Primes ``p <= limit`` as an int64 array (plain Eratosthenes)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def primes_in_interval(lo: int, hi: int, segment: int = 1 << 18) -> np.ndarray:
    """Primes in the closed interval ``[lo, hi]`` by a segmented sieve."""
    lo = max(int(lo), 2)
    hi = int(hi)
    if hi < lo:
        return np.array([], dtype=np.int64)
    base = primes_upto(math.isqrt(hi))
    out = []
    start = lo
    while start <= hi:
        stop = min(start + segment, hi + 1)  # exclusive
        mask = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            mask[first - start :: p] = False
        out.append(np.flatnonzero(mask) + start)
        start = stop
    return np.concatenate(out).astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for q in range(3, math.isqrt(n) + 1, 2):
        if n % q == 0:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of a positive integer by trial division."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def mobius_upto(limit: int) -> np.ndarray:
    """``mu[n]`` for ``0 <= n <= limit`` (``mu[0] = 0``)."""
    mu = np.ones(limit + 1, dtype=np.int64)
    mu[0] = 0
    for p in primes_upto(limit):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def squarefree_upto(limit: int) -> np.ndarray:
    """Boolean mask, true at squarefree ``n <= limit``."""
    return mobius_upto(limit) != 0


def divisor_count_upto(limit: int) -> np.ndarray:
    d = np.zeros(limit + 1, dtype=np.int64)
    for k in range(1, limit + 1):
        d[k::k] += 1
    return d


def divisor_power_upto(limit: int, l: int) -> np.ndarray:
    """``d_l(n)``: ordered factorisations of ``n`` into ``l`` factors.

    ``d_0`` is the identity of Dirichlet convolution (1 at n=1, else 0).
    """
    out = np.zeros(limit + 1, dtype=np.float64)
    if limit >= 1:
        out[1] = 1.0
    for _ in range(l):
        nxt = np.zeros_like(out)
        for k in range(1, limit + 1):
            if out[k] != 0.0:
                nxt[k::k] += out[k]
        out = nxt
    return out


def prime_valuations(p: int, limit: int) -> np.ndarray:
    """Exact ``p``-adic valuation of ``p, 2p, 3p, ... <= limit``."""
    m = np.arange(p, limit + 1, p, dtype=np.int64)
    v = np.zeros(m.size, dtype=np.int64)
    pk = p
    while pk <= limit:
        v[pk // p - 1 :: pk // p] += 1
        pk *= p
    return v


def max_power(p: int, limit: int) -> int:
    """Largest ``k`` with ``p**k <= limit`` (0 if ``p > limit``)."""
    k, pk = 0, p
    while pk <= limit:
        k += 1
        pk *= p
    return k

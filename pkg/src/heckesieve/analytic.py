"""L-values at s=1, mean values, and prime sums in short intervals."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import arith
from .errors import CoverageExceeded, DivergentLocal, InvalidTaper
from .report import VerificationReport, band_violation
from .satake import KIM_SARNAK, SatakeData, realify
from .sympower import rankin_series, sym_exponents

TAIL_SIGMAS = 4.0
L_FUNCTIONS = {"sym2": 2, "sym4": 4}


@dataclass(frozen=True)
class LValueEstimate:
    value: float
    p_cutoff: int
    tail_bound: float
    label: str
    degenerate: bool = False


def _local_values_at_one(primes: np.ndarray, alphas: np.ndarray, ell: int) -> np.ndarray:
    """``prod_j (1 - alpha^(ell-2j)/p)^{-1}`` for each prime."""
    p = primes.astype(np.float64)
    den = np.ones(primes.size, dtype=np.complex128)
    for e in sym_exponents(ell):
        den *= 1.0 - alphas ** e / p
    return realify(1.0 / den, what=f"sym^{ell} local value at s=1")


def _tail_log_bound(data: SatakeData, ell: int, cutoff: int) -> float:
    """Bound on ``|log L - log L_cutoff|`` for the primes beyond ``cutoff``.

    The ``p^{-hs}``, ``h >= 2`` part is bounded outright (sharp form for unitary
    data, worst local-bound exponent otherwise). The ``h = 1`` part,
    ``sum_{p > P} a_p / p``, only converges conditionally; it is estimated as a
    mean-zero sum with the empirical second moment of ``a_p`` and a
    ``TAIL_SIGMAS`` band, ``sigma^2 sum_{p>P} p^-2 <= sigma^2 / (P log P)``.
    """
    k = ell + 1
    P = max(cutoff, 2)
    if data.is_unitary().all():
        higher = k / (P - 1) if P > 2 else float(k)
    else:
        r = ell * KIM_SARNAK
        # sum_{n > P} n^(2r - 2) / (1 - n^(r-1)), integral comparison
        higher = k * P ** (2 * r - 1) / ((1 - 2 * r) * (1 - P ** (r - 1)))
    _, alphas = data.alphas_upto(min(cutoff, data.p_max))
    if alphas.size:
        a1 = realify(sum(alphas ** e for e in sym_exponents(ell)))
        sigma = float(np.sqrt(np.mean(a1 ** 2)))
    else:
        sigma = float(k)
    first = TAIL_SIGMAS * sigma / math.sqrt(P * math.log(P))
    return first + higher


def l_value_at_one(data: SatakeData, which: str, p_cutoff: int) -> LValueEstimate:
    """Truncated Euler product of ``L(1; sym^2)`` or ``L(1; sym^4)``."""
    if which not in L_FUNCTIONS:
        raise ValueError(f"which must be one of {sorted(L_FUNCTIONS)}")
    ell = L_FUNCTIONS[which]
    primes, alphas = data.alphas_upto(p_cutoff)
    locals_ = _local_values_at_one(primes, alphas, ell)
    if np.any(locals_ <= 0.0):
        i = int(np.argmax(locals_ <= 0.0))
        raise DivergentLocal(f"{which} local factor at p={int(primes[i])} is {locals_[i]!r}")
    value = float(np.exp(np.sum(np.log(locals_)))) if locals_.size else 1.0
    degenerate = bool(primes.size) and bool(np.all(np.abs(alphas ** 2 - 1.0) < 1e-12))
    if degenerate:
        tail = math.inf
    else:
        tail = value * math.expm1(_tail_log_bound(data, ell, p_cutoff))
    return LValueEstimate(value, int(p_cutoff), tail, f"L(1;{which}) [{data.source_tag}]", degenerate)


def rankin_residue(data: SatakeData, p_cutoff: int | None = None) -> tuple[float, float]:
    """``L(1;sym^2) L(1;sym^4)`` and its propagated tail bound."""
    cutoff = data.p_max if p_cutoff is None else p_cutoff
    l2 = l_value_at_one(data, "sym2", cutoff)
    l4 = l_value_at_one(data, "sym4", cutoff)
    value = l2.value * l4.value
    bound = (l2.value + l2.tail_bound) * (l4.value + l4.tail_bound) - value
    return value, bound


def verify_mean_value(data: SatakeData, N_list: Sequence[int], p_cutoff: int | None = None,
                      band: tuple[float, float] = (0.9, 1.1)) -> VerificationReport:
    """Partial sums of the ``sym^2 x sym^2`` coefficients against ``L L N``.

    Passes when the last ratio sits in ``band`` and ``|ratio - 1|`` never grows
    along the sorted ``N_list``. The error is the band violation plus every
    increase of ``|ratio - 1|``.
    """
    Ns = sorted(int(n) for n in N_list)
    n_top = Ns[-1]
    coeffs = rankin_series(data, 2, n_top).coeffs
    sums = np.cumsum(coeffs)
    main, main_bound = rankin_residue(data, p_cutoff)
    ratios = {N: float(sums[N - 1] / (main * N)) for N in Ns}
    devs = [abs(ratios[N] - 1.0) for N in Ns]
    growth = sum(max(0.0, b - a) for a, b in zip(devs, devs[1:]))
    err = band_violation(ratios[n_top], *band) + growth
    per_n = sums / np.arange(1, n_top + 1)
    return VerificationReport(
        check_name="mean_value",
        range_tested=f"N in {Ns}",
        max_abs_error=err,
        worst_case=n_top,
        tolerance=0.0,
        details={
            "ratios": ratios,
            "L2_L4": main,
            "L2_L4_tail_bound": main_bound,
            "sup_sum_over_N": float(per_n.max()),
            "sup_at": int(np.argmax(per_n)) + 1,
            "monotone_deviation": growth == 0.0,
        },
    )


@dataclass(frozen=True)
class PrimeSumResult:
    x: float
    theta: float
    y: float
    sum_value: float
    prime_count: int
    main_term: float
    ratio: float

    @property
    def mean_per_prime(self) -> float:
        return self.sum_value / self.prime_count if self.prime_count else float("nan")


def _tau_squared_at_primes(data: SatakeData, primes: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(data.primes, primes)
    a = data.alphas[idx]
    return realify(a + 1.0 / a, what="tau(p)") ** 2


def short_interval_prime_sum(data: SatakeData, x: float, theta: float) -> PrimeSumResult:
    """``sum_{x - y <= p <= x} tau(p)^2`` with ``y = x^(1 - theta)``."""
    if not data.covers(x):
        raise CoverageExceeded(f"x={x} exceeds prime coverage p_max={data.p_max}")
    if x > 1 and theta < math.log(x) ** -0.5:
        warnings.warn(
            f"theta={theta} below (log x)^(-1/2)={math.log(x) ** -0.5:.4f}", stacklevel=2
        )
    y = x ** (1.0 - theta)
    primes = arith.primes_in_interval(math.ceil(x - y), math.floor(x))
    total = float(_tau_squared_at_primes(data, primes).sum()) if primes.size else 0.0
    main = y / math.log(x)
    return PrimeSumResult(float(x), float(theta), y, total, int(primes.size), main, total / main)


# -- smooth window ---------------------------------------------------------------

def _ramp(t: np.ndarray) -> np.ndarray:
    """``exp(-1/t)`` smoothstep: 0 for t <= 0, 1 for t >= 1, C-infinity in between."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / t), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / (1.0 - t)), 0.0)
    return a / (a + b)


def _ramp_derivative_constants(k_max: int = 4, n: int = 200_001) -> list[float]:
    # one-off high-resolution estimate of max |ramp^(k)| on [0, 1]
    t = np.linspace(0.0, 1.0, n)
    h = t[1] - t[0]
    f = _ramp(t)
    out = []
    for _ in range(k_max):
        f = np.gradient(f, h)
        out.append(float(np.abs(f[5:-5]).max()))
    return out


_RAMP_CONSTANTS: list[float] | None = None


def ramp_constants() -> list[float]:
    global _RAMP_CONSTANTS
    if _RAMP_CONSTANTS is None:
        _RAMP_CONSTANTS = _ramp_derivative_constants()
    return _RAMP_CONSTANTS


@dataclass(frozen=True)
class SmoothWindow:
    """1 on ``[N - M, N]``, smooth tapers of width ``U`` on each side, 0 beyond."""

    N: float
    M: float
    U: float
    shape: str = field(default="exp(-1/t) smoothstep", init=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        left = _ramp((x - (self.N - self.M - self.U)) / self.U)
        right = _ramp((self.N + self.U - x) / self.U)
        out = np.minimum(left, right)
        return float(out) if out.ndim == 0 else out

    @property
    def support(self) -> tuple[float, float]:
        return self.N - self.M - self.U, self.N + self.U

    def derivative_bounds(self, k_max: int = 4) -> list[float]:
        """``C_k U^{-k}`` for ``k = 1..k_max``."""
        return [c * self.U ** -(k + 1) for k, c in enumerate(ramp_constants()[:k_max])]


def smooth_window(N: float, M: float, U: float) -> SmoothWindow:
    if not 0 < U <= M / 2:
        raise InvalidTaper(f"need 0 < U <= M/2, got U={U}, M={M}")
    return SmoothWindow(float(N), float(M), float(U))


def central_derivative(g: Callable, x: np.ndarray, k: int, h: float) -> np.ndarray:
    """k-th derivative by the symmetric k-th difference with step ``h``."""
    x = np.asarray(x, dtype=np.float64)
    acc = np.zeros_like(x)
    for j in range(k + 1):
        acc += (-1) ** j * math.comb(k, j) * g(x + (k / 2 - j) * h)
    return acc / h ** k


def verify_window_derivatives(w: SmoothWindow, k_max: int = 4, points: int = 100,
                              slack: float = 10.0) -> VerificationReport:
    """Finite-difference ``|g^(k)|`` against ``C_k U^-k`` on both tapers."""
    lo, hi = w.support
    xs = np.concatenate([
        np.linspace(lo, lo + w.U, points // 2 + 2)[1:-1],
        np.linspace(hi - w.U, hi, points - points // 2 + 2)[1:-1],
    ])
    bounds = w.derivative_bounds(k_max)
    h = w.U / 400.0
    worst, where = 0.0, None
    ratios = {}
    for k in range(1, k_max + 1):
        d = np.abs(central_derivative(w, xs, k, h))
        r = float(d.max() / bounds[k - 1])
        ratios[k] = r
        if where is None or r > worst:
            worst, where = r, k
    return VerificationReport(
        check_name="window_derivatives",
        range_tested=f"{xs.size} taper points, k <= {k_max}, U={w.U:g}",
        max_abs_error=max(0.0, worst - 1.0),
        worst_case=where,
        tolerance=slack - 1.0,
        details={"ratio_to_bound": ratios, "shape": w.shape},
    )


@dataclass(frozen=True)
class SmoothedPrimeSum:
    smoothed: float
    sharp: float
    taper_bound: float

    @property
    def difference(self) -> float:
        return self.smoothed - self.sharp


def smoothed_prime_sum(data: SatakeData, N: float, M: float, U: float) -> float:
    """``sum_p (log p) tau(p)^2 g(p)`` for the window ``g`` of ``smooth_window``."""
    return compare_smoothed_sharp(data, N, M, U).smoothed


def compare_smoothed_sharp(data: SatakeData, N: float, M: float, U: float) -> SmoothedPrimeSum:
    """Smoothed sum, sharp sum over ``[N - M, N]``, and the allowed gap.

    The gap is bounded by (primes in the tapers) x max over them of ``(log p) tau(p)^2``.
    """
    w = smooth_window(N, M, U)
    lo, hi = w.support
    if not data.covers(hi):
        raise CoverageExceeded(f"window reaches {hi}, beyond p_max={data.p_max}")
    primes = arith.primes_in_interval(math.ceil(lo), math.floor(hi))
    if primes.size == 0:
        return SmoothedPrimeSum(0.0, 0.0, 0.0)
    weight = np.log(primes.astype(np.float64)) * _tau_squared_at_primes(data, primes)
    g = w(primes.astype(np.float64))
    inner = (primes >= N - M) & (primes <= N)
    taper = ~inner
    bound = float(taper.sum() * weight[taper].max()) if taper.any() else 0.0
    return SmoothedPrimeSum(float(np.sum(weight * g)), float(np.sum(weight[inner])), bound)

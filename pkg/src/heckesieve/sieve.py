"""Lambda-squared sieve weights built on the sym^2 x sym^2 local factors, plus a Linnik-type mollifier.

Notation follows the usual Selberg set-up::

    F_p = F_p(1),  F_p(s) = sum_l tau2x2(p^l) p^{-ls}
    K(r) = prod_{p|r} (F_p - 1)
    G_d(x) = sum_{r <= x, (r, d) = 1} mu(r)^2 K(r)
    lambda_d = mu(d) F_d G_d(R/d) / G_1(R)
    Phi_r(n) = mu((r, n)) / K((r, n))
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from . import arith
from .analytic import rankin_residue
from .dirichlet import CoeffSeries, EulerLocal
from .errors import LowerBoundViolated
from .report import VerificationReport, band_violation
from .satake import SatakeData, realify
from .sympower import SymPowerSpec, rankin_exponents, rankin_local, rankin_series

ROOTS = rankin_exponents(2)
LAMBDA_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LocalSieveData:
    p: int
    F_p: float
    F_p_minus_1: float
    F_p_series: EulerLocal


def _roots(alphas: np.ndarray) -> np.ndarray:
    return np.array([alphas ** e for e in ROOTS])


def _f_minus_one(primes: np.ndarray, alphas: np.ndarray, s: float = 1.0) -> np.ndarray:
    """``F_p(s) - 1`` in closed form, ``expm1(-sum log(1 - beta p^-s))``."""
    x = primes.astype(np.float64) ** (-s)
    logs = -np.log1p(-_roots(alphas) * x).sum(axis=0)
    return np.expm1(realify(logs, what="log F_p"))


def local_sieve_data(data: SatakeData, p: int, deg: int = 40) -> LocalSieveData:
    """``F_p`` for one prime; raises if the ``F_p - 1 >= p^-3`` floor is badly missed."""
    fm1 = float(_f_minus_one(np.array([p]), np.array([data.alpha(p)]))[0])
    if fm1 < 0.5 / p ** 3:
        raise LowerBoundViolated(f"F_{p} - 1 = {fm1!r} < 1/(2 p^3); eigenvalue data corrupt?")
    series = rankin_local(SymPowerSpec(2, data), p, deg)
    return LocalSieveData(p, 1.0 + fm1, fm1, series)


class SieveLocals:
    """Dense tables of ``F_p``, ``mu``, ``K`` on ``1..limit`` for one form."""

    def __init__(self, data: SatakeData, limit: int):
        limit = max(int(limit), 1)
        self.data = data
        self.limit = limit
        self.primes, alphas = data.alphas_upto(limit)
        self.fm1 = _f_minus_one(self.primes, alphas)
        low = self.fm1 < 0.5 / self.primes.astype(np.float64) ** 3
        if low.any():
            p = int(self.primes[np.argmax(low)])
            raise LowerBoundViolated(f"F_{p} - 1 below 1/(2 p^3); eigenvalue data corrupt?")
        self.mu = arith.mobius_upto(limit)
        K = np.ones(limit + 1)
        Fd = np.ones(limit + 1)
        for p, f in zip(self.primes.tolist(), self.fm1.tolist()):
            K[p::p] *= f
            Fd[p::p] *= 1.0 + f
        sq = self.mu != 0
        K[~sq] = 0.0
        Fd[~sq] = 0.0
        K[0] = Fd[0] = 0.0
        self.K = K
        self.F = Fd
        self.mu2K = K  # K already vanishes off the squarefree integers

    def F_p(self, p: int) -> float:
        i = int(np.searchsorted(self.primes, p))
        return 1.0 + float(self.fm1[i])

    def K_of(self, r: int) -> float:
        return float(self.K[r])

    def G(self, d: int, x: float) -> float:
        return big_g(d, x, self)


def big_g(d: int, x: float, locals_: SieveLocals) -> float:
    """``G_d(x) = sum_{r <= x, (r, d) = 1} mu(r)^2 K(r)``."""
    if x < 1:
        raise ValueError("G_d(x) needs x >= 1")
    top = int(math.floor(x + 1e-9))
    if top > locals_.limit:
        raise ValueError(f"x={x} beyond sieve table limit {locals_.limit}")
    r = np.arange(1, top + 1)
    keep = np.gcd(r, d) == 1
    return float(locals_.mu2K[1 : top + 1][keep].sum())


@dataclass(frozen=True, eq=False)
class SieveWeights:
    R: float
    lam: dict[int, float]
    G1: float
    K: dict[int, float]
    locals: SieveLocals = field(repr=False)

    def weight(self, d: int) -> float:
        return self.lam.get(d, 0.0)


def build_weights(data: SatakeData, R: float, locals_: SieveLocals | None = None) -> SieveWeights:
    if R < 1:
        raise ValueError("R must be at least 1")
    top = int(math.floor(R + 1e-9))
    loc = locals_ if locals_ is not None and locals_.limit >= top else SieveLocals(data, top)
    G1 = big_g(1, R, loc)
    lam: dict[int, float] = {}
    K: dict[int, float] = {}
    for d in range(1, top + 1):
        if loc.mu[d] == 0:
            continue
        K[d] = float(loc.K[d])
        lam[d] = float(loc.mu[d]) * float(loc.F[d]) * big_g(d, R / d, loc) / G1
    lam[1] = 1.0  # mu(1) F_1 G_1(R) / G_1(R), pinned against rounding
    return SieveWeights(float(R), lam, G1, K, loc)


def phi_r(r: int, n: int, locals_: SieveLocals) -> float:
    g = math.gcd(r, n)
    return float(locals_.mu[g]) / float(locals_.K[g])


def phi_r_array(r: int, n: np.ndarray, locals_: SieveLocals) -> np.ndarray:
    g = np.gcd(np.asarray(n), r)
    return locals_.mu[g] / locals_.K[g]


def lambda_divisor_sums(weights: SieveWeights, n_max: int) -> np.ndarray:
    """``sum_{d | n} lambda_d`` for ``n = 1..n_max`` (index ``n - 1``)."""
    out = np.zeros(n_max + 1)
    for d, lam in weights.lam.items():
        if d <= n_max and lam != 0.0:
            out[d::d] += lam
    return out[1:]


def verify_lambda_sum(data: SatakeData, R: float, n_max: int,
                      tol: float = LAMBDA_TOL) -> VerificationReport:
    """Divisor sums of ``lambda_d`` against the ``Phi_r`` expansion, ``n <= n_max``."""
    w = build_weights(data, R)
    loc = w.locals
    lhs = lambda_divisor_sums(w, n_max)
    n = np.arange(1, n_max + 1)
    rhs = np.zeros(n_max)
    for r in range(1, int(math.floor(R + 1e-9)) + 1):
        if loc.mu[r] != 0:
            rhs += loc.K[r] * phi_r_array(r, n, loc)
    rhs /= w.G1
    diff = np.abs(lhs - rhs)
    i = int(np.argmax(diff))
    return VerificationReport(
        check_name=f"lambda_sum_R{R:g}",
        range_tested=f"1 <= n <= {n_max}, R={R:g}",
        max_abs_error=float(diff[i]),
        worst_case=i + 1,
        tolerance=tol,
        details={"lambda_1": w.lam[1], "G1": w.G1, "form": data.source_tag},
    )


def bilinear_sum(data: SatakeData, N: int, r1: int, r2: int,
                 tau: CoeffSeries | None = None, locals_: SieveLocals | None = None) -> float:
    """``S(N; r1, r2) = sum_{n <= N} tau2x2(n) Phi_r1(n) Phi_r2(n)``."""
    tau = rankin_series(data, 2, N) if tau is None else tau
    loc = locals_ if locals_ is not None and locals_.limit >= max(r1, r2) else SieveLocals(data, max(r1, r2, 2))
    n = np.arange(1, N + 1)
    return float(np.sum(tau.coeffs[:N] * phi_r_array(r1, n, loc) * phi_r_array(r2, n, loc)))


# -- U_{r1,r2}(s) ----------------------------------------------------------------

@dataclass(frozen=True)
class UCoefficients:
    """Dirichlet coefficients of ``U_{r1,r2}``; the full support is finite."""

    r1: int
    r2: int
    coeffs: dict[int, float]
    value_at_one: float
    truncated_value: float
    d_max: int
    local_polys: dict[int, np.ndarray]

    def weighted_abs_sum(self, sigma: float) -> float:
        """``sum_d |u(d)| d^-sigma`` over the whole support."""
        out = 1.0
        for p, c in self.local_polys.items():
            out *= float(np.sum(np.abs(c) * float(p) ** (-sigma * np.arange(c.size))))
        return out


def _inverse_rankin_poly(alpha: complex) -> np.ndarray:
    """Coefficients of ``F_p(X)^{-1} = prod (1 - beta X)``, degree 9."""
    poly = np.array([1.0 + 0j])
    for e in ROOTS:
        poly = np.convolve(poly, [1.0, -(alpha ** e)])
    return realify(poly, what="inverse Rankin local")


def u_local_poly(data: SatakeData, p: int, both: bool) -> np.ndarray:
    """Local factor of ``U`` at ``p`` as a polynomial in ``X = p^-s``.

    With ``kappa = 1/(F_p - 1)``: dividing exactly one of ``r1, r2`` gives
    ``F_p(X)^{-1} (1 - kappa (F_p(X) - 1)) = (1 + kappa) F_p(X)^{-1} - kappa``;
    dividing both gives ``(1 - kappa^2) F_p(X)^{-1} + kappa^2``.
    """
    fm1 = float(_f_minus_one(np.array([p]), np.array([data.alpha(p)]))[0])
    inv = _inverse_rankin_poly(data.alpha(p))
    kappa = 1.0 / fm1
    if both:
        out = (1.0 - kappa ** 2) * inv
        out[0] += kappa ** 2
    else:
        out = (1.0 + kappa) * inv
        out[0] -= kappa
    return out


def u_coefficients(data: SatakeData, r1: int, r2: int, d_max: int = 10 ** 6) -> UCoefficients:
    if arith.mobius(r1) == 0 or arith.mobius(r2) == 0:
        raise ValueError("r1 and r2 must be squarefree")
    f1, f2 = arith.factorize(r1), arith.factorize(r2)
    ps = sorted(set(f1) | set(f2))
    polys = {p: u_local_poly(data, p, p in f1 and p in f2) for p in ps}
    terms: dict[int, float] = {1: 1.0}
    for p, c in polys.items():
        nxt: dict[int, float] = {}
        for d, v in terms.items():
            pk = 1
            for coef in c:
                if coef != 0.0:
                    nxt[d * pk] = nxt.get(d * pk, 0.0) + v * float(coef)
                pk *= p
        terms = nxt
    value = math.fsum(v / d for d, v in terms.items())
    truncated = math.fsum(v / d for d, v in terms.items() if d <= d_max)
    kept = {d: v for d, v in sorted(terms.items()) if d <= d_max}
    return UCoefficients(r1, r2, kept, value, truncated, d_max, polys)


def squarefree_upto(R: int) -> list[int]:
    mu = arith.mobius_upto(R)
    return [r for r in range(1, R + 1) if mu[r] != 0]


def verify_u_at_one(data: SatakeData, R: int, tol: float = 1e-6) -> VerificationReport:
    """``U_{r1,r2}(1) = delta_{r1,r2} / K(r1)`` for squarefree ``r1, r2 <= R``."""
    loc = SieveLocals(data, max(R, 2))
    worst, where = 0.0, (1, 1)
    for r1, r2 in combinations_with_replacement(squarefree_upto(R), 2):
        u = u_coefficients(data, r1, r2)
        target = 1.0 / loc.K[r1] if r1 == r2 else 0.0
        e = abs(u.value_at_one - target)
        if e > worst:
            worst, where = e, (r1, r2)
    return VerificationReport(
        check_name="u_at_one",
        range_tested=f"squarefree r1, r2 <= {R}",
        max_abs_error=worst,
        worst_case=where,
        tolerance=tol,
        details={"form": data.source_tag},
    )


def verify_bilinear_identity(data: SatakeData, N: int, R: int,
                             tau: CoeffSeries | None = None, tol: float = 1e-9) -> VerificationReport:
    """``S(N; r1, r2) = sum_d u(d) A(N/d)`` with ``A(x) = sum_{n <= x} tau2x2(n)``.

    Exact for every finite ``N``; the error is relative to ``sum |u(d)| A(N/d)``.
    """
    tau = rankin_series(data, 2, N) if tau is None else tau
    loc = SieveLocals(data, max(R, 2))
    A = np.concatenate(([0.0], np.cumsum(tau.coeffs[:N])))
    worst, where = 0.0, (1, 1)
    for r1, r2 in combinations_with_replacement(squarefree_upto(R), 2):
        direct = bilinear_sum(data, N, r1, r2, tau, loc)
        u = u_coefficients(data, r1, r2, d_max=N)
        via_u = math.fsum(v * A[N // d] for d, v in u.coeffs.items())
        scale = math.fsum(abs(v) * A[N // d] for d, v in u.coeffs.items())
        e = abs(direct - via_u) / max(scale, 1.0)
        if e > worst:
            worst, where = e, (r1, r2)
    return VerificationReport(
        check_name="bilinear_identity",
        range_tested=f"N={N}, squarefree r1, r2 <= {R}",
        max_abs_error=worst,
        worst_case=where,
        tolerance=tol,
        details={"form": data.source_tag},
    )


def calibrate_u_bound(data: SatakeData, R: int, sigma: float = 5 / 6) -> dict:
    """Smallest ``c`` with ``sum |u(d)| d^-sigma <= c^nu(r1 r2) (r1 r2)^3`` over pairs ``<= R``."""
    c_needed = 0.0
    worst = None
    for r1, r2 in combinations_with_replacement(squarefree_upto(R), 2):
        m = r1 * r2
        nu = len(arith.factorize(m)) if m > 1 else 0
        lhs = u_coefficients(data, r1, r2).weighted_abs_sum(sigma)
        if nu == 0:
            continue
        c = (lhs / m ** 3) ** (1.0 / nu)
        if c > c_needed:
            c_needed, worst = c, (r1, r2)
    return {"c": c_needed, "attained_at": worst}


def verify_diagonal_behavior(data: SatakeData, N: int, R: int,
                             tau: CoeffSeries | None = None,
                             diag_band: tuple[float, float] = (0.8, 1.2),
                             off_limit: float = 0.2) -> VerificationReport:
    """Near-orthogonality of ``Phi_r`` under the Rankin weight.

    Diagonal: ``S(N; r, r) K(r) / (L L N)`` must sit in ``diag_band``.
    Off-diagonal: ``|S(N; r1, r2)| / N <= off_limit``.
    """
    tau = rankin_series(data, 2, N) if tau is None else tau
    loc = SieveLocals(data, max(R, 2))
    LL, _ = rankin_residue(data)
    n = np.arange(1, N + 1)
    rs = squarefree_upto(R)
    phis = {r: phi_r_array(r, n, loc) for r in rs}
    coeffs = tau.coeffs[:N]
    diag, off, weighted = {}, {}, {}
    err, where = 0.0, None
    for r1, r2 in combinations_with_replacement(rs, 2):
        S = float(np.sum(coeffs * phis[r1] * phis[r2]))
        if r1 == r2:
            ratio = S * loc.K[r1] / (LL * N)
            diag[r1] = ratio
            e = band_violation(ratio, *diag_band)
        else:
            ratio = abs(S) / N
            off[(r1, r2)] = ratio
            weighted[(r1, r2)] = ratio * math.sqrt(loc.K[r1] * loc.K[r2]) / LL
            e = max(0.0, ratio - off_limit)
        if where is None or e > err:
            err, where = e, (r1, r2)
    return VerificationReport(
        check_name="diagonal",
        range_tested=f"N={N}, squarefree r <= {R}",
        max_abs_error=err,
        worst_case=where,
        tolerance=0.0,
        details={
            "L2_L4": LL,
            "diagonal_ratios": diag,
            "offdiagonal_abs_S_over_N": {f"{a},{b}": v for (a, b), v in off.items()},
            # diagnostic only: the same sums in the sqrt(K(r1) K(r2)) normalisation of the large sieve
            "offdiagonal_K_weighted": {f"{a},{b}": v for (a, b), v in weighted.items()},
            "K": {r: float(loc.K[r]) for r in rs},
            "u_bound": calibrate_u_bound(data, R),
        },
    )


def verify_g1_asymptotic(data: SatakeData, R_list: Sequence[float],
                         band: tuple[float, float] = (1 / 3, 3.0),
                         spread: float = 2.0, min_R: float = 3.0,
                         main: float | None = None) -> VerificationReport:
    """``G_1(R) / (L L log R)`` in a fixed band and slowly varying.

    Values of ``R < min_R`` are reported but kept out of the band test.
    """
    top = int(max(R_list))
    loc = SieveLocals(data, max(top, 2))
    LL = rankin_residue(data)[0] if main is None else main
    ratios: dict[float, float] = {}
    g1: dict[float, float] = {}
    for R in R_list:
        g1[R] = big_g(1, R, loc)
        ratios[R] = g1[R] / (LL * math.log(R)) if R > 1 else float("inf")
    tested = [ratios[R] for R in R_list if R >= min_R]
    err, where = 0.0, None
    for R in R_list:
        if R >= min_R:
            e = band_violation(ratios[R], *band)
            if where is None or e > err:
                err, where = e, R
    if tested:
        ratio_spread = max(tested) / min(tested)
        if ratio_spread - spread > err:
            err, where = ratio_spread - spread, "spread"
    else:
        ratio_spread = float("nan")
    return VerificationReport(
        check_name="g1_asymptotic",
        range_tested=f"R in {list(R_list)}",
        max_abs_error=err,
        worst_case=where,
        tolerance=0.0,
        details={"ratios": ratios, "G1": g1, "L2_L4": LL, "max_over_min": ratio_spread,
                 "L2_L4_positive": LL > 0},
    )


def verify_lower_bound(data: SatakeData, p_limit: int) -> VerificationReport:
    """``F_p - 1 >= p^-3`` for every ``p <= p_limit``."""
    primes, alphas = data.alphas_upto(p_limit)
    fm1 = _f_minus_one(primes, alphas)
    margin = fm1 * primes.astype(np.float64) ** 3
    i = int(np.argmin(margin)) if margin.size else 0
    worst = float(margin[i]) if margin.size else math.inf
    return VerificationReport(
        check_name="lower_bound_3_4",
        range_tested=f"p <= {p_limit}",
        max_abs_error=max(0.0, 1.0 - worst),
        worst_case=int(primes[i]) if margin.size else None,
        tolerance=0.0,
        details={"min_p3_times_Fp_minus_1": worst, "form": data.source_tag},
    )


# -- mollifier ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Mollifier:
    v: float
    theta: float
    l: int
    xi: np.ndarray  # xi[d] for d = 0..support, xi[0] unused

    @property
    def support(self) -> int:
        return int(self.xi.size - 1)

    def __getitem__(self, d: int) -> float:
        return float(self.xi[d]) if 1 <= d <= self.support else 0.0


def _floor_power(v: float, e: float) -> int:
    return int(math.floor(math.exp(e * math.log(v)) + 1e-9))


def build_mollifier(v: float, theta: float, l: int) -> Mollifier:
    """Smoothed Moebius truncation; equals ``mu(d)`` for ``d <= v``."""
    if v < 3 or theta <= 0 or not 0 <= l <= 3:
        raise ValueError("need v >= 3, theta > 0, 0 <= l <= 3")
    top = _floor_power(v, 1 + l * theta)
    mu = arith.mobius_upto(top).astype(np.float64)
    logd = np.log(np.arange(1, top + 1, dtype=np.float64))
    logv = math.log(v)
    acc = np.zeros(top)
    for j in range(l + 1):
        cut = _floor_power(v, 1 + j * theta)
        part = np.zeros(top)
        part[:cut] = ((1 + j * theta) * logv - logd[:cut]) ** l
        acc += (-1) ** (l - j) * math.comb(l, j) * part
    xi = np.concatenate(([0.0], mu[1:] * acc / (math.factorial(l) * (theta * logv) ** l)))
    return Mollifier(float(v), float(theta), int(l), xi)


def mollifier_divisor_sums(m: Mollifier, n_max: int) -> np.ndarray:
    """``sum_{d | n} Xi_d`` for ``n = 0..n_max`` (slot 0 unused)."""
    out = np.zeros(n_max + 1)
    for d in range(1, min(m.support, n_max) + 1):
        x = m.xi[d]
        if x != 0.0:
            out[d::d] += x
    return out


def verify_mollifier_identity(m: Mollifier, tol: float = 1e-12) -> VerificationReport:
    """``Xi_d = mu(d)`` for ``d <= v``."""
    top = min(_floor_power(m.v, 1.0), m.support)
    mu = arith.mobius_upto(top)[1:].astype(np.float64)
    diff = np.abs(m.xi[1 : top + 1] - mu)
    i = int(np.argmax(diff)) if diff.size else 0
    return VerificationReport(
        check_name=f"mollifier_identity_l{m.l}",
        range_tested=f"d <= v={m.v:g}",
        max_abs_error=float(diff[i]) if diff.size else 0.0,
        worst_case=i + 1,
        tolerance=tol,
    )


def verify_mollifier_bound(m: Mollifier, l: int, omega: float, n_max: int,
                           max_increment: float = 0.1) -> VerificationReport:
    """Partial sums of ``sum_n d_l(n) (sum_{d|n} Xi_d)^2 n^-omega`` stabilise.

    Passes when the block ``n_max/10 < n <= n_max`` adds less than
    ``max_increment`` of the total.
    """
    if omega < 1 + 1 / math.log(m.v) - 1e-12:
        raise ValueError("omega must be at least 1 + 1/log v")
    inner = mollifier_divisor_sums(m, n_max)
    if l == 1:
        dl = np.ones(n_max + 1)
    elif l == 2:
        dl = arith.divisor_count_upto(n_max).astype(np.float64)
    else:
        dl = arith.divisor_power_upto(n_max, l)
    n = np.arange(n_max + 1, dtype=np.float64)
    n[0] = 1.0
    terms = dl * inner ** 2 * n ** (-omega)
    terms[0] = 0.0
    partial = np.cumsum(terms)
    total = float(partial[-1])
    last = total - float(partial[n_max // 10])
    v_block = float(partial[min(int(m.v), n_max)])
    frac = last / total if total else 0.0
    checkpoints = {10 ** k: float(partial[10 ** k]) for k in range(1, 8) if 10 ** k <= n_max}
    return VerificationReport(
        check_name=f"mollifier_bound_l{l}",
        range_tested=f"n <= {n_max}, omega={omega:.6g}",
        max_abs_error=max(0.0, frac - max_increment),
        worst_case=n_max,
        tolerance=0.0,
        details={"total": total, "last_decade_fraction": frac,
                 "block_n_le_v": v_block, "partial_sums": checkpoints},
    )

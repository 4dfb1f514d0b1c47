"""Command-line entry point: ``heckesieve {coeffs,verify,prime-sum,surrogate}``.

Exit status: 0 on success, 1 if any selected verification fails, 2 on
configuration or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import analytic, ingest, sieve, sympower
from .dirichlet import CoeffSeries
from .errors import HeckeSieveError
from .report import VerificationReport
from .satake import SatakeData, hecke_series, validate_kim_sarnak

log = logging.getLogger("heckesieve")

SUITES = ("shimura", "rankin", "domination", "chebyshev", "lambda_sum", "diagonal",
          "g1", "mollifier", "kim_sarnak", "lower_bound_3_4")
EXTRA_SUITES = ("mean_value", "composition")
COEFF_COLUMNS = ("n", "tau", "tau_sym2", "tau_sym4", "tau_sym2xsym2")
PRIME_SUM_COLUMNS = ("x", "theta", "y", "sum", "primes", "main_term", "ratio")
REPORT_COLUMNS = ("check_name", "range_tested", "max_abs_error", "worst_case", "tolerance", "passed")


class ConfigError(Exception):
    pass


# bilinear-sum length for the diagonal suite; its trend thresholds are set for this scale
DIAG_N_DEFAULT = 100_000


@dataclass
class RunConfig:
    form_path: Path | None = None
    synth_seed: int | None = None
    synth_profile: str = "unitary"
    n_max: int = 10_000
    R: list[float] = field(default_factory=lambda: [10.0, 30.0, 50.0])
    diag_R: int = 10
    diag_N: int | None = None
    g1_R: list[float] = field(default_factory=lambda: [100.0, 1000.0, 10000.0])
    v: float = 100.0
    vartheta: float = 0.5
    l: int = 1
    omega: float | None = None
    mollifier_nmax: int = 1_000_000
    x: list[float] = field(default_factory=list)
    theta: list[float] = field(default_factory=list)
    p_cutoff: int | None = None
    out: Path | None = None
    cache_dir: Path | None = None
    tolerance: float | None = None
    inject_fault: int | None = None

    def __post_init__(self) -> None:
        if (self.form_path is None) == (self.synth_seed is None):
            raise ConfigError("specify exactly one of --form / --synth")

    def coverage(self) -> int:
        """Largest prime argument any configured computation can touch."""
        need = [self.n_max, self.diag_N or DIAG_N_DEFAULT, int(max(self.R, default=2)), self.diag_R,
                int(max(self.g1_R, default=2)), self.p_cutoff or 0]
        need += [int(math.floor(x)) for x in self.x]
        return max(max(need), 2)


def _float_str(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(rows: Sequence[Sequence], header: Sequence[str], out: Path | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_float_str(v) if isinstance(v, (float, np.floating)) else v for v in row])
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text, encoding="utf-8", newline="")
    return text


def load_form(cfg: RunConfig) -> tuple[SatakeData, float | None]:
    """The configured form and the precision of its a_p values (None for synthetic data)."""
    if cfg.form_path is not None:
        rec = ingest.parse_form_file(cfg.form_path)
        return ingest.satake_from_ap(rec), rec.input_precision
    return ingest.synthesize_form(cfg.synth_seed, cfg.coverage(), cfg.synth_profile), None


def _series(cfg: RunConfig, data: SatakeData, label: str,
            compute: Callable[[], CoeffSeries], n_max: int) -> CoeffSeries:
    cache_dir = cfg.cache_dir if cfg.cache_dir is not None else ingest.default_cache_dir()
    return ingest.cached_series(cache_dir, (data.source_tag, label, n_max), compute)


def cmd_coeffs(cfg: RunConfig, data: SatakeData) -> str:
    n = cfg.n_max
    cols = [
        _series(cfg, data, "tau", lambda: hecke_series(data, n), n),
        _series(cfg, data, "sym2", lambda: sympower.sym_series(data, 2, n), n),
        _series(cfg, data, "sym4", lambda: sympower.sym_series(data, 4, n), n),
        _series(cfg, data, "rankin2", lambda: sympower.rankin_series(data, 2, n), n),
    ]
    rows = [(k + 1, *(float(c.coeffs[k]) for c in cols)) for k in range(n)]
    return _write_csv(rows, COEFF_COLUMNS, cfg.out)


def run_suite(name: str, cfg: RunConfig, data: SatakeData) -> list[VerificationReport]:
    tol = {} if cfg.tolerance is None else {"tol": cfg.tolerance}
    n = cfg.n_max
    if name == "shimura":
        return [sympower.verify_shimura(data, n, **tol)]
    if name == "rankin":
        return [sympower.verify_rankin_factorization(sympower.SymPowerSpec(l, data), n, **tol)
                for l in (1, 2)]
    if name == "domination":
        out = []
        for l in (1, 2):
            rankin = sympower.rankin_series(data, l, n)
            if cfg.inject_fault is not None:
                c = rankin.padded()
                c[cfg.inject_fault] = -1.0
                rankin = CoeffSeries.from_padded(c, rankin.label)
            out.append(sympower.verify_domination(sympower.SymPowerSpec(l, data), n,
                                                  rankin=rankin, **tol))
        return out
    if name == "chebyshev":
        rng = np.random.default_rng(0)
        return [sympower.chebyshev_identity_check(l, sympower.random_unit_circle(rng, 100), **tol)
                for l in (1, 2)]
    if name == "lambda_sum":
        return [sieve.verify_lambda_sum(data, R, n, **tol) for R in cfg.R]
    if name == "diagonal":
        N = cfg.diag_N or max(n, DIAG_N_DEFAULT)
        tau = sympower.rankin_series(data, 2, N)
        return [
            sieve.verify_diagonal_behavior(data, N, cfg.diag_R, tau=tau),
            sieve.verify_u_at_one(data, cfg.diag_R),
            sieve.verify_bilinear_identity(data, N, cfg.diag_R, tau=tau),
        ]
    if name == "g1":
        return [sieve.verify_g1_asymptotic(data, cfg.g1_R)]
    if name == "mollifier":
        m = sieve.build_mollifier(cfg.v, cfg.vartheta, cfg.l)
        omega = cfg.omega if cfg.omega is not None else 1 + 1 / math.log(cfg.v)
        return [sieve.verify_mollifier_identity(m),
                sieve.verify_mollifier_bound(m, cfg.l, omega, cfg.mollifier_nmax)]
    if name == "kim_sarnak":
        return [validate_kim_sarnak(data, n)]
    if name == "lower_bound_3_4":
        return [sieve.verify_lower_bound(data, n)]
    if name == "mean_value":
        Ns = [10 ** k for k in range(3, 12) if 10 ** k <= n] or [n]
        return [analytic.verify_mean_value(data, Ns, cfg.p_cutoff)]
    if name == "composition":
        return [sympower.verify_composition_formula(sympower.SymPowerSpec(l, data), 50, 8, **tol)
                for l in (1, 2)]
    raise ConfigError(f"unknown suite {name!r}")


def cmd_verify(cfg: RunConfig, data: SatakeData, suites: Sequence[str],
               input_precision: float | None = None) -> tuple[str, bool]:
    reports: list[VerificationReport] = []
    for name in suites:
        reports.extend(run_suite(name, cfg, data))
    if input_precision is not None:
        reports = [replace(r, input_precision=input_precision) for r in reports]
    lines = [f"form: {data.source_tag} (p_max={data.p_max})"]
    lines += [r.render() for r in reports]
    ok = all(r.passed for r in reports)
    lines.append(f"overall: {'PASS' if ok else 'FAIL'} ({sum(r.passed for r in reports)}/{len(reports)})")
    if cfg.out is not None:
        rows = [(r.check_name, r.range_tested, float(r.max_abs_error), r.worst_case,
                 float(r.tolerance), r.passed) for r in reports]
        _write_csv(rows, REPORT_COLUMNS, cfg.out)
    return "\n".join(lines) + "\n", ok


def cmd_prime_sum(cfg: RunConfig, data: SatakeData) -> str:
    if not cfg.x or not cfg.theta:
        raise ConfigError("prime-sum needs --x and --theta")
    rows = []
    for x in cfg.x:
        for t in cfg.theta:
            r = analytic.short_interval_prime_sum(data, x, t)
            rows.append((r.x, r.theta, r.y, r.sum_value, r.prime_count, r.main_term, r.ratio))
    return _write_csv(rows, PRIME_SUM_COLUMNS, cfg.out)


# -- argument parsing -------------------------------------------------------------

def _synth(value: str) -> tuple[int, str]:
    seed, _, profile = value.partition(":")
    try:
        return int(seed), profile or "unitary"
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --synth value {value!r}") from None


def _suites(value: str) -> list[str]:
    names = [s.strip() for s in value.split(",") if s.strip()]
    if names == ["all"]:
        return list(SUITES)
    bad = [s for s in names if s not in SUITES + EXTRA_SUITES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown suite(s): {', '.join(bad)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--form", type=Path, help="form file with a_p values")
    src.add_argument("--synth", type=_synth, metavar="SEED[:PROFILE]",
                     help="synthetic Satake data (profile unitary|mixed)")
    common.add_argument("--nmax", type=int, default=10_000)
    common.add_argument("--out", type=Path)
    common.add_argument("--cache-dir", type=Path,
                        help=f"coefficient cache directory (env {ingest.CACHE_ENV})")
    common.add_argument("--tolerance", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="heckesieve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("coeffs", parents=[common], help="emit tau, sym^2, sym^4, sym^2 x sym^2 coefficients")

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", type=_suites, default=list(SUITES),
                   help=f"comma-separated subset of {','.join(SUITES + EXTRA_SUITES)} or 'all'")
    v.add_argument("--R", type=float, nargs="+", default=[10.0, 30.0, 50.0])
    v.add_argument("--diag-R", type=int, default=10)
    v.add_argument("--diag-N", type=int)
    v.add_argument("--g1-R", type=float, nargs="+", default=[100.0, 1000.0, 10000.0])
    v.add_argument("--mollifier-v", type=float, default=100.0)
    v.add_argument("--mollifier-theta", type=float, default=0.5)
    v.add_argument("--mollifier-l", type=int, default=1)
    v.add_argument("--mollifier-omega", type=float)
    v.add_argument("--mollifier-nmax", type=int, default=1_000_000)
    v.add_argument("--p-cutoff", type=int)
    v.add_argument("--inject-fault", type=int, help=argparse.SUPPRESS)

    p = sub.add_parser("prime-sum", parents=[common], help="sum of tau(p)^2 over [x - y, x]")
    p.add_argument("--x", type=float, nargs="+", required=True)
    p.add_argument("--theta", type=float, nargs="+", required=True)

    s = sub.add_parser("surrogate", help="write a synthetic Sato-Tate form file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--pmax", type=int, default=1_000_000)
    s.add_argument("--label", default=None)
    s.add_argument("--out", type=Path, required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    seed, profile = args.synth if args.synth is not None else (None, "unitary")
    kw = dict(form_path=args.form, synth_seed=seed, synth_profile=profile, n_max=args.nmax,
              out=args.out, cache_dir=args.cache_dir, tolerance=args.tolerance)
    if args.command == "verify":
        kw.update(R=args.R, diag_R=args.diag_R, diag_N=args.diag_N, g1_R=args.g1_R,
                  v=args.mollifier_v, vartheta=args.mollifier_theta, l=args.mollifier_l,
                  omega=args.mollifier_omega, mollifier_nmax=args.mollifier_nmax,
                  p_cutoff=args.p_cutoff, inject_fault=args.inject_fault)
    if args.command == "prime-sum":
        kw.update(x=args.x, theta=args.theta)
    return RunConfig(**kw)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "surrogate":
            data = ingest.synthesize_form(args.seed, args.pmax, "unitary")
            label = args.label or f"sato-tate-surrogate-{args.seed}"
            ingest.write_form_file(ingest.record_from_satake(data, label), args.out)
            return 0
        cfg = config_from_args(args)
        if cfg.n_max < 1:
            raise ConfigError("--nmax must be positive")
        data, precision = load_form(cfg)
        if args.command == "coeffs":
            text = cmd_coeffs(cfg, data)
            if cfg.out is None:
                sys.stdout.write(text)
            return 0
        if args.command == "prime-sum":
            text = cmd_prime_sum(cfg, data)
            if cfg.out is None:
                sys.stdout.write(text)
            return 0
        text, ok = cmd_verify(cfg, data, args.suite, precision)
        sys.stdout.write(text)
        return 0 if ok else 1
    except (ConfigError, HeckeSieveError, OSError) as exc:
        print(f"heckesieve: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

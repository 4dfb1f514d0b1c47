"""Form files, synthetic Satake data, and the binary coefficient cache.

Form file (plain text)::

    # comments and blank lines are ignored
    label <string>
    nu <decimal>
    2 <a_2>
    3 <a_3>
    ...

Cache file: a fixed little-endian header followed by ``count`` float64 values::

    magic   4s   b"HSCS"
    version u16
    3 x (u16 length + utf-8 bytes): form label, series label, n_max as text
    count   u64
    sha256  32s  digest of the payload bytes
"""

from __future__ import annotations

import decimal
import hashlib
import logging
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import arith
from .dirichlet import CoeffSeries
from .errors import BoundError, ChecksumMismatch, GapError, KeyMismatch, ParseError
from .satake import KIM_SARNAK, UNIT_TOL, SatakeData

log = logging.getLogger(__name__)

SNAP_TOL = 1e-6
BOUND_TOL = 1e-9
CACHE_MAGIC = b"HSCS"
CACHE_VERSION = 1
CACHE_ENV = "HECKESIEVE_CACHE_DIR"
DEFAULT_NU = 9.5336952613535575  # spectral parameter of the first level-one Maass form


@dataclass
class FormRecord:
    label: str
    nu_abs: float
    ap_values: list[tuple[int, float]] = field(default_factory=list)
    # half a unit in the last printed decimal of the coarsest a_p; None when unknown
    input_precision: float | None = field(default=None, compare=False)

    @property
    def p_max(self) -> int | None:
        return self.ap_values[-1][0] if self.ap_values else None

    def require_coverage(self, p_max: int) -> None:
        """Raise GapError unless every prime ``<= p_max`` carries an ``a_p``."""
        have = {p for p, _ in self.ap_values}
        missing = [int(p) for p in arith.primes_upto(p_max) if int(p) not in have]
        if missing:
            raise GapError(missing)

    def validate(self) -> None:
        prev = 0
        for p, _ in self.ap_values:
            if p <= prev:
                raise ParseError(f"primes not strictly increasing at p={p}")
            prev = p
        if self.ap_values:
            expected = arith.primes_upto(self.p_max)
            got = np.array([p for p, _ in self.ap_values], dtype=np.int64)
            if not np.array_equal(expected, got):
                have = set(got.tolist())
                extra = [int(p) for p in got if not arith.is_prime(int(p))]
                if extra:
                    raise ParseError(f"non-prime index {extra[0]}")
                raise GapError([int(q) for q in expected if int(q) not in have])
        for p, a in self.ap_values:
            if abs(a) > 2.0 * p ** KIM_SARNAK + BOUND_TOL:
                raise BoundError(p, a)


def parse_form_file(path: str | os.PathLike, p_max: int | None = None) -> FormRecord:
    """Read and validate a form file; optionally demand coverage up to ``p_max``."""
    label = None
    nu = None
    pairs: list[tuple[int, float]] = []
    precision = 0.0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if label is None:
                if parts[0] != "label" or len(parts) < 2:
                    raise ParseError("expected 'label <string>'", lineno)
                label = line.split(None, 1)[1]
                continue
            if nu is None:
                if parts[0] != "nu" or len(parts) != 2:
                    raise ParseError("expected 'nu <decimal>'", lineno)
                try:
                    nu = float(parts[1])
                except ValueError:
                    raise ParseError(f"bad spectral parameter {parts[1]!r}", lineno) from None
                continue
            if len(parts) != 2:
                raise ParseError("expected '<prime> <a_p>'", lineno)
            try:
                p, a = int(parts[0]), float(parts[1])
            except ValueError:
                raise ParseError(f"cannot read pair {line!r}", lineno) from None
            if pairs and p <= pairs[-1][0]:
                raise ParseError(f"primes not strictly increasing at p={p}", lineno)
            if not math.isfinite(a):
                raise ParseError(f"non-finite a_p at p={p}", lineno)
            pairs.append((p, a))
            precision = max(precision, _half_ulp(parts[1]))
    if label is None or nu is None:
        raise ParseError("missing 'label' / 'nu' header lines")
    rec = FormRecord(label, abs(nu), pairs, precision if pairs else None)
    rec.validate()
    if p_max is not None:
        rec.require_coverage(p_max)
    return rec


def _half_ulp(text: str) -> float:
    """Half a unit in the last place of a decimal literal, e.g. ``0.25`` -> ``0.005``."""
    try:
        exp = decimal.Decimal(text).as_tuple().exponent
    except decimal.InvalidOperation:
        return 0.0
    return 0.5 * 10.0 ** exp if isinstance(exp, int) else 0.0


def write_form_file(rec: FormRecord, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"label {rec.label}\n")
        fh.write(f"nu {rec.nu_abs!r}\n")
        for p, a in rec.ap_values:
            fh.write(f"{p} {float(a)!r}\n")


def alpha_from_ap(p: int, a: float) -> complex:
    """Root of ``X^2 - a X + 1`` (the other root is its inverse)."""
    if abs(a) <= 2.0:
        return complex(a / 2.0, math.sqrt(max(0.0, 4.0 - a * a)) / 2.0)
    if abs(a) <= 2.0 + SNAP_TOL:
        log.warning("a_%d = %r snapped to the unitary boundary", p, a)
        return complex(math.copysign(1.0, a), 0.0)
    root = (abs(a) + math.sqrt(a * a - 4.0)) / 2.0
    if root > p ** KIM_SARNAK * (1.0 + UNIT_TOL):
        raise BoundError(p, a, f"a_{p}={a!r} forces |alpha|={root:.6g} > p^(7/64)")
    return complex(math.copysign(root, a), 0.0)


def satake_from_ap(rec: FormRecord) -> SatakeData:
    primes = np.array([p for p, _ in rec.ap_values], dtype=np.int64)
    alphas = np.array([alpha_from_ap(p, a) for p, a in rec.ap_values], dtype=np.complex128)
    return SatakeData(rec.nu_abs, primes, alphas, f"dataset:{rec.label}")


def record_from_satake(data: SatakeData, label: str) -> FormRecord:
    ap = (data.alphas + 1.0 / data.alphas).real
    return FormRecord(label, data.nu_abs, list(zip(data.primes.tolist(), ap.tolist())))


def sato_tate_angles(rng: np.random.Generator, k: int) -> np.ndarray:
    """Angles in ``[0, pi]`` with density ``(2/pi) sin^2``.

    Uses the trace of a Haar-random SU(2) element: the first coordinate of a
    uniform point on the 3-sphere is ``cos(angle)``.
    """
    g = rng.standard_normal((k, 4))
    x0 = g[:, 0] / np.linalg.norm(g, axis=1)
    return np.arccos(np.clip(x0, -1.0, 1.0))


def synthesize_form(seed: int, p_max: int, profile: str = "unitary",
                    nu_abs: float = DEFAULT_NU, mixed_rate: float = 0.05) -> SatakeData:
    """Deterministic synthetic Satake data obeying the local bound.

    ``unitary``: Sato-Tate distributed angles on the unit circle.
    ``mixed``: as unitary, except a fraction ``mixed_rate`` of primes get a real
    parameter in ``[1 + 0.1 (p^(7/64) - 1), p^(7/64)]`` with random sign.
    """
    if p_max < 2:
        raise ValueError("p_max must be at least 2")
    if profile not in ("unitary", "mixed"):
        raise ValueError(f"unknown profile {profile!r}")
    rng = np.random.default_rng(seed)
    primes = arith.primes_upto(p_max)
    alphas = np.exp(1j * sato_tate_angles(rng, primes.size))
    if profile == "mixed":
        pick = rng.random(primes.size) < mixed_rate
        top = primes.astype(np.float64) ** KIM_SARNAK
        u = rng.uniform(0.1, 1.0, primes.size)
        sign = np.where(rng.random(primes.size) < 0.5, -1.0, 1.0)
        real = sign * (1.0 + u * (top - 1.0))
        alphas = np.where(pick, real + 0j, alphas)
    return SatakeData(nu_abs, primes, alphas, f"synthetic:{seed}:{profile}")


# -- coefficient cache ---------------------------------------------------------

CacheKey = tuple[str, str, int]


def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("<H", len(b)) + b


def cache_series(series: CoeffSeries, path: str | os.PathLike, form_label: str) -> Path:
    """Write ``series`` to ``path`` under the key ``(form_label, series.label, n_max)``."""
    payload = np.ascontiguousarray(series.coeffs, dtype="<f8").tobytes()
    header = bytearray(CACHE_MAGIC)
    header += struct.pack("<H", CACHE_VERSION)
    for part in (form_label, series.label, str(series.n_max)):
        header += _pack_str(part)
    header += struct.pack("<Q", series.n_max)
    header += hashlib.sha256(payload).digest()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(bytes(header) + payload)
    os.replace(tmp, path)
    return path


def load_series(path: str | os.PathLike, key: CacheKey | None = None) -> CoeffSeries:
    blob = Path(path).read_bytes()
    if blob[:4] != CACHE_MAGIC:
        raise ChecksumMismatch(f"{path}: not a coefficient cache")
    pos = 4
    (version,) = struct.unpack_from("<H", blob, pos)
    pos += 2
    if version != CACHE_VERSION:
        raise ChecksumMismatch(f"{path}: unsupported cache version {version}")
    parts = []
    for _ in range(3):
        (n,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        parts.append(blob[pos : pos + n].decode("utf-8"))
        pos += n
    (count,) = struct.unpack_from("<Q", blob, pos)
    pos += 8
    digest = blob[pos : pos + 32]
    pos += 32
    payload = blob[pos:]
    if len(payload) != 8 * count or hashlib.sha256(payload).digest() != digest:
        raise ChecksumMismatch(f"{path}: payload does not match its checksum")
    stored: CacheKey = (parts[0], parts[1], int(parts[2]))
    if key is not None and (key[0], key[1], int(key[2])) != stored:
        raise KeyMismatch(f"{path}: cache holds {stored}, requested {tuple(key)}")
    return CoeffSeries(np.frombuffer(payload, dtype="<f8").astype(np.float64), parts[1])


def cache_path(cache_dir: str | os.PathLike, key: CacheKey) -> Path:
    digest = hashlib.sha256("\x00".join(map(str, key)).encode()).hexdigest()[:16]
    safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in f"{key[0]}_{key[1]}")
    return Path(cache_dir) / f"{safe}_{key[2]}_{digest}.hscs"


def default_cache_dir() -> Path | None:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else None


def cached_series(cache_dir: str | os.PathLike | None, key: CacheKey,
                  compute: Callable[[], CoeffSeries]) -> CoeffSeries:
    """Load ``key`` from ``cache_dir`` if present, else compute and store it."""
    if cache_dir is None:
        return compute()
    path = cache_path(cache_dir, key)
    if path.exists():
        try:
            return load_series(path, key)
        except ChecksumMismatch:
            log.warning("discarding corrupt cache %s", path)
    series = compute()
    if series.label != key[1] or series.n_max != int(key[2]):
        series = CoeffSeries(series.coeffs[: int(key[2])], key[1])
    cache_series(series, path, key[0])
    return series

"""Point-set families (GLP, Halton, Faure, Sobol') and plain-text I/O."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import IO, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class PointSet:
    """n points in the half-open unit cube, stored as an (n, d) float array."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64, order="C", copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"point array must have shape (n, d) with n, d >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("point coordinates must be finite")
        if np.any(arr < 0.0) or np.any(arr >= 1.0):
            raise ValueError("point coordinates must lie in [0, 1)")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n


# --------------------------------------------------------------------------
# digit helpers


def first_primes(count: int) -> list[int]:
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def next_prime(m: int) -> int:
    """Smallest prime >= max(m, 2)."""
    c = max(2, m)
    while any(c % p == 0 for p in range(2, math.isqrt(c) + 1)):
        c += 1
    return c


def _digits(i: int, base: int) -> list[int]:
    """Base-b digits of i, least significant first."""
    out = []
    while i > 0:
        i, r = divmod(i, base)
        out.append(r)
    return out


def _reflect(digits: Sequence[int], base: int) -> float:
    """sum_r digits[r] * base**-(r+1), rounded once from an exact integer ratio."""
    num = 0
    for a in digits:
        num = num * base + a
    return num / base ** len(digits) if digits else 0.0


def radical_inverse(i: int, base: int) -> float:
    """Van der Corput radical inverse of the integer ``i`` in ``base``."""
    if i < 0:
        raise ValueError("index must be non-negative")
    return _reflect(_digits(i, base), base)


# --------------------------------------------------------------------------
# generators


def generate_glp(n: int, h: Sequence[int]) -> PointSet:
    """Good lattice point set x^i_j = frac((2 i h_j - 1) / (2n)), i = 1..n."""
    h = [int(v) for v in h]
    if n < 1:
        raise ValueError("n must be >= 1")
    if not h:
        raise ValueError("generating vector must be non-empty")
    if h[0] <= 0 or any(b <= a for a, b in zip(h, h[1:])):
        raise ValueError(f"generating vector must satisfy 0 < h_1 < ... < h_d, got {h}")
    if h[-1] >= n:
        raise ValueError(f"generating vector entries must be < n={n}, got {h}")
    if not any(math.gcd(v, n) == 1 for v in h):
        raise ValueError(f"no component of {h} is coprime with n={n}")
    den = 2 * n
    coords = [[((2 * i * hj - 1) % den) / den for hj in h] for i in range(1, n + 1)]
    return PointSet(np.array(coords))


def generate_halton(n: int, d: int, start_index: int = 1) -> PointSet:
    """Halton points for the integers start_index .. start_index+n-1, bases = first d primes."""
    if n < 1 or d < 1 or start_index < 0:
        raise ValueError("need n >= 1, d >= 1, start_index >= 0")
    bases = first_primes(d)
    coords = [[radical_inverse(start_index + i, b) for b in bases] for i in range(n)]
    return PointSet(np.array(coords))


def faure_base(d: int) -> int:
    return next_prime(d)


def generate_faure(n: int, d: int, skip_origin: bool = True) -> PointSet:
    """Faure points in base ``next_prime(d)``.

    Coordinate j (0-based) multiplies the digit vector of the index by the
    j-th power of the upper-triangular Pascal matrix mod b:
    digit r becomes sum_{s >= r} C(s, r) j^(s-r) a_s mod b.
    With ``skip_origin`` the indices run 1..n, otherwise 0..n-1.
    """
    if n < 1 or d < 2:
        raise ValueError("need n >= 1, d >= 2")
    b = faure_base(d)
    first = 1 if skip_origin else 0
    coords = np.empty((n, d))
    for row, idx in enumerate(range(first, first + n)):
        a = _digits(idx, b)
        K = len(a)
        for j in range(d):
            y = [
                sum(math.comb(s, r) * j ** (s - r) * a[s] for s in range(r, K)) % b
                for r in range(K)
            ]
            coords[row, j] = _reflect(y, b)
    return PointSet(coords)


# --------------------------------------------------------------------------
# Sobol' direction numbers (Joe-Kuo text format)


class DirectionFileError(ValueError):
    pass


@dataclass(frozen=True)
class SobolDirection:
    dim: int
    s: int
    a: int
    m: tuple[int, ...]


@dataclass(frozen=True)
class DirectionTable:
    """Direction data for dimensions 2..max_dimension; dimension 1 needs none."""

    entries: tuple[SobolDirection, ...] = ()

    @property
    def max_dimension(self) -> int:
        return self.entries[-1].dim if self.entries else 1


def parse_sobol_directions(stream: IO[str] | Iterable[str]) -> DirectionTable:
    """Parse rows ``d s a m_1 .. m_s``; the first non-blank line is a header."""
    entries: list[SobolDirection] = []
    header_seen = False
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if not header_seen:
            header_seen = True
            continue
        fields = line.split()
        try:
            vals = [int(f) for f in fields]
        except ValueError:
            raise DirectionFileError(f"line {lineno}: non-integer field in {line!r}") from None
        if len(vals) < 4:
            raise DirectionFileError(f"line {lineno}: expected 'd s a m_1 .. m_s', got {line!r}")
        dim, s, a, m = vals[0], vals[1], vals[2], tuple(vals[3:])
        expected = entries[-1].dim + 1 if entries else 2
        if dim != expected:
            raise DirectionFileError(f"line {lineno}: expected dimension {expected}, got {dim}")
        if s < 1 or len(m) != s:
            raise DirectionFileError(f"line {lineno}: degree {s} but {len(m)} direction numbers")
        if not 0 <= a < 2 ** max(s - 1, 0):
            raise DirectionFileError(f"line {lineno}: coefficient a={a} out of range for s={s}")
        for k, mk in enumerate(m, start=1):
            if mk % 2 == 0 or mk < 1:
                raise DirectionFileError(f"line {lineno}: m_{k}={mk} must be a positive odd integer")
            if mk >= 2**k:
                raise DirectionFileError(f"line {lineno}: m_{k}={mk} must be < 2^{k}")
        entries.append(SobolDirection(dim, s, a, m))
    return DirectionTable(tuple(entries))


def load_sobol_directions(path: str | os.PathLike | None = None) -> DirectionTable:
    """Load a Joe-Kuo file; without a path, the bundled 1000-dimension table."""
    if path is None:
        ref = resources.files("stardisc") / "data" / "new-joe-kuo-6.1000.txt"
        with ref.open("r", encoding="utf-8") as fh:
            return parse_sobol_directions(fh)
    with open(path, encoding="utf-8") as fh:
        return parse_sobol_directions(fh)


SOBOL_BITS = 32


def _direction_integers(entry: SobolDirection | None, bits: int) -> list[int]:
    """v_k * 2^bits for k = 1..bits."""
    if entry is None:
        return [1 << (bits - k) for k in range(1, bits + 1)]
    s, a = entry.s, entry.a
    m = list(entry.m)
    for k in range(s, bits):
        new = m[k - s] ^ (m[k - s] << s)
        for r in range(1, s):
            if (a >> (s - 1 - r)) & 1:
                new ^= m[k - r] << r
        m.append(new)
    return [m[k - 1] << (bits - k) for k in range(1, bits + 1)]


def generate_sobol(
    n: int,
    d: int,
    table: DirectionTable | None = None,
    skip: int = 0,
    order: str = "gray",
) -> PointSet:
    """Sobol' points with indices skip .. skip+n-1.

    ``order="gray"`` follows the Joe-Kuo reference code (Gray-code ordering,
    index 0 is the origin); ``order="natural"`` uses the binary digits of the
    index directly, so dimension 1 is the base-2 van der Corput sequence.
    """
    if n < 1 or d < 1 or skip < 0:
        raise ValueError("need n >= 1, d >= 1, skip >= 0")
    if order not in ("gray", "natural"):
        raise ValueError(f"unknown order {order!r}")
    if table is None:
        table = load_sobol_directions()
    if d > table.max_dimension:
        raise ValueError(f"direction table covers {table.max_dimension} dimensions, {d} requested")
    if skip + n > 2**SOBOL_BITS:
        raise ValueError("too many points for 32-bit direction numbers")
    V = [_direction_integers(None, SOBOL_BITS)]
    V += [_direction_integers(e, SOBOL_BITS) for e in table.entries[: d - 1]]
    scale = float(2**SOBOL_BITS)
    coords = np.empty((n, d))
    for row, idx in enumerate(range(skip, skip + n)):
        code = idx ^ (idx >> 1) if order == "gray" else idx
        for j in range(d):
            x = 0
            c, k = code, 0
            while c:
                if c & 1:
                    x ^= V[j][k]
                c >>= 1
                k += 1
            coords[row, j] = x / scale
    return PointSet(coords)


# --------------------------------------------------------------------------
# point-set files


def write_pointset(points: PointSet, dest: str | os.PathLike | IO[str], comment: str | None = None) -> None:
    """Write one point per line, coordinates at 17 significant digits."""
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.extend(" ".join(format(v, ".17g") for v in row) for row in points.coords)
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_pointset(src: str | os.PathLike | IO[str]) -> PointSet:
    if hasattr(src, "read"):
        text = src.read()
    else:
        with open(src, encoding="utf-8") as fh:
            text = fh.read()
    rows: list[list[float]] = []
    d = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            row = [float(f) for f in line.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {line!r}") from None
        if d is None:
            d = len(row)
        elif len(row) != d:
            raise ValueError(f"line {lineno}: expected {d} coordinates, got {len(row)}")
        for v in row:
            if not 0.0 <= v < 1.0:
                raise ValueError(f"line {lineno}: coordinate {v!r} outside [0, 1)")
        rows.append(row)
    if not rows:
        raise ValueError("point-set file contains no points")
    return PointSet(np.array(rows))

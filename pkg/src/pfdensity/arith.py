"""Exact integer and rational number theory used throughout the package.

Factorizations are the backbone: every arithmetic function, and every
quantity attached to the astronomically large auxiliary moduli, is computed
from prime exponents rather than from the integer itself.
"""

from __future__ import annotations

import json
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from mpmath import iv

from .intervals import certified_floor, log_floor

DEFAULT_SIEVE_CAP = 10**8
SEGMENT = 10**7


class SieveBudgetError(MemoryError):
    pass


@dataclass(frozen=True)
class Factorization:
    """A positive integer as ``((p1, e1), (p2, e2), ...)`` with p1 < p2 < ...

    >>> Factorization.of(12).pairs
    ((2, 2), (3, 1))
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple((int(p), int(e)) for p, e in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        last = 1
        for p, e in pairs:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization {pairs}")
            last = p

    @classmethod
    def of(cls, n: int) -> "Factorization":
        return factorize(n)

    @classmethod
    def from_exponents(cls, exps: dict[int, int]) -> "Factorization":
        return cls(tuple(sorted((p, e) for p, e in exps.items() if e > 0)))

    @classmethod
    def from_json(cls, data: str | list) -> "Factorization":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple((p, e) for p, e in data))

    def to_json(self) -> list[list[int]]:
        return [[p, e] for p, e in self.pairs]

    @cached_property
    def value(self) -> int:
        return math.prod(p**e for p, e in self.pairs)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    def exponents(self) -> dict[int, int]:
        return dict(self.pairs)

    def valuation(self, p: int) -> int:
        return self.exponents().get(p, 0)

    def num_divisors(self) -> int:
        return math.prod(e + 1 for _, e in self.pairs)

    def divides(self, m: int) -> bool:
        """True if the integer ``m`` divides the represented number."""
        if m < 1:
            return False
        exps = self.exponents()
        return all(exps.get(p, 0) >= e for p, e in factorize(m).pairs)

    def divisors(self) -> list[int]:
        """All divisors in ascending order."""
        divs = [1]
        for p, e in self.pairs:
            divs = [d * p**i for d in divs for i in range(e + 1)]
        return sorted(divs)

    def unitary_divisors(self) -> list[int]:
        parts = [(1, p**e) for p, e in self.pairs]
        return sorted(math.prod(c) for c in product(*parts))

    def __mul__(self, other: "Factorization") -> "Factorization":
        exps = self.exponents()
        for p, e in other.pairs:
            exps[p] = exps.get(p, 0) + e
        return Factorization.from_exponents(exps)

    def __pow__(self, k: int) -> "Factorization":
        if k == 0:
            return Factorization()
        return Factorization(tuple((p, e * k) for p, e in self.pairs))

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        if not self.pairs:
            return "1"
        return "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.pairs)


def factorize(n: int) -> Factorization:
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    pairs = []
    for d in (2, 3):
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            pairs.append((d, e))
    d, step = 5, 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            pairs.append((d, e))
        d += step
        step = 6 - step
    if n > 1:
        pairs.append((n, 1))
    return Factorization(tuple(pairs))


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n).pairs == ((n, 1),)


class ArithmeticFunctions(NamedTuple):
    phi: int
    sigma: int
    rad: int
    omega: int
    big_omega: int


def arithmetic_functions(f: Factorization | int) -> ArithmeticFunctions:
    if isinstance(f, int):
        f = factorize(f)
    phi = math.prod(p ** (e - 1) * (p - 1) for p, e in f.pairs)
    sigma = math.prod((p ** (e + 1) - 1) // (p - 1) for p, e in f.pairs)
    rad = math.prod(f.primes)
    return ArithmeticFunctions(phi, sigma, rad, len(f.pairs), sum(e for _, e in f.pairs))


def big_omega(n: int) -> int:
    return sum(e for _, e in factorize(n).pairs)


def phi_ratio(f: Factorization) -> Fraction:
    """phi(N)/N from the primes of N alone."""
    r = Fraction(1)
    for p in f.primes:
        r *= Fraction(p - 1, p)
    return r


def sigma_ratio(f: Factorization) -> Fraction:
    """sigma(N)/N, computed per prime power so N itself is never formed."""
    r = Fraction(1)
    for p, e in f.pairs:
        r *= Fraction(p ** (e + 1) - 1, (p - 1) * p**e)
    return r


def unitary_reciprocal_sum(f: Factorization) -> Fraction:
    """Sum of 1/b over unitary divisors b > 1 of N."""
    r = Fraction(1)
    for p, e in f.pairs:
        r *= 1 + Fraction(1, p**e)
    return r - 1


def primes_upto(x: int) -> np.ndarray:
    """Primes <= x as an int64 array (Eratosthenes)."""
    if x < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(x + 1, dtype=bool)
    mask[:2] = False
    mask[4::2] = False
    for p in range(3, math.isqrt(x) + 1, 2):
        if mask[p]:
            mask[p * p :: 2 * p] = False
    return np.flatnonzero(mask).astype(np.int64)


def prime_pi(x: int) -> int:
    if x < 1:
        raise ValueError("prime_pi needs x >= 1")
    return int(primes_upto(x).size)


def lcm_upto(x: int) -> Factorization:
    """lcm(1, ..., x): each prime p <= x at exponent floor(log_p x)."""
    if x < 1:
        raise ValueError("lcm_upto needs x >= 1")
    pairs = []
    for p in primes_upto(x).tolist():
        e, q = 0, 1
        while q * p <= x:
            q *= p
            e += 1
        pairs.append((p, e))
    return Factorization(tuple(pairs))


class AuxiliaryModulus(NamedTuple):
    X: int
    N: Factorization


def auxiliary_modulus(n: int) -> AuxiliaryModulus:
    """X = floor(log n) and N = (n * prod_{p <= X} p)^X, as a factorization.

    At X = 0 (n = 1, 2) N is the empty product 1.
    """
    if n < 1:
        raise ValueError("auxiliary_modulus needs n >= 1")
    X = log_floor(n)
    exps = factorize(n).exponents()
    for p in primes_upto(X).tolist():
        exps[p] = exps.get(p, 0) + 1
    return AuxiliaryModulus(X, Factorization.from_exponents(exps) ** X)


def critical_k(X: int) -> int:
    """floor((e/4) log log X), decided by interval arithmetic."""
    if X < 3:
        raise ValueError("critical_k needs X >= 3")
    return certified_floor(lambda: iv.e / 4 * iv.log(iv.log(iv.mpf(X))))


# --- Omega sieve -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OmegaSieve:
    """Big-Omega for every m <= limit (entries 0 and 1 hold 0)."""

    limit: int
    table: np.ndarray = field(repr=False)

    def __getitem__(self, m: int) -> int:
        return int(self.table[m])

    def level(self, k: int, lo: int = 2) -> np.ndarray:
        """All m in [lo, limit] with Omega(m) = k, ascending."""
        lo = max(lo, 2)
        return np.flatnonzero(self.table[lo:] == k).astype(np.int64) + lo


def _omega_segment(lo: int, hi: int, small_primes: Sequence[int]) -> np.ndarray:
    rem = np.arange(lo, hi, dtype=np.int64)
    om = np.zeros(hi - lo, dtype=np.uint8)
    for p in small_primes:
        pk = p
        while pk < hi:
            start = (-lo) % pk
            om[start::pk] += 1
            rem[start::pk] //= p
            pk *= p
    # at most one prime above sqrt(limit) survives
    om += (rem > 1).astype(np.uint8)
    return om


def omega_sieve(
    X: int, cap: int = DEFAULT_SIEVE_CAP, workers: int = 1, segment: int = SEGMENT
) -> OmegaSieve:
    """Segmented sieve for Big-Omega on [0, X].

    Each segment divides out prime powers p^a with p <= sqrt(X); a leftover
    cofactor > 1 is a single large prime.
    """
    if X < 2:
        raise ValueError("omega_sieve needs X >= 2")
    if X > cap:
        raise SieveBudgetError(f"X={X} exceeds sieve cap {cap}")
    small = primes_upto(math.isqrt(X)).tolist()
    bounds = [(lo, min(lo + segment, X + 1)) for lo in range(0, X + 1, segment)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _omega_segment(b[0], b[1], small), bounds))
    else:
        parts = [_omega_segment(lo, hi, small) for lo, hi in bounds]
    table = np.concatenate(parts)
    table[:2] = 0
    table.setflags(write=False)
    return OmegaSieve(X, table)


_CACHE_MAGIC = b"PFDOMEGA"
_CACHE_VERSION = 1
_CACHE_HEADER = struct.Struct("<8sHQ")


def save_sieve(sieve: OmegaSieve, path: str | os.PathLike) -> None:
    """Binary layout: magic, u16 version, u64 limit, then one byte per entry."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_HEADER.pack(_CACHE_MAGIC, _CACHE_VERSION, sieve.limit))
        fh.write(np.ascontiguousarray(sieve.table, dtype=np.uint8).tobytes())


def load_sieve(path: str | os.PathLike) -> OmegaSieve:
    with open(path, "rb") as fh:
        magic, version, limit = _CACHE_HEADER.unpack(fh.read(_CACHE_HEADER.size))
        if magic != _CACHE_MAGIC or version != _CACHE_VERSION:
            raise ValueError(f"{path}: not a version-{_CACHE_VERSION} omega sieve file")
        table = np.frombuffer(fh.read(), dtype=np.uint8)
    if table.size != limit + 1:
        raise ValueError(f"{path}: truncated sieve ({table.size} of {limit + 1} entries)")
    return OmegaSieve(limit, table)


def cached_omega_sieve(X: int, cache_dir: str | None = None, **kwargs) -> OmegaSieve:
    """omega_sieve(X), reusing ``$PFD_CACHE_DIR/omega_<X>.bin`` when present."""
    cache_dir = cache_dir or os.environ.get("PFD_CACHE_DIR")
    if not cache_dir:
        return omega_sieve(X, **kwargs)
    path = os.path.join(cache_dir, f"omega_{X}.bin")
    if os.path.exists(path):
        return load_sieve(path)
    sieve = omega_sieve(X, **kwargs)
    os.makedirs(cache_dir, exist_ok=True)
    save_sieve(sieve, path)
    return sieve


# --- reciprocal sums ---------------------------------------------------------


def _split_sum(dens: Sequence[int]) -> tuple[int, int]:
    """Sum of 1/d as an unreduced (num, den) by binary splitting."""
    if len(dens) == 1:
        return 1, dens[0]
    mid = len(dens) // 2
    a, b = _split_sum(dens[:mid])
    c, d = _split_sum(dens[mid:])
    return a * d + b * c, b * d


def reciprocal_sum(dens: Iterable[int]) -> Fraction:
    dens = [int(d) for d in dens]
    if not dens:
        return Fraction(0)
    return Fraction(*_split_sum(dens))


class ReciprocalSums(NamedTuple):
    S: Fraction
    Q: Fraction


def restricted_reciprocal_sums(sieve: OmegaSieve, k: int) -> ReciprocalSums:
    """Exact sums of 1/m and 1/m^2 over 2 <= m <= X with Omega(m) = k.

    Denominators grow like the primorial of X; use
    :func:`restricted_reciprocal_sums_float` for monitoring at large X.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    ms = sieve.level(k).tolist()
    return ReciprocalSums(reciprocal_sum(ms), reciprocal_sum(m * m for m in ms))


def restricted_reciprocal_sums_float(sieve: OmegaSieve, k: int) -> tuple[float, float]:
    ms = sieve.level(k).astype(np.float64)
    return math.fsum(1.0 / ms), math.fsum(1.0 / (ms * ms))


# --- complete homogeneous sums over a prime set ------------------------------


def newton_homogeneous(power_sums: Sequence, j_max: int, one=Fraction(1)) -> list:
    """h[0..j_max] from power sums p_1, p_2, ... via j h_j = sum_i p_i h_{j-i}.

    Works for any field-like numeric type (Fraction, mpmath intervals).
    """
    h = [one]
    for j in range(1, j_max + 1):
        acc = power_sums[0] * h[j - 1]
        for i in range(2, j + 1):
            acc = acc + power_sums[i - 1] * h[j - i]
        h.append(acc / j)
    return h


@dataclass(frozen=True)
class HomogeneousSums:
    """h[j] = sum of 1/n over n built from the primes P with Omega(n) = j."""

    primes: tuple[int, ...]
    s: Fraction
    power_sums: tuple[Fraction, ...]
    h: tuple[Fraction, ...]

    def newton_holds(self) -> bool:
        for j in range(1, len(self.h)):
            rhs = sum(self.power_sums[i - 1] * self.h[j - i] for i in range(1, j + 1))
            if j * self.h[j] != rhs:
                return False
        return True

    def lower_bound_holds(self) -> bool:
        return all(self.h[j] >= self.s**j / math.factorial(j) for j in range(len(self.h)))


def _check_prime_set(P: Iterable[int]) -> tuple[int, ...]:
    primes = tuple(sorted(set(int(p) for p in P)))
    if not primes:
        raise ValueError("prime set must be non-empty")
    bad = [p for p in primes if not is_prime(p)]
    if bad:
        raise ValueError(f"not prime: {bad}")
    return primes


def homogeneous_sums(P: Iterable[int], j_max: int) -> HomogeneousSums:
    primes = _check_prime_set(P)
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    psums = tuple(
        reciprocal_sum(p**i for p in primes) for i in range(1, max(j_max, 1) + 1)
    )
    h = newton_homogeneous(psums, j_max)
    return HomogeneousSums(primes, psums[0], psums, tuple(h))


def _level_members(primes: Sequence[int], j: int, limit: int) -> Iterator[int]:
    def rec(start: int, left: int, acc: int):
        if left == 0:
            yield acc
            return
        for i in range(start, len(primes)):
            nxt = acc * primes[i]
            if nxt * primes[i] ** (left - 1) > limit:
                break
            yield from rec(i, left - 1, nxt)

    yield from rec(0, j, 1)


class TruncatedSum(NamedTuple):
    partial: Fraction
    tail_bound: Fraction
    complete: bool


def enumerate_homogeneous(P: Iterable[int], j: int, limit: int = 10**6) -> TruncatedSum:
    """Brute-force h_j from the members n <= limit of the Omega = j level.

    The level is finite with C(|P|+j-1, j) members; each omitted member
    exceeds ``limit``, so the omitted mass is below (omitted count) / limit.
    """
    primes = _check_prime_set(P)
    members = list(_level_members(primes, j, limit))
    total = math.comb(len(primes) + j - 1, j)
    omitted = total - len(members)
    return TruncatedSum(reciprocal_sum(members), Fraction(omitted, limit), omitted == 0)


def lcm(values: Iterable[int]) -> int:
    return reduce(math.lcm, values, 1)

"""Explicit dense product-free sets modulo n_x = lcm(1..x)^2.

The family keeps every residue whose gcd with n_x is a divisor u of
lcm(1..x) with Omega(u) in [lo, hi]. When 2*lo > hi a product of two members
has gcd class uv with Omega(uv) >= 2*lo > hi, so it falls outside the set.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from mpmath import iv

from .arith import (
    Factorization,
    big_omega,
    critical_k,
    factorize,
    homogeneous_sums,
    lcm_upto,
    newton_homogeneous,
    phi_ratio,
    prime_pi,
    primes_upto,
    reciprocal_sum,
)
from .intervals import _ivprec, endpoints
from .pfsearch import ResidueSet

EXACT_PRIME_LIMIT = 25
MATERIALIZE_CAP = 10**6
BETTEREST_EXPONENT = math.e / 2 * math.log(2)


class IntervalConditionError(ValueError):
    pass


@dataclass(frozen=True)
class IntervalFamily:
    x: int
    ell_x: Factorization
    n_x: Factorization
    lo: int
    hi: int
    allowed: tuple[int, ...]
    density: Fraction

    def to_json(self, transcript_digest: str | None = None) -> dict:
        return {
            "x": self.x,
            "lo": self.lo,
            "hi": self.hi,
            "ell_x": self.ell_x.to_json(),
            "allowed": list(self.allowed),
            "density": str(self.density),
            "transcript_digest": transcript_digest,
        }


def build_family(x: int, lo: int, hi: int) -> IntervalFamily:
    if x < 2:
        raise ValueError("build_family needs x >= 2")
    if lo < 1:
        raise ValueError("lo must be at least 1")
    if 2 * lo <= hi:
        raise IntervalConditionError(f"need 2*lo > hi, got lo={lo}, hi={hi}")
    ell = lcm_upto(x)
    n_x = ell**2
    allowed = tuple(u for u in ell.divisors() if lo <= big_omega(u) <= hi)
    # phi(n_x/u) = phi(n_x)/u because every prime of u still divides n_x/u
    density = phi_ratio(n_x) * reciprocal_sum(allowed)
    return IntervalFamily(x, ell, n_x, lo, hi, allowed, density)


def materialize(fam: IntervalFamily, cap: int = MATERIALIZE_CAP) -> ResidueSet:
    n = fam.n_x.value
    if n > cap:
        raise ValueError(f"n_x = {n} above materialization cap {cap}")
    allowed = set(fam.allowed)
    return ResidueSet(n, frozenset(a for a in range(n) if math.gcd(a, n) in allowed))


class PairStep(NamedTuple):
    u: int
    v: int
    product_class: int
    no_capping: bool
    omega: int
    excluded: bool


@dataclass(frozen=True, eq=False)
class Transcript:
    """Per ordered pair (u, v) of allowed classes: the no-capping check and Omega(uv).

    Stored as two len(allowed) x len(allowed) matrices; ``steps`` expands them.
    """

    family: IntervalFamily
    no_capping: np.ndarray
    omega: np.ndarray

    @property
    def excluded(self) -> np.ndarray:
        # uv can only be an allowed class if Omega(uv) <= hi
        return self.omega > self.family.hi

    @property
    def valid(self) -> bool:
        return bool((self.no_capping & self.excluded).all())

    def __len__(self) -> int:
        return self.omega.size

    @property
    def steps(self) -> list[PairStep]:
        a = self.family.allowed
        ok, om, ex = self.no_capping, self.omega, self.excluded
        return [
            PairStep(u, v, u * v, bool(ok[i, j]), int(om[i, j]), bool(ex[i, j]))
            for i, u in enumerate(a)
            for j, v in enumerate(a)
        ]

    def failures(self, limit: int = 20) -> list[PairStep]:
        a = self.family.allowed
        bad = np.argwhere(~(self.no_capping & self.excluded))[:limit]
        return [
            PairStep(a[i], a[j], a[i] * a[j], bool(self.no_capping[i, j]), int(self.omega[i, j]), bool(self.excluded[i, j]))
            for i, j in bad.tolist()
        ]

    def to_json(self, max_steps: int = 10_000) -> dict:
        doc = {
            "family": self.family.to_json(self.digest()),
            "claim": "gcd(ab, n_x) = uv for a in T_u, b in T_v; Omega(uv) > hi so uv is not allowed",
            "pairs": len(self),
            "valid": self.valid,
        }
        if len(self) <= max_steps:
            doc["steps"] = [list(s) for s in self.steps]
        return doc

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps([self.family.x, self.family.lo, self.family.hi, list(self.family.allowed)]).encode())
        h.update(np.packbits(self.no_capping).tobytes())
        h.update(self.omega.astype(np.uint16).tobytes())
        return h.hexdigest()


def verify_product_free_structural(fam: IntervalFamily, chunk: int = 256) -> Transcript:
    """Check every ordered pair of allowed gcd classes.

    (a) v_p(u) + v_p(v) <= v_p(n_x) for all p, so multiplying a in T_u by b in
    T_v lands in T_uv with no exponent capped at n_x; (b) Omega(uv) >= 2 lo >
    hi, so T_uv is not an allowed class.
    """
    primes = fam.n_x.primes
    cap = np.array([fam.n_x.valuation(p) for p in primes], dtype=np.int16)
    E = np.array(
        [[factorize(u).valuation(p) for p in primes] for u in fam.allowed], dtype=np.int16
    ).reshape(len(fam.allowed), len(primes))
    om = E.sum(axis=1)
    m = len(fam.allowed)
    ok = np.empty((m, m), dtype=bool)
    for i in range(0, m, chunk):
        ok[i : i + chunk] = ((E[i : i + chunk, None, :] + E[None, :, :]) <= cap).all(axis=2)
    return Transcript(fam, ok, om[:, None] + om[None, :])


@dataclass(frozen=True)
class LowerBoundReport:
    family_density: Fraction
    target_rhs: Fraction
    slack_bound: Fraction
    off_lcm_mass: Fraction
    holds: bool


def lower_bound_formula(x: int, lo: int, hi: int) -> LowerBoundReport:
    """Family density against 1 - pi(x)/x - (phi(n_x)/n_x) sum_{d | l_x, Omega(d) outside [lo,hi]} 1/d.

    The residues whose gcd with n_x does not divide l_x are each divisible by
    p^(v_p(l_x)+1) > x for some p <= x; their mass ``off_lcm_mass`` is at most
    ``slack_bound`` = sum_p p^-(v_p(l_x)+1) <= pi(x)/x.
    """
    fam = build_family(x, lo, hi)
    phi = phi_ratio(fam.n_x)
    divs = fam.ell_x.divisors()
    outside = reciprocal_sum(d for d in divs if not lo <= big_omega(d) <= hi)
    rhs = 1 - Fraction(prime_pi(x), x) - phi * outside
    off_lcm = 1 - phi * reciprocal_sum(divs)
    slack = sum((Fraction(1, p ** (e + 1)) for p, e in fam.ell_x.pairs), Fraction(0))
    holds = fam.density >= rhs and off_lcm <= slack <= Fraction(prime_pi(x), x)
    return LowerBoundReport(fam.density, rhs, slack, off_lcm, holds)


# --- sums over x-smooth integers ---------------------------------------------


def euler_factor(primes) -> Fraction:
    """prod_p (1 - 1/p)^-1 = sum of 1/n over integers built from ``primes``."""
    r = Fraction(1)
    for p in primes:
        r *= Fraction(p, p - 1)
    return r


class SmoothSum(NamedTuple):
    value: Fraction | None
    enclosure: tuple[Fraction, Fraction]
    exact: bool
    reference: float
    ratio: float


def _interval_h(primes: list[int], j_max: int, bits: int):
    with _ivprec(bits):
        psums = []
        for i in range(1, max(j_max, 1) + 1):
            acc = iv.mpf(0)
            for p in primes:
                acc += 1 / iv.mpf(p) ** i
            psums.append(acc)
        h = newton_homogeneous(psums, j_max, one=iv.mpf(1))
        full = iv.mpf(1)
        for p in primes:
            full *= iv.mpf(p) / (p - 1)
    return h, full


def _smooth_sum(x: int, skip: range, reference: float, bits: int = 256) -> SmoothSum:
    """Euler product over primes <= x minus h_j for j in ``skip``."""
    primes = primes_upto(x).tolist()
    j_top = max(skip.stop - 1, 0)
    if len(primes) <= EXACT_PRIME_LIMIT:
        h = homogeneous_sums(primes, j_top).h
        val = euler_factor(primes) - sum((h[j] for j in skip), Fraction(0))
        return SmoothSum(val, (val, val), True, reference, float(val) / reference)
    h, full = _interval_h(primes, j_top, bits)
    with _ivprec(bits):
        acc = full
        for j in skip:
            acc = acc - h[j]
        lo, hi = endpoints(acc)
    return SmoothSum(None, (lo, hi), False, reference, float((lo + hi) / 2) / reference)


def betterest_sum(x: int, k: int | None = None) -> SmoothSum:
    """sum of 1/d over x-smooth d with Omega(d) outside the open interval (k, 2k).

    Compared against (log x)^((e/2) log 2) / sqrt(log log x). Exact for at
    most 25 primes, otherwise a certified interval enclosure.
    """
    if x < 3:
        raise ValueError("betterest_sum needs x >= 3")
    if k is None:
        k = critical_k(x)
    ll = math.log(math.log(x))
    ref = math.log(x) ** BETTEREST_EXPONENT / math.sqrt(ll) if ll > 0 else math.nan
    return _smooth_sum(x, range(k + 1, 2 * k), ref)


def tail_sum(x: int, J: int) -> SmoothSum:
    """sum of 1/n over x-smooth n with Omega(n) >= J, against (log x)^0.8."""
    if J < 0:
        raise ValueError("J must be nonnegative")
    return _smooth_sum(x, range(0, J), math.log(x) ** 0.8)


# --- the two-sided estimate on h_j -------------------------------------------


class LevelBound(NamedTuple):
    j: int
    lower: Fraction
    h: Fraction
    upper: Fraction
    holds: bool


def homogeneous_bounds(P, eps: Fraction = Fraction(1, 10), p0: int | None = None) -> list[LevelBound]:
    """s^j/j! <= h_j <= (s^j/j!) prod_p (1 - (c/p)^2)^-1 for j <= c s, c = 2 - eps.

    With ``p0`` the range widens to j <= (p0 - eps) s, with the same product
    constant evaluated at c = p0 - eps; that version is only monitored.
    """
    c = Fraction(p0 if p0 is not None else 2) - Fraction(eps)
    hs = homogeneous_sums(P, 0)
    j_max = math.floor(c * hs.s)
    hs = homogeneous_sums(P, j_max)
    if any(c >= p for p in hs.primes):
        raise ValueError("constant needs c < p for every prime in P")
    const = Fraction(1)
    for p in hs.primes:
        const /= 1 - (c / p) ** 2
    out = []
    for j in range(j_max + 1):
        low = hs.s**j / math.factorial(j)
        up = low * const
        out.append(LevelBound(j, low, hs.h[j], up, low <= hs.h[j] <= up))
    return out

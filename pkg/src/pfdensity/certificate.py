"""Mass-shifting dual certificates and the resulting density upper bounds.

A certificate starts from the trivial dual point beta_u = 1/u and moves mass
onto pair variables beta_{u,v} = 1/(uvA) for u, v <= X with Omega(u) =
Omega(v) = k, lowering each affected beta_u just enough to keep every
covering row tight. Everything attached to N is computed from its
factorization, so N may be astronomically large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

from mpmath import iv

from . import lpcore
from .arith import (
    Factorization,
    auxiliary_modulus,
    big_omega,
    critical_k,
    factorize,
    omega_sieve,
    phi_ratio,
    primes_upto,
    reciprocal_sum,
    restricted_reciprocal_sums_float,
    sigma_ratio,
    unitary_reciprocal_sum,
)
from .intervals import enclose

FORMAT = "pfdensity-certificate"
VERSION = 1
ENUMERATION_BUDGET = 100_000


class CertificateError(ValueError):
    pass


class DivisibilityError(CertificateError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: int | None = None


@dataclass(frozen=True)
class FeasibilityReport:
    checks: tuple[Check, ...]

    @property
    def feasible(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def witness(self) -> int | None:
        return next((c.witness for c in self.checks if not c.passed and c.witness), None)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "witness": self.witness,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, "witness": c.witness}
                for c in self.checks
            ],
        }


@dataclass(frozen=True)
class DualCertificate:
    X: int
    k: int
    A: Fraction
    S_k: Fraction
    Q_k: Fraction
    N: Factorization
    level: tuple[int, ...]
    pair_mass: Fraction
    objective: Fraction
    restricted: bool = False
    report: FeasibilityReport | None = field(default=None, compare=False)

    @property
    def feasible(self) -> bool:
        return self.report is not None and self.report.feasible

    @property
    def bound(self) -> Fraction:
        """(phi(N)/N)(1 + l_D(beta)), an upper bound on D(N)."""
        return phi_ratio(self.N) * (1 + self.objective)

    def pairs(self) -> list[tuple[int, int]]:
        return [(u, v) for i, u in enumerate(self.level) for v in self.level[i:]]

    def pair_value(self, u: int, v: int) -> Fraction:
        return Fraction(1, u * v) / self.A

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "X": self.X,
            "k": self.k,
            "A": str(self.A),
            "S_k": str(self.S_k),
            "Q_k": str(self.Q_k),
            "N": self.N.to_json(),
            "level": list(self.level),
            "restricted": self.restricted,
            "pair_mass": str(self.pair_mass),
            "objective": str(self.objective),
            "bound": str(self.bound),
            "feasibility": None if self.report is None else self.report.to_json(),
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "DualCertificate":
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise CertificateError(f"not a version-{VERSION} {FORMAT} document")
        return cls(
            X=int(doc["X"]),
            k=int(doc["k"]),
            A=Fraction(doc["A"]),
            S_k=Fraction(doc["S_k"]),
            Q_k=Fraction(doc["Q_k"]),
            N=Factorization.from_json(doc["N"]),
            level=tuple(int(m) for m in doc["level"]),
            pair_mass=Fraction(doc["pair_mass"]),
            objective=Fraction(doc["objective"]),
            restricted=bool(doc.get("restricted", False)),
        )


def _square_divides(m: int, N: Factorization) -> bool:
    exps = N.exponents()
    return all(2 * e <= exps.get(p, 0) for p, e in factorize(m).pairs)


def level_set(X: int, k: int, N: Factorization | None = None, restrict: bool = False) -> list[int]:
    """m in [2, X] with Omega(m) = k; with ``restrict``, only those with m^2 | N."""
    if k < 1 or X < 2:
        return []
    if X <= 50_000:
        ms = [m for m in range(2, X + 1) if big_omega(m) == k]
    else:
        ms = omega_sieve(X).level(k).tolist()
    if restrict:
        ms = [m for m in ms if _square_divides(m, N)]
    return ms


def weight_A(k: int, S_k: Fraction) -> Fraction:
    """Smallest A meeting C(2k,k) <= A, 2 S_k <= A and S_k + 1/2 <= A."""
    return max(Fraction(math.comb(2 * k, k)), 2 * S_k, S_k + Fraction(1, 2))


def build_certificate(
    X: int, N: Factorization | int, k: int | None = None, *, restrict: bool = False
) -> DualCertificate:
    """Mass-shifting certificate for the dual program of N.

    Every pair product uv must divide N; this holds for the auxiliary modulus
    and is checked for a user-supplied N (``DivisibilityError`` names the
    offending product). With ``restrict`` the level set is cut down to the m
    with m^2 | N instead of raising. k defaults to critical_k(X); k = 0 gives
    an empty pair support, i.e. the trivial dual point.
    """
    if X < 2:
        raise ValueError("build_certificate needs X >= 2")
    if isinstance(N, int):
        N = factorize(N)
    if k is None:
        k = critical_k(X) if X >= 3 else 0
    if k < 0:
        raise ValueError("k must be nonnegative")
    level = level_set(X, k, N, restrict)
    for m in level:
        if not N.divides(m):
            raise DivisibilityError(f"u={m} does not divide N={N}")
        if not _square_divides(m, N):
            raise DivisibilityError(f"uv={m}*{m}={m * m} does not divide N={N}")
    S = reciprocal_sum(level)
    Q = reciprocal_sum(m * m for m in level)
    A = weight_A(k, S)
    pair_mass = (S * S + Q) / (2 * A)
    objective = sigma_ratio(N) - 1 - pair_mass
    cert = DualCertificate(X, k, A, S, Q, N, tuple(level), pair_mass, objective, restrict)
    return replace(cert, report=verify_feasibility(cert))


def affected_betas(cert: DualCertificate) -> dict[int, Fraction]:
    """beta_u for every u touched by a pair variable; all other beta_u equal 1/u."""
    drain: dict[int, Fraction] = {}
    for u, v in cert.pairs():
        b = cert.pair_value(u, v)
        if u == v:
            drain[u] = drain.get(u, 0) + 2 * b
        else:
            drain[u] = drain.get(u, 0) + b
            drain[v] = drain.get(v, 0) + b
        drain[u * v] = drain.get(u * v, 0) + b
    return {u: Fraction(1, u) - d for u, d in sorted(drain.items())}


def dense_beta(cert: DualCertificate) -> dict[str, Fraction]:
    """The certificate as a full assignment for ``lpcore.build_dual(N)``."""
    N = cert.N.value
    x = {lpcore.beta(u): Fraction(1, u) for u in lpcore.divisors_above_one(N)}
    x.update({lpcore.beta_pair(u, v): Fraction(0) for u, v in lpcore.admissible_pairs(N)})
    x.update({lpcore.beta(u): b for u, b in affected_betas(cert).items()})
    for u, v in cert.pairs():
        x[lpcore.beta_pair(u, v)] = cert.pair_value(u, v)
    return x


def direct_objective(cert: DualCertificate) -> Fraction:
    """sum beta_u + 2 sum beta_{u,v}, evaluated from the explicit beta values."""
    betas = affected_betas(cert)
    untouched = sigma_ratio(cert.N) - 1 - sum((Fraction(1, u) for u in betas), Fraction(0))
    pairs = sum((cert.pair_value(u, v) for u, v in cert.pairs()), Fraction(0))
    return untouched + sum(betas.values(), Fraction(0)) + 2 * pairs


def verify_feasibility(cert: DualCertificate, budget: int = ENUMERATION_BUDGET) -> FeasibilityReport:
    """Exact feasibility checks, recomputing everything from X, k, A and N.

    (i) A >= S_k + max 1/m covers rows with Omega(u) = k; (ii) A >= C(2k,k)/2
    covers rows with Omega(u) = 2k; (iii) every affected beta_u is computed
    explicitly and checked nonnegative, and when N has at most ``budget``
    divisors every covering row is re-summed for tightness.
    """
    checks = []
    X, k, A, N = cert.X, cert.k, cert.A, cert.N
    level = level_set(X, k, N, cert.restricted)
    checks.append(
        Check("level_set", list(cert.level) == level, f"expected {level[:8]}{'...' if len(level) > 8 else ''}")
    )
    S = reciprocal_sum(level)
    Q = reciprocal_sum(m * m for m in level)
    checks.append(Check("S_k", S == cert.S_k, f"recomputed {S}"))
    checks.append(Check("Q_k", Q == cert.Q_k, f"recomputed {Q}"))

    bad_div = next((m for m in level if not _square_divides(m, N)), None)
    checks.append(
        Check("divisibility", bad_div is None, "" if bad_div is None else f"{bad_div}^2 does not divide N", bad_div)
    )

    if level:
        need = S + Fraction(1, level[0])
        checks.append(
            Check("(i) A >= S_k + max 1/m", A >= need, f"A={A}, S_k + 1/{level[0]} = {need}", None if A >= need else level[0])
        )
        checks.append(Check("sufficient: A/2 >= S_k (informational)", True, f"{'holds' if A >= 2 * S else 'fails'}: A/2={A / 2}, S_k={S}"))
        half = Fraction(math.comb(2 * k, k), 2)
        checks.append(Check("(ii) A >= C(2k,k)/2", A >= half, f"A={A}, C(2k,k)/2={half}"))
    else:
        checks.append(Check("empty pair support", True, "trivial dual point"))

    if A <= 0:
        checks.append(Check("A > 0", False, f"A={A}"))
        return FeasibilityReport(tuple(checks))

    recheck = replace(cert, level=tuple(level), S_k=S, Q_k=Q)
    betas = affected_betas(recheck)
    neg = next((u for u, b in betas.items() if b < 0), None)
    checks.append(
        Check(
            "(iii) affected beta_u >= 0",
            neg is None,
            f"{len(betas)} affected rows" if neg is None else f"beta_{neg} = {betas[neg]}",
            neg,
        )
    )
    if N.num_divisors() <= budget and N.value > 1:
        checks.append(_tightness_sweep(recheck, betas))
    pair_mass = (S * S + Q) / (2 * A)
    restated = sigma_ratio(N) - 1 - pair_mass
    checks.append(Check("pair_mass", pair_mass == cert.pair_mass, f"recomputed {pair_mass}"))
    checks.append(Check("objective", restated == cert.objective, f"recomputed {restated}"))
    direct = direct_objective(recheck)
    checks.append(Check("restated == direct objective", direct == restated, f"direct {direct}"))
    return FeasibilityReport(tuple(checks))


def _tightness_sweep(cert: DualCertificate, betas: Mapping[int, Fraction]) -> Check:
    pairs = {(u, v): cert.pair_value(u, v) for u, v in cert.pairs()}
    load: dict[int, Fraction] = {}
    for (u, v), b in pairs.items():
        load[u] = load.get(u, 0) + b
        load[v] = load.get(v, 0) + b
        load[u * v] = load.get(u * v, 0) + b
    N = cert.N.value
    for u in cert.N.divisors()[1:]:
        if u in load and N % u:
            return Check("row tightness", False, f"pair row u={u} is not a divisor of N", u)
        total = betas.get(u, Fraction(1, u)) + load.get(u, 0)
        if total != Fraction(1, u):
            return Check("row tightness", False, f"row u={u} sums to {total}", u)
    return Check("row tightness", True, f"{cert.N.num_divisors() - 1} rows tight")


@dataclass(frozen=True)
class FullDualCheck:
    feasible: bool
    violations: tuple[str, ...]
    ell_D: Fraction
    restated: Fraction | None
    lp_optimum: Fraction

    def __bool__(self) -> bool:
        return self.feasible and self.ell_D >= self.lp_optimum and self.restated == self.ell_D


def full_dual_check(cert: DualCertificate, max_vars: int = lpcore.LP_VARIABLE_CAP) -> FullDualCheck:
    """Materialize beta for the dual program of N and check it row by row."""
    N = cert.N.value
    D = lpcore.build_dual(N)
    if len(D.variables) > max_vars:
        raise lpcore.LpSizeError(f"dual program for N={N} has {len(D.variables)} variables")
    x = dense_beta(cert)
    bad = D.violations(x)
    ell = D.evaluate(x)
    try:
        restated = lpcore.restated_dual_objective(x, N)
    except lpcore.TightnessError:
        restated = None
    return FullDualCheck(not bad, tuple(bad), ell, restated, lpcore.primal_optimum(N))


def mass_shift_ceiling(X: int, k: int, N: Factorization | int, cert: DualCertificate | None = None) -> Fraction:
    """sum of 1/u over 2 <= u <= X, u | N, Omega(u) outside [k+1, 2k].

    Any dual point with tight rows moves at most this much mass onto pairs
    supported below X; raises CertificateError if ``cert`` moves more.
    """
    if isinstance(N, int):
        N = factorize(N)
    ceiling = reciprocal_sum(
        u for u in range(2, X + 1) if N.divides(u) and not k + 1 <= big_omega(u) <= 2 * k
    )
    if cert is None:
        cert = build_certificate(X, N, k)
    if cert.pair_mass > ceiling:
        raise CertificateError(f"pair mass {cert.pair_mass} exceeds ceiling {ceiling}")
    return ceiling


def bstack_check(n: int) -> tuple[Fraction, Fraction, bool]:
    """(sum over unitary b > 1 of 1/b, phi(N)/N, lhs <= rhs) for N = N(n)."""
    N = auxiliary_modulus(n).N
    lhs, rhs = unitary_reciprocal_sum(N), phi_ratio(N)
    return lhs, rhs, lhs <= rhs


# --- end-to-end bound --------------------------------------------------------

EXPONENT = 1 - math.e / 2 * math.log(2)


def mertens_floor(X: int) -> tuple[Fraction, Fraction]:
    """Certified enclosure of (1/(3 e^gamma log X))(1 - 1/log^2 X)."""
    if X < 2:
        raise ValueError("mertens_floor needs X >= 2")

    def expr():
        L = iv.log(iv.mpf(X))
        return (1 - 1 / (L * L)) / (3 * iv.exp(iv.euler) * L)

    return enclose(expr, 128)


@dataclass
class BoundReport:
    n: int
    X: int
    k: int | None
    A: Fraction | None
    N: Factorization
    certified_upper_bound_on_DN: Fraction
    phi_ratio: Fraction
    mertens_floor: tuple[Fraction, Fraction] | None
    asymptotic_shape: dict
    provenance: list[str]
    certificate: DualCertificate | None = None
    lp_bound: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "X": self.X,
            "k": self.k,
            "A": None if self.A is None else str(self.A),
            "N": self.N.to_json(),
            "bound": str(self.certified_upper_bound_on_DN),
            "phi_ratio": str(self.phi_ratio),
            "mertens_floor": None
            if self.mertens_floor is None
            else [f"~{float(x):.12g}" for x in self.mertens_floor],
            "asymptotic_shape": self.asymptotic_shape,
            "provenance": self.provenance,
        }


def _asymptotic_shape(n: int, bound: Fraction) -> dict:
    """1 - bound against (loglog n)^(1 - (e/2) log 2) sqrt(logloglog n), n >= 20."""
    if n < 20:
        return {"defined": False}
    lln = math.log(math.log(n))
    shape = lln**EXPONENT * math.sqrt(math.log(lln))
    return {
        "defined": True,
        "shape": f"~{shape:.12g}",
        "implied_c": f"~{float(1 - bound) * shape:.12g}",
        "note": "bound = 1 - c / shape; c is not asserted",
    }


def density_upper_bound(
    n: int,
    X: int | None = None,
    k: int | None = None,
    N: Factorization | int | None = None,
    lp_divisor_cap: int = 0,
) -> BoundReport:
    """Certified upper bound on D(n) through the auxiliary modulus N.

    The chain is D(n) <= D(N) <= (phi(N)/N)(1 + L_P^opt(N)) <= (phi(N)/N)(1 + l_D(beta)).
    For X <= 1 (n <= 7) N = n and the program is solved exactly. With
    ``lp_divisor_cap`` > 0 the exact program is also solved whenever N has at
    most that many divisors, and the smaller of the two exact values is kept.
    """
    if n < 1:
        raise ValueError("n must be positive")
    trail = []
    aux = auxiliary_modulus(n)
    if X is None:
        X = aux.X
        trail.append(f"X = floor(log {n}) = {X} (interval-certified)")
    else:
        trail.append(f"X = {X} (override)")
    if N is None:
        if X == aux.X:
            Nf = aux.N
        else:
            exps = factorize(n).exponents()
            for p in primes_upto(X).tolist():
                exps[p] = exps.get(p, 0) + 1
            Nf = Factorization.from_exponents(exps) ** X
        trail.append(f"N = (n * prod_(p<=X) p)^X = {Nf}")
    else:
        Nf = factorize(N) if isinstance(N, int) else N
        trail.append(f"N = {Nf} (override)")
    if not Nf.divides(n):
        # only n = 2 with X = 0: D(2) = 0 since both residues are idempotent
        trail.append("n does not divide N; D(n) <= 1 used directly")
        return BoundReport(n, X, None, None, Nf, Fraction(1), phi_ratio(Nf), None, _asymptotic_shape(n, Fraction(1)), trail)
    trail.append("D(n) <= D(N) (lifting residues mod n to mod N)")
    phi = phi_ratio(Nf)
    if Nf.value == 1:
        trail.append("N = 1: D(1) = 0 <= phi(1)(1 + 0) = 1")
        return BoundReport(n, X, None, None, Nf, Fraction(1), phi, None, _asymptotic_shape(n, Fraction(1)), trail)

    cert = None
    lp_bound = None
    bounds = []
    if X <= 1 or (lp_divisor_cap and Nf.num_divisors() <= lp_divisor_cap):
        lp_bound = lpcore.upper_bound_via_lp(n, modulus=Nf)
        trail.append(f"D(N) <= (phi(N)/N)(1 + L_P^opt(N)) = {lp_bound} (exact simplex)")
        bounds.append(lp_bound)
    if X >= 2:
        cert = build_certificate(X, Nf, k)
        if not cert.feasible:
            raise CertificateError(f"certificate infeasible: {cert.report.failures()}")
        trail.append(
            f"mass-shifting certificate k={cert.k}, A={cert.A}, |support level|={len(cert.level)}: "
            f"l_D(beta) = sigma(N)/N - 1 - {cert.pair_mass} (verified feasible)"
        )
        trail.append(f"D(N) <= (phi(N)/N)(1 + l_D(beta)) = {cert.bound}")
        bounds.append(cert.bound)
    bound = min(bounds)
    floor = None
    if X >= 2:
        floor = mertens_floor(X)
        trail.append(
            f"phi(N)/N = ~{float(phi):.6g} vs Mertens-type floor ~{float(floor[0]):.6g}"
            f" ({'above' if phi > floor[1] else 'not above'}; the floor is only claimed for X >= 6)"
        )
    return BoundReport(
        n,
        X,
        None if cert is None else cert.k,
        None if cert is None else cert.A,
        Nf,
        bound,
        phi,
        floor,
        _asymptotic_shape(n, bound),
        trail,
        cert,
        lp_bound,
    )


# --- asymptotic monitors -----------------------------------------------------

MONITOR_WINDOW = (0.02, 50.0)


def stirling_ratio(k: int) -> float:
    """C(2k,k) / (4^k / sqrt(pi k)), which tends to 1."""
    return math.comb(2 * k, k) / (4**k / math.sqrt(math.pi * k))


def level_mass_monitor(X_grid: Iterable[int], k: int = 1, window: tuple[float, float] = MONITOR_WINDOW) -> list[dict]:
    """The five growth-equivalent quantities at each X and all pairwise ratios.

    Ratios outside ``window`` are flagged, not raised: the implied constants
    in the equivalences are unspecified.
    """
    grid = sorted(set(X_grid))
    sieve = omega_sieve(max(grid))
    rows = []
    for X in grid:
        ll = math.log(math.log(X))
        S = math.fsum(1.0 / m for m in sieve.level(k)[sieve.level(k) <= X].tolist())
        q = {
            "binom": float(math.comb(2 * k, k)),
            "four_k": 4**k / math.sqrt(k),
            "log_power": math.log(X) ** (math.e / 2 * math.log(2)) / math.sqrt(ll),
            "poisson": ll**k / math.factorial(k),
            "S_k": S,
        }
        names = list(q)
        ratios = {}
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                ratios[f"{a}/{b}"] = q[a] / q[b] if q[b] else math.inf
        flagged = [r for r, v in ratios.items() if not window[0] <= v <= window[1]]
        rows.append({"X": X, "k": k, "quantities": q, "ratios": ratios, "flagged": flagged})
    return rows


def level_sum_float(X: int, k: int) -> float:
    return restricted_reciprocal_sums_float(omega_sieve(X), k)[0]

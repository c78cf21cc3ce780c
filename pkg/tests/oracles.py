"""Independent reference implementations.

Nothing here imports pfdensity; each function recomputes from definitions
with the slowest obvious method.
"""

from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import gcd, prod


def factor_pairs(n):
    out, d = [], 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def phi(n):
    return sum(1 for a in range(1, n + 1) if gcd(a, n) == 1)


def sigma(n):
    return sum(divisors(n))


def big_omega(n):
    return sum(e for _, e in factor_pairs(n))


def is_prime(n):
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def lcm_fold(x):
    L = 1
    for i in range(1, x + 1):
        L = L * i // gcd(L, i)
    return L


def product_free(n, S):
    S = set(S)
    return not any(a * b % n in S for a in S for b in S)


def max_product_free_combinations(n):
    """Largest size first; first hit in lexicographic order is the lex-least witness."""
    for size in range(n, -1, -1):
        for S in combinations(range(n), size):
            if product_free(n, S):
                return Fraction(size, n), list(S)
    return Fraction(0), []


def lp_vertex_max(n):
    """Optimum of the primal program by enumerating every basic solution.

    Constraints are rebuilt from the definition: alpha_u <= 1, and for u <= v
    with uv | n, alpha_u + alpha_v + alpha_uv <= 2, and alpha >= 0.
    """
    divs = [d for d in divisors(n) if d > 1]
    idx = {u: i for i, u in enumerate(divs)}
    m = len(divs)
    rows = []
    for u in divs:
        r = [Fraction(0)] * m
        r[idx[u]] = Fraction(1)
        rows.append((r, Fraction(1)))
        neg = [Fraction(0)] * m
        neg[idx[u]] = Fraction(-1)
        rows.append((neg, Fraction(0)))
    for i, u in enumerate(divs):
        for v in divs[i:]:
            if n % (u * v) == 0:
                r = [Fraction(0)] * m
                for w in (u, v, u * v):
                    r[idx[w]] += 1
                rows.append((r, Fraction(2)))
    c = [Fraction(1, u) for u in divs]
    best = None
    for pick in combinations(range(len(rows)), m):
        x = _solve([rows[i][0] for i in pick], [rows[i][1] for i in pick])
        if x is None:
            continue
        if all(sum(a * b for a, b in zip(r, x)) <= rhs for r, rhs in rows):
            val = sum(a * b for a, b in zip(c, x))
            if best is None or val > best[0]:
                best = (val, dict(zip(divs, x)))
    return best


def _solve(A, b):
    m = len(A)
    M = [list(r) + [v] for r, v in zip(A, b)]
    for col in range(m):
        piv = next((r for r in range(col, m) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        for r in range(m):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * p for a, p in zip(M[r], M[col])]
    return [M[i][m] / M[i][i] for i in range(m)]


def homogeneous_direct(P, j):
    return sum((Fraction(1, prod(c)) for c in combinations_with_replacement(sorted(P), j)), Fraction(0))


def euler_product(P):
    return prod((Fraction(p, p - 1) for p in P), start=Fraction(1))


def level_sum(X, k):
    return sum((Fraction(1, m) for m in range(2, X + 1) if big_omega(m) == k), Fraction(0))

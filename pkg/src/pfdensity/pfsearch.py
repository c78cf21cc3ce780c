"""Product-free sets in Z/nZ: verification, exact maximum search, gcd profiles.

The exact search treats Z/nZ as a hypergraph whose edges are the sets
{a, b, ab mod n}; a product-free set is an independent set of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .arith import arithmetic_functions, factorize
from .lpcore import alpha as alpha_var

SEARCH_CAP = 64


class NotProductFreeError(ValueError):
    pass


@dataclass(frozen=True)
class ResidueSet:
    n: int
    members: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("modulus must be positive")
        members = frozenset(int(a) for a in self.members)
        bad = [a for a in members if not 0 <= a < self.n]
        if bad:
            raise ValueError(f"residues out of range mod {self.n}: {sorted(bad)[:5]}")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_bitmap(cls, bitmap) -> "ResidueSet":
        bits = np.asarray(bitmap, dtype=bool)
        return cls(bits.size, frozenset(np.flatnonzero(bits).tolist()))

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "ResidueSet":
        return cls(n, frozenset(a for a in range(n) if mask >> a & 1))

    @property
    def bitmap(self) -> np.ndarray:
        bits = np.zeros(self.n, dtype=bool)
        bits[list(self.members)] = True
        return bits

    @property
    def mask(self) -> int:
        return sum(1 << a for a in self.members)

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, a: int) -> bool:
        return a in self.members

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.members), self.n)


def is_product_free(S: ResidueSet, chunk: int = 2048) -> bool:
    """True iff no a, b, c in S (a = b allowed) satisfy ab = c mod n."""
    if not S.members:
        return True
    n = S.n
    elems = np.array(S.sorted(), dtype=object if n > 3_000_000_000 else np.int64)
    inside = S.bitmap
    for i in range(0, elems.size, chunk):
        prods = np.multiply.outer(elems[i : i + chunk], elems) % n
        if inside[prods.astype(np.int64)].any():
            return False
    return True


# --- exact search ------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    n: int
    best_set: ResidueSet
    density: Fraction
    nodes_explored: int
    proof_of_optimality: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "density": str(self.density),
            "witness": self.best_set.sorted(),
            "optimal": self.proof_of_optimality,
            "nodes": self.nodes_explored,
        }


@dataclass
class _Hypergraph:
    n: int
    vertices: list[int]
    rests: dict[int, list[int]]
    units: int = 0
    degree: dict[int, int] = field(default_factory=dict)


def _hypergraph(n: int) -> _Hypergraph:
    """Vertices are residues that may appear in some product-free set.

    0 and every idempotent (a^2 = a) are excluded outright.
    """
    vertices = [a for a in range(1, n) if a * a % n != a]
    alive = set(vertices)
    edges = set()
    for i, a in enumerate(vertices):
        for b in vertices[i:]:
            c = a * b % n
            if c not in alive:
                continue
            edges.add(frozenset((a, b, c)))
    pairs = {e for e in edges if len(e) == 2}
    edges = {e for e in edges if len(e) == 2 or not any(p <= e for p in pairs)}
    rests: dict[int, list[int]] = {v: [] for v in vertices}
    for e in edges:
        for v in e:
            rests[v].append(sum(1 << w for w in e if w != v))
    for v in vertices:
        # two-element edges first: they forbid unconditionally
        rests[v].sort(key=lambda m: (m.bit_count(), m))
    units = sum(1 << a for a in vertices if math.gcd(a, n) == 1)
    degree = {v: len(rests[v]) for v in vertices}
    return _Hypergraph(n, vertices, rests, units, degree)


class _Budget(Exception):
    pass


def _branch_and_bound(
    g: _Hypergraph, order: list[int], best: int, budget: float, target: int | None = None
):
    """Depth-first include-first search over ``order``.

    With ``target`` set, only sets of exactly that size are accepted and the
    first one found is returned.
    """
    n = g.n
    unit_cap = (n - 1) // 2  # a product-free set holding a unit has 2|S| <= n - 1
    rests = g.rests
    units = g.units
    bit_of = {v: 1 << v for v in order}
    nodes = 0
    best_mask = None
    floor = best if target is None else target - 1

    def visit(idx: int, inc: int, cand: int, size: int):
        nonlocal nodes, floor, best_mask
        nodes += 1
        if nodes > budget:
            raise _Budget
        ub = size + cand.bit_count()
        if inc & units and ub > unit_cap:
            ub = unit_cap
        if ub <= floor:
            return
        while idx < len(order) and not cand & bit_of[order[idx]]:
            idx += 1
        if idx == len(order):
            if size > floor:
                floor = size
                best_mask = inc
                if target is not None:
                    raise StopIteration
            return
        v = order[idx]
        bv = bit_of[v]
        inc2 = inc | bv
        forbid = 0
        for r in rests[v]:
            left = r & ~inc2
            if left and not left & (left - 1):
                forbid |= left
        visit(idx + 1, inc2, cand & ~bv & ~forbid, size + 1)
        visit(idx + 1, inc, cand & ~bv, size)

    cand0 = sum(bit_of[v] for v in order)
    exhausted = False
    try:
        visit(0, 0, cand0, 0)
    except _Budget:
        exhausted = True
    except StopIteration:
        pass
    return best_mask, nodes, exhausted


def max_product_free(n: int, budget: float = math.inf, cap: int = SEARCH_CAP) -> SearchResult:
    """D(n) with a witness, by branch and bound on the product hypergraph.

    Phase one finds the maximum size with vertices ordered by degree; phase
    two re-searches in ascending residue order for exactly that size, which
    makes the returned witness the lexicographically least sorted member list.
    ``budget`` bounds the node count over both phases; when it runs out the
    best set found so far is returned with ``proof_of_optimality=False``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap:
        raise ValueError(f"n={n} above search cap {cap}")
    g = _hypergraph(n)
    if not g.vertices:
        return SearchResult(n, ResidueSet(n), Fraction(0), 1, True)
    by_degree = sorted(g.vertices, key=lambda v: (-g.degree[v], v))
    mask, nodes, exhausted = _branch_and_bound(g, by_degree, 0, budget)
    if exhausted:
        found = ResidueSet.from_mask(n, mask or 0)
        return SearchResult(n, found, found.density, nodes, False)
    size = mask.bit_count()
    lex_mask, nodes2, exhausted = _branch_and_bound(
        g, sorted(g.vertices), 0, budget - nodes, target=size
    )
    nodes += nodes2
    if exhausted or lex_mask is None:
        found = ResidueSet.from_mask(n, mask)
        return SearchResult(n, found, found.density, nodes, not exhausted)
    found = ResidueSet.from_mask(n, lex_mask)
    return SearchResult(n, found, found.density, nodes, True)


def max_product_free_naive(n: int) -> SearchResult:
    """D(n) by testing all 2^n subsets at once with numpy bit masks.

    Used as an independent oracle for :func:`max_product_free`.
    """
    if n > 24:
        raise ValueError("naive enumeration limited to n <= 24")
    masks = np.arange(1 << n, dtype=np.uint32)
    ok = np.ones(masks.size, dtype=bool)
    seen = set()
    for a in range(n):
        for b in range(a, n):
            e = (1 << a) | (1 << b) | (1 << (a * b % n))
            if e not in seen:
                seen.add(e)
                ok &= (masks & np.uint32(e)) != e
    sizes = np.where(ok, np.bitwise_count(masks), 0)
    best = int(sizes.max())
    cands = np.flatnonzero(sizes == best).tolist()
    witness = min(
        (ResidueSet.from_mask(n, int(m)) for m in cands), key=lambda s: s.sorted()
    )
    return SearchResult(n, witness, Fraction(best, n), 1 << n, True)


# --- gcd classes -------------------------------------------------------------


@dataclass(frozen=True)
class GcdProfile:
    n: int
    alpha: dict[int, Fraction]

    def total_size(self) -> Fraction:
        """sum over u | n of phi(n/u) alpha_u; equals |S|."""
        return sum(
            (arithmetic_functions(self.n // u).phi * a for u, a in self.alpha.items()),
            Fraction(0),
        )

    def restricted(self) -> dict[int, Fraction]:
        """alpha_u for u > 1: a candidate point of the primal LP."""
        return {u: a for u, a in self.alpha.items() if u > 1}

    def primal_point(self) -> dict[str, Fraction]:
        """The restricted profile keyed by primal variable names."""
        return {alpha_var(u): a for u, a in self.restricted().items()}


def gcd_profile(S: ResidueSet) -> GcdProfile:
    """alpha_u = |{a in S : gcd(a, n) = u}| / phi(n/u) for every u | n."""
    n = S.n
    counts: dict[int, int] = {}
    for a in S.members:
        u = math.gcd(a, n)
        counts[u] = counts.get(u, 0) + 1
    alpha = {
        u: Fraction(counts.get(u, 0), arithmetic_functions(n // u).phi)
        for u in factorize(n).divisors()
    }
    return GcdProfile(n, alpha)


def lift_set(S: ResidueSet, m: int) -> ResidueSet:
    """S + {0, n, ..., (m-1)n} as a subset of Z/mnZ."""
    if m < 1:
        raise ValueError("m must be positive")
    if not is_product_free(S):
        raise NotProductFreeError("lift_set needs a product-free set")
    n = S.n
    lifted = ResidueSet(m * n, frozenset(a + i * n for a in S.members for i in range(m)))
    if not is_product_free(lifted):  # pragma: no cover - guarded by the argument above
        raise AssertionError("lifted set is not product-free")
    return lifted


def random_product_free(n: int, rng: np.random.Generator, attempts: int | None = None) -> ResidueSet:
    """Greedy random product-free set: scan a random permutation, keep what fits."""
    members: set[int] = set()
    products: set[int] = set()  # every b*c mod n with b, c in members
    for a in rng.permutation(n).tolist()[: attempts or n]:
        if a in products:
            continue
        new = [a * b % n for b in members]
        new.append(a * a % n)
        if any(c == a or c in members for c in new):
            continue
        members.add(a)
        products.update(new)
    return ResidueSet(n, frozenset(members))


def residue_set(n: int, members: Iterable[int]) -> ResidueSet:
    return ResidueSet(n, frozenset(members))

"""Dense product-free sets from gcd classes with Omega in an interval."""

from pfdensity import construction
from pfdensity.pfsearch import is_product_free

fam = construction.build_family(6, 2, 3)
print("l_x =", fam.ell_x, " n_x =", fam.n_x, " allowed", fam.allowed, " density", fam.density)

# every ordered pair of allowed classes multiplies into a class with too many prime factors
t = construction.verify_product_free_structural(fam)
print(len(t), "pairs, valid:", t.valid, " digest", t.digest()[:16])

# and at the level of residues
S = construction.materialize(fam)
print(len(S), "residues mod", S.n, "product-free:", is_product_free(S))

# the best interval for a few x
for x in (6, 10, 12, 20, 30):
    best = max(
        (construction.build_family(x, lo, hi) for lo in range(1, 7) for hi in range(lo, 2 * lo)),
        key=lambda f: f.density,
    )
    print(f"x={x:2d} [{best.lo},{best.hi}] density ~{float(best.density):.4f}")

# sums over x-smooth numbers that control the construction's loss
for x in (10, 100, 1000, 10**4):
    b = construction.betterest_sum(x)
    tail = construction.tail_sum(x, 4)
    print(x, "exact" if b.exact else "interval", f"ratio ~{b.ratio:.3f}", f"tail ratio ~{tail.ratio:.3f}")

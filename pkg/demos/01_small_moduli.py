"""Exact maximal densities D(n) for small moduli, and what the best sets look like."""

from fractions import Fraction

from pfdensity.pfsearch import gcd_profile, is_product_free, max_product_free

# D(n) for every n up to 40. The search proves optimality, so these are exact.
table = {n: max_product_free(n) for n in range(2, 41)}
for n, res in table.items():
    print(f"{n:3d}  D = {str(res.density):>6}  ~{float(res.density):.3f}  witness {res.best_set.sorted()}")

# nothing reaches 1/2
print("max over n <= 40:", max(r.density for r in table.values()))

# the witness for n = 6 is {2, 5}; its gcd profile puts half of T_1 and half of T_2 in S
best6 = table[6].best_set
print(best6.sorted(), is_product_free(best6))
for u, a in sorted(gcd_profile(best6).alpha.items()):
    print(f"  alpha_{u} = {a}")

# mod a prime the quadratic non-residues are product-free (a product of two is a
# residue), and nothing larger is: the best sets have (p-1)/2 elements
for p in (5, 7, 11, 13):
    res = table[p]
    print(p, res.density == Fraction((p - 1) // 2, p), res.best_set.sorted())

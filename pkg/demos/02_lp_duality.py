"""The gcd-class linear program: solve both sides exactly and look at the optimum."""

from fractions import Fraction

import numpy as np

from pfdensity import lpcore
from pfdensity.arith import arithmetic_functions
from pfdensity.pfsearch import gcd_profile, max_product_free, random_product_free

n = 12
primal = lpcore.build_primal(n)
print(lpcore.write_lp(primal))

p = lpcore.solve(primal)
d = lpcore.solve(lpcore.build_dual(n))
print("L_P =", p.objective_value, " L_D =", d.objective_value)
print("primal optimum at", {k: str(v) for k, v in p.assignment.items()})

# The all-2/3 point is always feasible, which gives L_P >= (2/3)(sigma(n)/n - 1).
for n in (6, 12, 30, 60, 120, 360, 720):
    lower = lpcore.primal_lower_bound(n)
    opt = lpcore.primal_optimum(n)
    trivial = Fraction(arithmetic_functions(n).sigma, n) - 1
    print(f"{n:4d}  2/3-point {str(lower):>8}  L_P {str(opt):>8}  sigma/n - 1 {str(trivial):>8}")

# Any product-free set gives a feasible primal point through its gcd profile.
rng = np.random.default_rng(7)
n = 36
model = lpcore.build_primal(n)
for _ in range(5):
    S = random_product_free(n, rng)
    pt = gcd_profile(S).primal_point()
    print(len(S), model.is_feasible(pt), model.evaluate(pt))
print("exact best:", max_product_free(n).density)

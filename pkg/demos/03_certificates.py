"""Mass-shifting dual certificates: build one, check it, break it, and bound D(n)."""

import json
from dataclasses import replace
from fractions import Fraction

from pfdensity import certificate, lpcore
from pfdensity.arith import factorize, sigma_ratio

# A hand-sized certificate. X = 4, k = 1 puts pair mass on {2, 3}.
cert = certificate.build_certificate(4, 144, 1)
print("A =", cert.A, " S_k =", cert.S_k, " Q_k =", cert.Q_k)
print("objective", cert.objective, "vs trivial", sigma_ratio(factorize(144)) - 1)
print("simplex optimum", lpcore.primal_optimum(144))
for c in cert.report.checks:
    print(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}  {c.detail}")

# The JSON document is enough for someone else to re-check it.
doc = cert.to_json()
print(json.dumps({k: doc[k] for k in ("X", "k", "A", "objective", "bound")}))

# Lower A to 1 and the beta_2 row goes negative.
bad = certificate.verify_feasibility(replace(cert, A=Fraction(1), report=None))
print("tampered feasible?", bad.feasible, "witness u =", bad.witness)

# End-to-end upper bounds. For realistic n the critical k is 0, so the
# certificate is the trivial one and the bound is (phi(N)/N)(sigma(N)/N).
for n in (6, 20, 100, 10**4, 10**6):
    rep = certificate.density_upper_bound(n)
    print(n, "X =", rep.X, "k =", rep.k, "bound ~", float(rep.certified_upper_bound_on_DN))

# The growth-equivalent quantities behind the choice of k, at k = 1.
for row in certificate.level_mass_monitor([10**3, 10**5, 10**6]):
    print(row["X"], {k: round(v, 3) for k, v in row["quantities"].items()})

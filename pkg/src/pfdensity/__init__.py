"""Maximal densities of product-free sets in Z/nZ.

Exact search for small moduli, exact linear-programming upper bounds with
checkable dual certificates, and explicit product-free families giving lower
bounds.
"""

from .arith import Factorization, auxiliary_modulus, critical_k, factorize
from .certificate import DualCertificate, build_certificate, density_upper_bound, verify_feasibility
from .construction import build_family, verify_product_free_structural
from .lpcore import build_dual, build_primal, primal_optimum, solve
from .pfsearch import ResidueSet, is_product_free, max_product_free

__all__ = [
    "DualCertificate",
    "Factorization",
    "ResidueSet",
    "auxiliary_modulus",
    "build_certificate",
    "build_dual",
    "build_family",
    "build_primal",
    "critical_k",
    "density_upper_bound",
    "factorize",
    "is_product_free",
    "max_product_free",
    "primal_optimum",
    "solve",
    "verify_feasibility",
    "verify_product_free_structural",
]

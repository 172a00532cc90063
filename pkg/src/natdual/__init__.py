"""Admissibility of quasi-identities in finitely generated quasivarieties,
decided in free algebras or, through a natural duality, in the much
smaller algebras produced by the test spaces method."""

from .admissibility import CheckReport, check_validity, counterexample_substitution, is_admissible, sample_quasi_identities
from .algebra import AlgebraError, FiniteAlgebra, Homomorphism, Signature, make_algebra, product
from .free import BudgetExceeded, FreeAlgebra, free_algebra
from .quasivariety import in_ISP, min_gen_set_bfs, min_gen_set_dfs, sub_pre_hom
from .terms import App, Identity, QuasiIdentity, Var

__all__ = [
    "AlgebraError",
    "App",
    "BudgetExceeded",
    "CheckReport",
    "FiniteAlgebra",
    "FreeAlgebra",
    "Homomorphism",
    "Identity",
    "QuasiIdentity",
    "Signature",
    "Var",
    "check_validity",
    "counterexample_substitution",
    "free_algebra",
    "in_ISP",
    "is_admissible",
    "make_algebra",
    "min_gen_set_bfs",
    "min_gen_set_dfs",
    "product",
    "sample_quasi_identities",
    "sub_pre_hom",
]

"""Order-separation certificates for free products of groups.

Given two factors (finite by multiplication table, or infinite cyclic) and a
list of pairwise non-conjugate-up-to-inversion elements, the engine
constructs a homomorphism onto a finite permutation group under which the
images have pairwise distinct orders, and independently verifies the result.
"""

from .errors import OrderSepError
from .groupcore import FiniteGroup, Permutation, cyclic_group, perm_order, validate_group
from .words import Factors, FactorSpec, NormalForm, finite_factors, normalize

__all__ = [
    "OrderSepError",
    "FiniteGroup",
    "Permutation",
    "cyclic_group",
    "perm_order",
    "validate_group",
    "Factors",
    "FactorSpec",
    "NormalForm",
    "finite_factors",
    "normalize",
]

"""Finite computations with tensors of finite sets and functors on FinSet,
relational rigidity checks, and sampled analysis of encodings over ℕ."""

from .finset import FinFunction, compose, enumerate_functions, factor_elementary
from .functor import (
    TruncatedFunctor,
    builtin,
    ine2_functor,
    ine_functor,
    iota_star,
    is_in_essential_image,
    load_functor,
    power_set_functor,
    representable,
    restrict,
)
from .tensor import Tensor, presheaf_tensor, tensor, verify_section2

__version__ = "0.1.0"

__all__ = [
    "FinFunction",
    "compose",
    "enumerate_functions",
    "factor_elementary",
    "TruncatedFunctor",
    "builtin",
    "ine2_functor",
    "ine_functor",
    "iota_star",
    "is_in_essential_image",
    "load_functor",
    "power_set_functor",
    "representable",
    "restrict",
    "Tensor",
    "presheaf_tensor",
    "tensor",
    "verify_section2",
]

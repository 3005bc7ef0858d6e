"""Toeplitz and Fejer-Riesz operator systems: separability, duality and witnesses."""
from .circulant import GeneralizedCirculant, circulant_corner_test, circulant_expectation, u_theta
from .fejer_riesz import (
    BivariateTrigPoly,
    TrigPoly,
    evaluate,
    extremal_test,
    fejer_riesz_factorize,
    is_nonneg_on_circle,
)
from .separability import gurvits_decompose, moment_extension, separate_2xN
from .toeplitz import (
    BlockToeplitz,
    ToeplitzMatrix,
    caratheodory_decompose,
    pure_toeplitz,
    r_basis,
    r_n_separable_decomposition,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateTrigPoly",
    "BlockToeplitz",
    "GeneralizedCirculant",
    "ToeplitzMatrix",
    "TrigPoly",
    "caratheodory_decompose",
    "circulant_corner_test",
    "circulant_expectation",
    "evaluate",
    "extremal_test",
    "fejer_riesz_factorize",
    "gurvits_decompose",
    "is_nonneg_on_circle",
    "moment_extension",
    "pure_toeplitz",
    "r_basis",
    "r_n_separable_decomposition",
    "separate_2xN",
    "u_theta",
]

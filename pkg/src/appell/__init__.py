"""Biorthogonal Appell calculus on finite-dimensional product measures.

Typical use::

    from appell import Gaussian, Poisson, ProductMeasure, build
    sys = build(ProductMeasure((Poisson(1.0),)), N=8)
    sys.P(2, [3.0])          # Appell kernel P_2(x) at x = 3
"""
from .chaos import (
    ChaosFunctional,
    ChaosVector,
    dual_norm,
    embed_l2,
    exponential_vector,
    test_norm,
    to_appell,
    to_monomial,
)
from .errors import (
    AppellError,
    DegenerateMeasureError,
    DomainError,
    ExtractionError,
    MalformedGermError,
    ShapeError,
    SingularGermError,
    UnsupportedError,
)
from .measures import Gamma, Gaussian, Poisson, ProductMeasure, TwoPoint, Uniform
from .operators import (
    OperatorKernel,
    SymbolGerm,
    apply,
    cs_symbol,
    d_operator,
    growth_bound_check,
    measure_change_operator,
    norm_chain,
    reconstruct_blackbox,
    reconstruct_exact,
    symbol_series,
)
from .series import PowerSeries, exp_linear, mul, reciprocal
from .system import AppellSystem, build, e_mu_closed, e_mu_series, q_action, q_density_1d, q_pair, rho
from .tensor import BiSymTensor, HilbertScale, SymTensor, contract, pairing, scale_norm, symmetrize_product
from .transforms import (
    GermFunction,
    c_transform_integral,
    c_transform_series,
    gaussian_coincidence,
    inverse_s,
    s_transform,
    s_transform_series,
)

__all__ = [
    "AppellError",
    "AppellSystem",
    "apply",
    "BiSymTensor",
    "build",
    "c_transform_integral",
    "c_transform_series",
    "ChaosFunctional",
    "ChaosVector",
    "contract",
    "cs_symbol",
    "d_operator",
    "DegenerateMeasureError",
    "DomainError",
    "dual_norm",
    "e_mu_closed",
    "e_mu_series",
    "embed_l2",
    "exp_linear",
    "exponential_vector",
    "ExtractionError",
    "Gamma",
    "Gaussian",
    "gaussian_coincidence",
    "GermFunction",
    "growth_bound_check",
    "HilbertScale",
    "inverse_s",
    "MalformedGermError",
    "measure_change_operator",
    "mul",
    "norm_chain",
    "OperatorKernel",
    "pairing",
    "Poisson",
    "PowerSeries",
    "ProductMeasure",
    "q_action",
    "q_density_1d",
    "q_pair",
    "reciprocal",
    "reconstruct_blackbox",
    "reconstruct_exact",
    "rho",
    "s_transform",
    "s_transform_series",
    "scale_norm",
    "ShapeError",
    "SingularGermError",
    "symbol_series",
    "SymbolGerm",
    "symmetrize_product",
    "SymTensor",
    "test_norm",
    "to_appell",
    "to_monomial",
    "TwoPoint",
    "Uniform",
    "UnsupportedError",
]

__version__ = "0.1.0"

"""Shared test fixtures that depend on the package (oracles.py must not)."""
from __future__ import annotations


from appell import Gamma, Gaussian, Poisson, ProductMeasure, SymTensor, Uniform
from appell.chaos import ChaosVector
from appell.tensor import multi_indices, num_classes

ACCEPTANCE_LINES: dict[int, str] = {}

CATALOG_1D = {
    "gaussian": Gaussian(),
    "gaussian_shifted": Gaussian(0.5, 2.0),
    "poisson": Poisson(1.0),
    "poisson_rate3": Poisson(3.0),
    "gamma": Gamma(2.0, 1.0),
    "gamma_scaled": Gamma(1.5, 0.5),
    "uniform": Uniform(-1.0, 1.0),
}


def product(*components) -> ProductMeasure:
    return ProductMeasure(tuple(components))


def random_tensor(rng, n: int, d: int, complex_: bool = False) -> SymTensor:
    v = rng.standard_normal(num_classes(d, n))
    if complex_:
        v = v + 1j * rng.standard_normal(num_classes(d, n))
    return SymTensor(n, d, v)


def random_vector(sys, rng, degree: int | None = None) -> ChaosVector:
    degree = sys.N if degree is None else degree
    return ChaosVector(sys, [random_tensor(rng, n, sys.d) for n in range(degree + 1)])


def class_dict(T: SymTensor) -> dict:
    return dict(zip(multi_indices(T.d, T.degree), T.coeffs))

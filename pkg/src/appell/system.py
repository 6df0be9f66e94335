"""Biorthogonal Appell systems of a product measure.

The Appell polynomials are the Taylor kernels of the normalized exponential
``e(xi; x) = exp<x, xi> / L(xi)`` where ``L`` is the Laplace transform of the
measure.  With ``r`` the coefficients of ``1/L``, the degree-``n`` kernel has
class entries

    P_n(x)[gamma] = sum_{alpha <= gamma} gamma! r_{gamma - alpha} / alpha! * x^alpha,

a unitriangular table.  The dual Q-system is never tabulated pointwise: a
generalized function is kept as its coefficient tensors and acts on test
functions through the biorthogonality relation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial

import numpy as np

from .chaos import ChaosFunctional, ChaosVector
from .errors import DegenerateMeasureError, DomainError, ShapeError, SingularGermError, UnsupportedError
from .measures import ProductMeasure
from .series import DEFAULT_ORDER, PowerSeries, graded_offsets, graded_position
from .tensor import HilbertScale, SymTensor, graded_indices, mi_factorial, multi_indices, pairing, \
    multiplicities


@dataclass(frozen=True, eq=False)
class AppellSystem:
    """P-kernels of a measure up to degree ``N``.

    The reciprocal Laplace series and the kernel tables are computed on first
    use, so a system of high order is cheap when only its shape and scale are
    needed (e.g. for norms of exponential vectors).
    """

    measure: ProductMeasure
    N: int
    scale: HilbertScale

    @cached_property
    def recip(self) -> PowerSeries:
        """Coefficients of ``1 / L`` up to degree ``N``."""
        return self.measure.laplace_series(self.N).reciprocal()

    @cached_property
    def recip_derivatives(self) -> np.ndarray:
        """``alpha! r_alpha``, the derivatives of ``1 / L`` at 0, in graded order.

        Solved from ``sum_{beta <= alpha} C(alpha, beta) m_beta s_{alpha - beta} = delta_{alpha 0}``
        with the raw moments ``m``.  Integer moments give integer derivatives
        without rounding, which the ``r_alpha`` route cannot guarantee.
        """
        return _reciprocal_derivatives(self.measure.moment_vector(self.N), self.d, self.N)

    @cached_property
    def kernels(self) -> tuple[np.ndarray, ...]:
        return tuple(_kernel_table(self.recip_derivatives, self.d, n) for n in range(self.N + 1))

    @property
    def d(self) -> int:
        return self.measure.d

    def kernel(self, n: int) -> np.ndarray:
        """``K_n[gamma, alpha]`` with rows over degree-``n`` classes, columns over ``|alpha| <= n``."""
        return self.kernels[n]

    def P(self, n: int, x) -> SymTensor:
        """The Appell kernel ``P_n(x)`` as a symmetric tensor; ``x`` may be complex."""
        x = np.atleast_1d(np.asarray(x))
        if x.shape != (self.d,):
            raise ShapeError(f"expected a point of dimension {self.d}")
        A = np.array(graded_indices(self.d, n)).reshape(-1, self.d)
        return SymTensor(n, self.d, self.kernels[n] @ np.prod(x[None, :] ** A, axis=1))

    def polynomial(self, n: int, gamma) -> PowerSeries:
        """The scalar polynomial ``x -> P_n(x)[gamma]`` in monomial form."""
        row = self.kernels[n][multi_indices(self.d, n).index(tuple(gamma))]
        c = np.zeros(graded_offsets(self.d, self.N)[-1])
        c[:row.size] = row
        return PowerSeries(self.d, self.N, c)

    @cached_property
    def basis_matrix(self) -> np.ndarray:
        """Upper-triangular map from flattened Appell coefficients to monomial coefficients."""
        off = graded_offsets(self.d, self.N)
        A = np.zeros((off[-1], off[-1]), dtype=self.recip.coeffs.dtype)
        for n in range(self.N + 1):
            A[:off[n + 1], off[n]:off[n + 1]] = (self.kernels[n] * multiplicities(self.d, n)[:, None]).T
        A.setflags(write=False)
        return A

    @property
    def germ_radii(self) -> np.ndarray:
        return self.measure.germ_radii


def build(measure: ProductMeasure, N: int = DEFAULT_ORDER, scale: HilbertScale | None = None) -> AppellSystem:
    """Construct the Appell system of ``measure`` truncated at degree ``N``."""
    d = measure.d
    scale = scale or HilbertScale.default(d)
    if scale.d != d:
        raise ShapeError(f"scale has dimension {scale.d}, measure has {d}")
    if N < 0:
        raise ValueError("truncation N must be non-negative")
    if not measure.check_nondegenerate(N):
        raise DegenerateMeasureError(
            f"non-degeneracy check failed: some nonzero polynomial of degree <= {N} "
            "vanishes almost everywhere")
    if not measure.laplace_radius > 0:
        raise DomainError("Laplace transform has zero radius of convergence")
    return AppellSystem(measure, N, scale)


def _binomial(alpha, beta) -> int:
    return mi_factorial(alpha) // (mi_factorial(beta) * mi_factorial(tuple(a - b for a, b in zip(alpha, beta))))


def _reciprocal_derivatives(moments: np.ndarray, d: int, N: int) -> np.ndarray:
    idx = graded_indices(d, N)
    pos = graded_position(d, N)
    s = np.zeros(len(idx), dtype=np.result_type(moments.dtype, np.float64))
    s[0] = 1.0 / moments[0]
    for k, alpha in enumerate(idx[1:], start=1):
        acc = 0.0
        for beta in idx[1:k + 1]:
            if all(b <= a for a, b in zip(alpha, beta)):
                diff = tuple(a - b for a, b in zip(alpha, beta))
                acc += _binomial(alpha, beta) * moments[pos[beta]] * s[pos[diff]]
        s[k] = -acc / moments[0]
    return s


def _kernel_table(derivs: np.ndarray, d: int, n: int) -> np.ndarray:
    """``K_n[gamma, alpha] = C(gamma, alpha) s_{gamma - alpha}`` with ``s_beta = beta! r_beta``."""
    rpos = graded_position(d, n)
    cols = graded_indices(d, n)
    K = np.zeros((len(multi_indices(d, n)), len(cols)), dtype=derivs.dtype)
    for g, gamma in enumerate(multi_indices(d, n)):
        for j, alpha in enumerate(cols):
            if all(a <= c for a, c in zip(alpha, gamma)):
                diff = tuple(c - a for a, c in zip(alpha, gamma))
                K[g, j] = _binomial(gamma, alpha) * derivs[rpos[diff]]
    K.setflags(write=False)
    return K


def _check_xi(sys: AppellSystem, xi) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi))
    if xi.shape != (sys.d,):
        raise ShapeError(f"expected a point of dimension {sys.d}")
    return xi


def e_mu_closed(sys: AppellSystem, xi, x):
    """``exp<x, xi> / L(xi)`` with the Laplace transform in closed form."""
    xi = _check_xi(sys, xi)
    x = _check_xi(sys, x)
    if np.any(np.abs(xi) >= sys.germ_radii):
        raise DomainError(f"xi={xi} lies outside the germ polydisc of radii {sys.germ_radii}")
    L = sys.measure.laplace(xi)
    if L == 0:
        raise SingularGermError("Laplace transform vanishes at xi")
    v = complex(np.exp(np.dot(x, xi)) / L)
    return v.real if v.imag == 0 else v


def e_mu_series(sys: AppellSystem, xi, x):
    """``sum_{n <= N} <P_n(x) | xi^{(x)n}> / n!``."""
    xi = _check_xi(sys, xi)
    total = 0.0
    for n in range(sys.N + 1):
        total = total + pairing(sys.P(n, x), SymTensor.rank_one(xi, n)) / factorial(n)
    v = complex(total)
    return v.real if v.imag == 0 else v


def q_pair(sys: AppellSystem, Phi: ChaosFunctional, phi: ChaosVector):
    """Dual pairing ``<<Phi, phi>> = sum_n n! <Phi_n | phi_n>``."""
    for obj in (Phi, phi):
        if obj.sys.N != sys.N or obj.sys.d != sys.d:
            raise ShapeError("truncation or dimension mismatch in q_pair")
    total = 0.0
    for n in range(sys.N + 1):
        total = total + factorial(n) * pairing(Phi[n], phi[n])
    v = complex(total)
    return v.real if v.imag == 0 else v


def q_action(sys: AppellSystem, Phi_n: SymTensor, poly: PowerSeries):
    """``<<Q_n(Phi_n), poly>>`` straight from ``Q_n(Phi_n) = D(Phi_n)^* 1``.

    Applies the differential operator to the monomial expansion of ``poly``
    and integrates against exact moments.  Independent of the biorthogonality
    shortcut used by :func:`q_pair`.
    """
    if poly.d != sys.d:
        raise ShapeError("polynomial dimension does not match the system")
    D = poly.derivative(Phi_n)
    moments = sys.measure.moment_vector(poly.order)
    v = complex(np.dot(D.coeffs, moments))
    return v.real if v.imag == 0 else v


def q_density_1d(sys: AppellSystem, n: int, x):
    """``Q_n(x) = (-1)^n p^(n)(x) / p(x)`` for a one-dimensional smooth density."""
    if sys.d != 1:
        raise UnsupportedError("the density formula is one-dimensional")
    comp = sys.measure.components[0]
    if not comp.has_smooth_density:
        raise UnsupportedError(f"{comp.kind} has no smooth density on the whole line")
    x = np.asarray(x, dtype=float)
    return (-1) ** n * comp.density_derivative(n, x) / comp.density(x)


def rho(sys: AppellSystem, xi) -> ChaosFunctional:
    """Generalized Radon-Nikodym density: coefficients ``(-1)^n xi^{(x)n} / n!``."""
    xi = _check_xi(sys, xi)
    return ChaosFunctional(sys, [SymTensor.rank_one(xi, n) * ((-1) ** n / factorial(n))
                                 for n in range(sys.N + 1)])

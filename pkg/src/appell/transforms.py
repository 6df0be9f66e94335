"""S- and C-transforms on truncated chaos data.

The S-transform of a generalized function is only defined near the origin:
for ``Phi`` of order ``(p, q)`` the normalized exponential ``e(theta; .)`` is a
test function of that order only while ``|theta|_p^2 < 2^{-q}``.  A
:class:`GermFunction` records that region next to the series.  Two bounds
appear for the same neighbourhood depending on context (``2^{-q}`` for the
S-transform, ``2^{-q-1}`` for operator symbols); the bound is an explicit
argument here rather than baked in.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .chaos import ChaosFunctional, ChaosVector, embed_l2, to_monomial
from .errors import DomainError, ShapeError, UnsupportedError
from .measures import Gaussian
from .series import PowerSeries, evaluate_many
from .tensor import HilbertScale, SymTensor, pairing


def s_bound(q: float) -> float:
    return 2.0 ** (-q)


def symbol_bound(q: float) -> float:
    return 2.0 ** (-q - 1)


@dataclass(frozen=True)
class GermFunction:
    """Truncated germ with its validity region ``{theta : |theta|_p^2 < bound}``."""

    series: PowerSeries
    scale: HilbertScale
    p: float = 0.0
    q: float = 0.0
    bound: float | None = None

    @property
    def radius_bound(self) -> float:
        return s_bound(self.q) if self.bound is None else self.bound

    def contains(self, theta) -> bool:
        return self.scale.norm(theta, self.p) ** 2 < self.radius_bound

    def __call__(self, theta, check_domain: bool = True):
        if check_domain and not self.contains(theta):
            raise DomainError(f"|theta|_{self.p}^2 >= {self.radius_bound}")
        return self.series(theta)

    def to_json(self) -> dict:
        terms = []
        for alpha, v in self.series.to_dict().items():
            v = complex(v)
            terms.append({"alpha": list(alpha), "re": v.real, "im": v.imag})
        return {"d": self.series.d, "N": self.series.order, "p": self.p, "q": self.q,
                "bound": self.radius_bound, "weights": list(self.scale.weights), "terms": terms}

    @classmethod
    def from_json(cls, data: dict) -> "GermFunction":
        d, N = int(data["d"]), int(data["N"])
        terms = {tuple(t["alpha"]): complex(t["re"], t.get("im", 0.0)) for t in data["terms"]}
        if terms and all(v.imag == 0 for v in terms.values()):
            terms = {k: v.real for k, v in terms.items()}
        series = PowerSeries.from_dict(d, N, terms)
        return cls(series, HilbertScale(tuple(data["weights"])), data.get("p", 0.0),
                   data.get("q", 0.0), data.get("bound"))


def s_transform(Phi: ChaosFunctional, theta, p: float = 0.0, q: float = 0.0,
                bound: float | None = None, check_domain: bool = True):
    """``(S Phi)(theta) = sum_n <Phi_n | theta^{(x)n}>``.

    Raises :class:`DomainError` when ``|theta|_p^2 >= bound`` (default
    ``2^{-q}``) unless ``check_domain`` is false.  Truncated sums converge
    everywhere, so the check only enforces locality of the transform.
    """
    theta = np.atleast_1d(np.asarray(theta))
    if theta.shape != (Phi.sys.d,):
        raise ShapeError(f"expected a point of dimension {Phi.sys.d}")
    limit = s_bound(q) if bound is None else bound
    if check_domain and Phi.sys.scale.norm(theta, p) ** 2 >= limit:
        raise DomainError(f"|theta|_{p}^2 >= {limit}: outside the S-transform neighbourhood")
    total = 0.0
    for n, t in enumerate(Phi.coeffs):
        total = total + pairing(t, SymTensor.rank_one(theta, n))
    v = complex(total)
    return v.real if v.imag == 0 else v


def s_transform_series(Phi: ChaosFunctional, p: float = 0.0, q: float = 0.0,
                       bound: float | None = None) -> GermFunction:
    series = PowerSeries.from_tensors(Phi.coeffs)
    return GermFunction(series, Phi.sys.scale, p, q, bound)


def inverse_s(G: GermFunction, sys) -> ChaosFunctional:
    """The unique generalized function whose S-transform series is ``G``."""
    if G.series.d != sys.d:
        raise ShapeError("germ and system dimensions differ")
    if G.series.degree() > sys.N:
        raise ShapeError(f"germ degree {G.series.degree()} exceeds truncation N={sys.N}")
    return ChaosFunctional(sys, G.series.truncate(sys.N).to_tensors())


def c_transform_series(phi: ChaosVector, xi):
    """``(C phi)(xi) = sum_n <xi^{(x)n} | phi_n>``, the pairing with ``rho(-xi)``."""
    xi = np.atleast_1d(np.asarray(xi))
    if xi.shape != (phi.sys.d,):
        raise ShapeError(f"expected a point of dimension {phi.sys.d}")
    total = 0.0
    for n, t in enumerate(phi.coeffs):
        total = total + pairing(SymTensor.rank_one(xi, n), t)
    v = complex(total)
    return v.real if v.imag == 0 else v


def c_transform_integral(phi: ChaosVector, xi, order: int | None = None):
    """``int phi(x + xi) dmu(x)`` by quadrature of the shifted polynomial."""
    xi = np.atleast_1d(np.asarray(xi))
    if xi.shape != (phi.sys.d,):
        raise ShapeError(f"expected a point of dimension {phi.sys.d}")
    if np.iscomplexobj(xi) and np.any(xi.imag):
        raise UnsupportedError("the integral form needs a real shift")
    poly = to_monomial(phi)
    pts, w = phi.sys.measure.quadrature(order or phi.N // 2 + 2)
    v = complex(np.dot(w, evaluate_many(poly, pts + xi.real)))
    return v.real if v.imag == 0 else v


def default_grid(d: int) -> np.ndarray:
    """Sample points in ``[-1, 1]^d`` plus a few complex ones."""
    axis = np.linspace(-1.0, 1.0, 5)
    real = np.array(list(itertools.product(axis, repeat=d)))
    cplx = np.array([np.full(d, 0.5j), np.full(d, 0.3 - 0.4j), np.linspace(-0.6j, 0.6, d)])
    return np.concatenate([real.astype(complex), cplx])


def cs_deviation(phi: ChaosVector, grid=None) -> float:
    """``sup |C phi(theta) - S(embed phi)(theta)|`` over ``grid``."""
    grid = default_grid(phi.sys.d) if grid is None else np.asarray(grid)
    Phi = embed_l2(phi)
    return max(abs(c_transform_series(phi, th) - s_transform(Phi, th, check_domain=False))
               for th in grid)


def gaussian_coincidence(phi: ChaosVector, grid=None) -> float:
    """Max deviation between the C- and S-transforms for the canonical Gaussian.

    The two transforms coincide only when the measure is Gaussian with unit
    covariance, i.e. when its covariance is the inner product of the scale's
    base space.
    """
    comps = phi.sys.measure.components
    if not all(isinstance(c, Gaussian) and c.variance == 1.0 for c in comps):
        raise UnsupportedError("C/S coincidence holds for the unit-covariance Gaussian only")
    return cs_deviation(phi, grid)

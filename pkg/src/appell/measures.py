"""Catalog of product probability measures on R^d.

Every catalog measure has a Laplace transform analytic at the origin, so the
normalized exponential and the Appell polynomials built from it exist.  New
one-dimensional measures are added by subclassing :class:`ComponentMeasure`
and registering the class in ``CATALOG``; the product structure then gives
moments, Laplace series and tensorized quadrature for free.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import hermite_e, legendre
from numpy.polynomial import polynomial as P
from scipy import special

from .errors import ShapeError, UnsupportedError
from .series import PowerSeries, factorial_weights, graded_indices

MAX_MOMENT_ORDER = 64
POISSON_TAIL = 1e-14
MAX_QUADRATURE_DIM = 3


class ComponentMeasure:
    """One-dimensional factor of a product measure."""

    kind: str = ""
    laplace_radius: float = math.inf
    support_size: float = math.inf
    has_smooth_density: bool = False

    def moments(self, kmax: int) -> np.ndarray:
        """``[m_0, ..., m_kmax]``."""
        if kmax > MAX_MOMENT_ORDER:
            raise ValueError(f"moments are only available up to order {MAX_MOMENT_ORDER}")
        return self._moments(kmax)

    def _moments(self, kmax: int) -> np.ndarray:
        raise NotImplementedError

    def laplace(self, z):
        """Closed form of ``E exp(z x)``."""
        raise NotImplementedError

    @property
    def reciprocal_radius(self) -> float:
        """Distance from 0 to the nearest complex zero of the Laplace transform."""
        return math.inf

    @property
    def germ_radius(self) -> float:
        """Radius of the disc where ``exp(x z) / L(z)`` is holomorphic."""
        return min(self.laplace_radius, self.reciprocal_radius)

    def quadrature(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and probability weights exact on polynomials of degree ``2*order - 1``."""
        raise NotImplementedError

    def density(self, x):
        raise UnsupportedError(f"{self.kind} has no smooth density on the whole line")

    def density_derivative(self, n: int, x):
        raise UnsupportedError(f"{self.kind} has no smooth density on the whole line")

    def to_dict(self) -> dict:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class Gaussian(ComponentMeasure):
    mean: float = 0.0
    variance: float = 1.0

    kind = "gaussian"
    has_smooth_density = True

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("Gaussian variance must be positive")

    def _moments(self, kmax):
        m = np.zeros(kmax + 1)
        m[0] = 1.0
        if kmax >= 1:
            m[1] = self.mean
        for k in range(2, kmax + 1):
            m[k] = self.mean * m[k - 1] + (k - 1) * self.variance * m[k - 2]
        return m

    def laplace(self, z):
        return np.exp(self.mean * z + 0.5 * self.variance * z * z)

    def quadrature(self, order):
        x, w = hermite_e.hermegauss(order)
        return self.mean + math.sqrt(self.variance) * x, w / math.sqrt(2 * math.pi)

    def density(self, x):
        x = np.asarray(x)
        return np.exp(-0.5 * (x - self.mean) ** 2 / self.variance) / math.sqrt(
            2 * math.pi * self.variance)

    def density_derivative(self, n, x):
        """``p^(n)(x)`` by differentiating ``h(x) p(x)`` with ``p' = -(x - mean)/var p``."""
        h = np.array([1.0])
        slope = np.array([self.mean, -1.0]) / self.variance
        for _ in range(n):
            h = P.polyadd(P.polyder(h) if h.size > 1 else np.array([0.0]), P.polymul(h, slope))
        return P.polyval(np.asarray(x), h) * self.density(x)


@dataclass(frozen=True)
class Gamma(ComponentMeasure):
    shape: float = 1.0
    scale: float = 1.0

    kind = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("Gamma shape and scale must be positive")

    @property
    def laplace_radius(self):
        return 1.0 / self.scale

    def _moments(self, kmax):
        m = np.ones(kmax + 1)
        for k in range(1, kmax + 1):
            m[k] = m[k - 1] * self.scale * (self.shape + k - 1)
        return m

    def laplace(self, z):
        return (1.0 - self.scale * np.asarray(z, dtype=complex)) ** (-self.shape)

    def quadrature(self, order):
        x, w = special.roots_genlaguerre(order, self.shape - 1.0)
        return self.scale * x, w / special.gamma(self.shape)


@dataclass(frozen=True)
class Poisson(ComponentMeasure):
    rate: float = 1.0

    kind = "poisson"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("Poisson rate must be positive")

    def _moments(self, kmax):
        # Touchard: m_{n+1} = rate * sum_j C(n, j) m_j
        m = np.zeros(kmax + 1)
        m[0] = 1.0
        for n in range(kmax):
            m[n + 1] = self.rate * sum(math.comb(n, j) * m[j] for j in range(n + 1))
        return m

    def laplace(self, z):
        return np.exp(self.rate * np.expm1(z))

    def quadrature(self, order):
        # direct summation; the cutoff accounts for the polynomial weight k^deg
        deg = max(2 * order - 1, 0)
        nodes, weights = [], []
        log_pmf = -self.rate
        mass, acc = 0.0, 0.0
        k = 0
        while True:
            pmf = math.exp(log_pmf)
            nodes.append(float(k))
            weights.append(pmf)
            mass += pmf
            term = pmf * float(k) ** deg
            acc += term
            if k > self.rate + deg and 1.0 - mass < POISSON_TAIL and term <= 1e-17 * acc:
                break
            k += 1
            log_pmf += math.log(self.rate) - math.log(k)
        return np.array(nodes), np.array(weights)

    @property
    def support_size(self):
        return math.inf


@dataclass(frozen=True)
class Uniform(ComponentMeasure):
    a: float = -1.0
    b: float = 1.0

    kind = "uniform"

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("Uniform needs a < b")

    @property
    def reciprocal_radius(self):
        return 2 * math.pi / (self.b - self.a)

    def _moments(self, kmax):
        k = np.arange(kmax + 1)
        return (self.b ** (k + 1) - self.a ** (k + 1)) / ((k + 1) * (self.b - self.a))

    def laplace(self, z):
        z = np.asarray(z, dtype=complex)
        w = (self.b - self.a) * z
        safe = np.where(w == 0, 1.0, w)
        out = np.exp(self.a * z) * np.where(w == 0, 1.0, np.expm1(safe) / safe)
        return out

    def quadrature(self, order):
        x, w = legendre.leggauss(order)
        return 0.5 * (self.b - self.a) * x + 0.5 * (self.a + self.b), 0.5 * w


@dataclass(frozen=True)
class TwoPoint(ComponentMeasure):
    x1: float = -1.0
    x2: float = 1.0
    p1: float = 0.5

    kind = "two_point"
    support_size = 2

    def __post_init__(self):
        if self.x1 == self.x2:
            raise ValueError("TwoPoint atoms must differ")
        if not 0 < self.p1 < 1:
            raise ValueError("TwoPoint needs 0 < p1 < 1")

    @property
    def reciprocal_radius(self):
        # zeros of p1 e^{x1 z} + p2 e^{x2 z}
        p2 = 1.0 - self.p1
        return abs(complex(math.log(p2 / self.p1), math.pi)) / abs(self.x1 - self.x2)

    def _moments(self, kmax):
        k = np.arange(kmax + 1)
        return self.p1 * self.x1 ** k + (1 - self.p1) * self.x2 ** k

    def laplace(self, z):
        z = np.asarray(z, dtype=complex)
        return self.p1 * np.exp(self.x1 * z) + (1 - self.p1) * np.exp(self.x2 * z)

    def quadrature(self, order):
        return np.array([self.x1, self.x2]), np.array([self.p1, 1 - self.p1])


CATALOG: dict[str, type[ComponentMeasure]] = {
    "gaussian": Gaussian,
    "gamma": Gamma,
    "poisson": Poisson,
    "uniform": Uniform,
    "two_point": TwoPoint,
}


def component_from_dict(spec: dict) -> ComponentMeasure:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in CATALOG:
        raise ValueError(f"unknown measure kind {kind!r}; choose from {sorted(CATALOG)}")
    try:
        return CATALOG[kind](**spec)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from None


@dataclass(frozen=True)
class ProductMeasure:
    """Product of one-dimensional catalog measures, one per coordinate."""

    components: tuple[ComponentMeasure, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a product measure needs at least one component")
        object.__setattr__(self, "components", comps)

    @classmethod
    def iid(cls, component: ComponentMeasure, d: int) -> "ProductMeasure":
        return cls((component,) * d)

    @classmethod
    def from_dicts(cls, specs: Sequence[dict]) -> "ProductMeasure":
        return cls(tuple(component_from_dict(s) for s in specs))

    def to_dicts(self) -> list[dict]:
        return [c.to_dict() for c in self.components]

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def laplace_radius(self) -> float:
        return min(c.laplace_radius for c in self.components)

    @property
    def germ_radii(self) -> np.ndarray:
        return np.array([c.germ_radius for c in self.components])

    def is_gaussian(self) -> bool:
        return all(isinstance(c, Gaussian) for c in self.components)

    def moment(self, alpha: Sequence[int]):
        """Mixed moment ``E[x^alpha]``; factorizes over coordinates."""
        if len(alpha) != self.d:
            raise ShapeError(f"multi-index {tuple(alpha)} has wrong length for d={self.d}")
        out = 1.0
        for c, a in zip(self.components, alpha):
            if a > MAX_MOMENT_ORDER:
                raise ValueError(f"moment order {a} beyond stored range {MAX_MOMENT_ORDER}")
            out *= c.moments(int(a))[int(a)]
        return out

    def moment_vector(self, K: int) -> np.ndarray:
        """Moments ``E[x^alpha]`` for all ``|alpha| <= K`` in graded order."""
        tables = [c.moments(K) for c in self.components]
        return np.array([math.prod(t[a] for t, a in zip(tables, alpha))
                         for alpha in graded_indices(self.d, K)])

    def laplace(self, xi):
        xi = np.atleast_1d(np.asarray(xi))
        if xi.shape != (self.d,):
            raise ShapeError(f"expected a point of dimension {self.d}")
        v = complex(np.prod([c.laplace(z) for c, z in zip(self.components, xi)]))
        return v.real if v.imag == 0 else v

    def laplace_series(self, N: int) -> PowerSeries:
        """Taylor series of the Laplace transform: ``c_alpha = E[x^alpha] / alpha!``."""
        c = self.moment_vector(N) / factorial_weights(self.d, N)
        return PowerSeries(self.d, N, c, radius_hint=self.laplace_radius)

    def quadrature(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Tensorized rule: points of shape ``(M, d)`` and weights of shape ``(M,)``."""
        if self.d > MAX_QUADRATURE_DIM:
            raise UnsupportedError(f"tensorized quadrature supports d <= {MAX_QUADRATURE_DIM}")
        rules = [c.quadrature(order) for c in self.components]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        wgrid = np.meshgrid(*[r[1] for r in rules], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        w = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
        return pts, w

    def integrate(self, f: Callable[[np.ndarray], np.ndarray], order: int):
        """``int f dmu`` for ``f`` vectorized over points of shape ``(M, d)``."""
        pts, w = self.quadrature(order)
        v = complex(np.dot(w, np.asarray(f(pts))))
        return v.real if v.imag == 0 else v

    def check_nondegenerate(self, N: int) -> bool:
        """True when no nonzero polynomial of degree ``<= N`` vanishes almost everywhere.

        For a product measure this holds iff every factor has more than ``N``
        support points.  This is a degree-bounded truncation of the full
        non-degeneracy condition, not an equivalent of it.
        """
        return all(c.support_size > N for c in self.components)

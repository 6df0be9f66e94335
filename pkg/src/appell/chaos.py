"""Chaos expansions of test functions and generalized functions.

A :class:`ChaosVector` is ``phi(x) = sum_n <P_n(x) | phi_n>`` in the Appell
basis of a system; a :class:`ChaosFunctional` is ``Phi = sum_n Q_n(Phi_n)``
in the dual basis.  Both carry exactly ``N + 1`` graded slots.  The ``(p, q)``
norms are views on the same coefficient data and take ``p, q`` as arguments.
"""
from __future__ import annotations

from math import factorial
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ShapeError
from .series import PowerSeries, graded_offsets
from .tensor import SymTensor, check_family, factorial_as, index_position, pairing, real_dtype, scale_norm

if TYPE_CHECKING:
    from .system import AppellSystem


class _Graded:
    __slots__ = ("sys", "_coeffs")

    def __init__(self, sys: "AppellSystem", coeffs: Sequence[SymTensor] | None = None):
        if coeffs is None:
            coeffs = [SymTensor.zeros(n, sys.d) for n in range(sys.N + 1)]
        coeffs = list(coeffs)
        if len(coeffs) > sys.N + 1:
            raise ShapeError(f"{len(coeffs)} slots exceed truncation N={sys.N}")
        coeffs += [SymTensor.zeros(n, sys.d) for n in range(len(coeffs), sys.N + 1)]
        self.sys = sys
        self._coeffs = tuple(check_family(coeffs, sys.d))

    @classmethod
    def from_dict(cls, sys, terms: dict[int, SymTensor | complex]):
        """Build from ``{n: tensor}``; scalars are allowed for degree 0 and for d = 1."""
        coeffs = [SymTensor.zeros(n, sys.d) for n in range(sys.N + 1)]
        for n, t in terms.items():
            if n > sys.N:
                raise ShapeError(f"degree {n} exceeds truncation N={sys.N}")
            if not isinstance(t, SymTensor):
                t = SymTensor(n, sys.d, np.full(1, t)) if (n == 0 or sys.d == 1) else None
                if t is None:
                    raise ShapeError("scalar coefficients only make sense for degree 0 or d = 1")
            coeffs[n] = t
        return cls(sys, coeffs)

    @classmethod
    def from_flat(cls, sys, flat) -> "_Graded":
        off = graded_offsets(sys.d, sys.N)
        flat = np.asarray(flat)
        return cls(sys, [SymTensor(n, sys.d, flat[off[n]:off[n + 1]]) for n in range(sys.N + 1)])

    @property
    def coeffs(self) -> tuple[SymTensor, ...]:
        return self._coeffs

    @property
    def N(self) -> int:
        return self.sys.N

    def __getitem__(self, n: int) -> SymTensor:
        return self._coeffs[n]

    def flat(self) -> np.ndarray:
        return np.concatenate([t.coeffs for t in self._coeffs])

    def _same(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if other.sys is not self.sys and (other.sys.N, other.sys.d, other.sys.measure) != (
                self.sys.N, self.sys.d, self.sys.measure):
            raise ShapeError("coefficient families belong to different systems")

    def __add__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return type(self)(self.sys, [a + b for a, b in zip(self._coeffs, other._coeffs)])

    def __sub__(self, other):
        if self._same(other) is NotImplemented:
            return NotImplemented
        return type(self)(self.sys, [a - b for a, b in zip(self._coeffs, other._coeffs)])

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return type(self)(self.sys, [t * c for t in self._coeffs])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __repr__(self):
        return f"{type(self).__name__}(d={self.sys.d}, N={self.N})"

    def to_json(self) -> dict:
        out = []
        for t in self._coeffs:
            for alpha, v in t.to_dict().items():
                if v != 0:
                    out.append({"n": t.degree, "alpha": list(alpha), **_encode(v)})
        return {"d": self.sys.d, "N": self.N, "coeffs": out}

    @classmethod
    def from_json(cls, sys, data: dict):
        if data.get("d") != sys.d or data.get("N") != sys.N:
            raise ShapeError("serialized family does not match the system's d and N")
        flat = np.zeros(graded_offsets(sys.d, sys.N)[-1], dtype=complex)
        off = graded_offsets(sys.d, sys.N)
        for entry in data["coeffs"]:
            n = int(entry["n"])
            flat[off[n] + index_position(sys.d, n)[tuple(entry["alpha"])]] = _decode(entry)
        if not np.any(flat.imag):
            flat = flat.real
        return cls.from_flat(sys, flat)


def _encode(v) -> dict:
    v = complex(v)
    return {"re": v.real, "im": v.imag}


def _decode(entry) -> complex:
    return complex(entry["re"], entry.get("im", 0.0))


class ChaosVector(_Graded):
    """Test function ``sum_n <P_n | phi_n>`` of the system's measure."""

    __slots__ = ()

    def __call__(self, x):
        return evaluate(self, x)


class ChaosFunctional(_Graded):
    """Generalized function ``sum_n Q_n(Phi_n)`` of the system's measure."""

    __slots__ = ()


def exponential_vector(sys: "AppellSystem", eta) -> ChaosVector:
    """Coefficients ``eta^{(x)n} / n!`` of the normalized exponential ``e(eta; .)``.

    An ``eta`` of extended precision (``np.longdouble``) keeps high-degree
    coefficients representable beyond ``n = 170``.
    """
    dtype = real_dtype(eta)
    return ChaosVector(sys, [SymTensor.rank_one(eta, n) / factorial_as(n, dtype)
                             for n in range(sys.N + 1)])


def test_norm(phi: ChaosVector, p: float, q: float) -> float:
    """``||phi||_{p,q}^2 = sum_n (n!)^2 2^{qn} |phi_n|_p^2``.

    Summed in ascending ``n`` in the precision of the coefficients.
    """
    dtype = real_dtype(*(t.coeffs for t in phi.coeffs))
    s = np.zeros((), dtype=dtype)
    for n, t in enumerate(phi.coeffs):
        s = s + (factorial_as(n, dtype) * scale_norm(t, phi.sys.scale, p)) ** 2 * 2.0 ** (q * n)
    return np.sqrt(s)[()]


test_norm.__test__ = False


def dual_norm(Phi: ChaosFunctional, p: float, q: float) -> float:
    """``||Phi||_{-p,-q}^2 = sum_n 2^{-qn} |Phi_n|_{-p}^2``."""
    dtype = real_dtype(*(t.coeffs for t in Phi.coeffs))
    s = np.zeros((), dtype=dtype)
    for n, t in enumerate(Phi.coeffs):
        s = s + 2.0 ** (-q * n) * scale_norm(t, Phi.sys.scale, -p) ** 2
    return np.sqrt(s)[()]


def to_monomial(phi: ChaosVector) -> PowerSeries:
    """Expand ``phi`` into ordinary monomials ``sum_alpha c_alpha x^alpha``."""
    return PowerSeries(phi.sys.d, phi.N, phi.sys.basis_matrix @ phi.flat())


def to_appell(poly: PowerSeries, sys: "AppellSystem") -> ChaosVector:
    """Inverse of :func:`to_monomial` by a triangular solve."""
    from scipy.linalg import solve_triangular

    if poly.d != sys.d:
        raise ShapeError(f"polynomial has {poly.d} variables, system has d={sys.d}")
    if poly.degree() > sys.N:
        raise ShapeError(f"polynomial degree {poly.degree()} exceeds truncation N={sys.N}")
    c = poly.truncate(sys.N).coeffs
    flat = solve_triangular(sys.basis_matrix, c, lower=False)
    return ChaosVector.from_flat(sys, flat)


def evaluate(phi: ChaosVector, x):
    """``sum_n <P_n(x) | phi_n>``; ``x`` may be complex."""
    total = 0.0
    for n, t in enumerate(phi.coeffs):
        if np.any(t.coeffs):
            total = total + pairing(phi.sys.P(n, x), t)
    v = complex(total)
    return v.real if v.imag == 0 else v


def embed_l2(phi: ChaosVector, order: int | None = None) -> ChaosFunctional:
    """View a test function as a generalized function through ``L^2(mu)``.

    ``Phi_m[gamma] = int phi * P_m[gamma] dmu / m!`` so that pairing the result
    with any test function ``psi`` reproduces ``int phi psi dmu``.  Integrals
    use the measure's tensorized quadrature (``d <= 3``).
    """
    sys = phi.sys
    order = order or sys.N + 2
    pts, w = sys.measure.quadrature(order)
    values = np.array([evaluate(phi, x) for x in pts])
    out = []
    for m in range(sys.N + 1):
        Pm = np.array([sys.P(m, x).coeffs for x in pts])
        out.append(SymTensor(m, sys.d, (w * values) @ Pm / factorial(m)))
    return ChaosFunctional(sys, out)

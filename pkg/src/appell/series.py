"""Truncated multivariate power series.

A :class:`PowerSeries` holds the coefficients ``c_alpha`` of
``sum_{|alpha| <= N} c_alpha xi^alpha`` in graded order.  Products and
reciprocals truncate eagerly at ``N``; since every construction built on top
of this module is graded, truncation commutes with the algebra.  The same type
doubles as a dense polynomial in ``x`` when a finite polynomial is meant.
"""
from __future__ import annotations

import warnings
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .errors import ShapeError, SingularGermError
from .tensor import (
    SymTensor,
    graded_indices,
    mi_factorial,
    multi_indices,
    multiplicities,
    num_classes,
)

DEFAULT_ORDER = 8
_SMALL_CONSTANT = 1e-8


@lru_cache(maxsize=None)
def _offsets(d: int, N: int) -> tuple[int, ...]:
    off = [0]
    for n in range(N + 1):
        off.append(off[-1] + num_classes(d, n))
    return tuple(off)


@lru_cache(maxsize=None)
def _graded_array(d: int, N: int) -> np.ndarray:
    A = np.array(graded_indices(d, N), dtype=np.int64).reshape(-1, d)
    A.setflags(write=False)
    return A


@lru_cache(maxsize=None)
def _graded_position(d: int, N: int) -> dict:
    return {a: i for i, a in enumerate(graded_indices(d, N))}


@lru_cache(maxsize=None)
def _mul_table(d: int, N: int):
    idx = graded_indices(d, N)
    pos = _graded_position(d, N)
    deg = [sum(a) for a in idx]
    I, J, K = [], [], []
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            if deg[i] + deg[j] > N:
                continue
            I.append(i)
            J.append(j)
            K.append(pos[tuple(x + y for x, y in zip(a, b))])
    return np.array(I), np.array(J), np.array(K)


@lru_cache(maxsize=None)
def _graded_factorials(d: int, N: int) -> np.ndarray:
    f = np.array([float(mi_factorial(a)) for a in graded_indices(d, N)])
    f.setflags(write=False)
    return f


class PowerSeries:
    """Truncated analytic germ ``sum_{|alpha| <= N} c_alpha xi^alpha``.

    ``radius_hint`` is advisory metadata describing the polydisc radius where
    the untruncated germ converges; it never changes the arithmetic.
    """

    __slots__ = ("_d", "_N", "_c", "_radius")

    def __init__(self, d: int, N: int, coeffs=None, radius_hint: float | None = None):
        d, N = int(d), int(N)
        if d < 1 or N < 0:
            raise ValueError(f"need d >= 1 and N >= 0, got d={d}, N={N}")
        size = _offsets(d, N)[-1]
        if coeffs is None:
            c = np.zeros(size)
        else:
            c = np.array(coeffs)
            if c.dtype.kind not in "fc":
                c = c.astype(float)
            if c.shape != (size,):
                raise ShapeError(f"expected {size} coefficients for d={d}, N={N}, got {c.shape}")
        c.setflags(write=False)
        self._d, self._N, self._c = d, N, c
        self._radius = None if radius_hint is None else float(radius_hint)

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, c, d: int, N: int, radius_hint=None) -> "PowerSeries":
        v = np.zeros(_offsets(d, N)[-1], dtype=np.result_type(c, float))
        v[0] = c
        return cls(d, N, v, radius_hint)

    @classmethod
    def from_dict(cls, d: int, N: int, terms: Mapping[Sequence[int], complex],
                  radius_hint=None) -> "PowerSeries":
        pos = _graded_position(d, N)
        v = np.zeros(len(pos), dtype=np.result_type(*terms.values(), float) if terms else float)
        for alpha, c in terms.items():
            key = tuple(int(a) for a in alpha)
            if len(key) != d:
                raise ShapeError(f"multi-index {key} has wrong length for d={d}")
            if sum(key) > N:
                continue
            v[pos[key]] += c
        return cls(d, N, v, radius_hint)

    @classmethod
    def from_tensors(cls, tensors: Sequence[SymTensor], radius_hint=None) -> "PowerSeries":
        """Series ``sum_n <T_n | xi^{(x)n}>`` from homogeneous tensor parts."""
        d, N = tensors[0].d, len(tensors) - 1
        parts = [multiplicities(d, n) * t.coeffs for n, t in enumerate(tensors)]
        return cls(d, N, np.concatenate(parts), radius_hint)

    # access -------------------------------------------------------------

    @property
    def d(self) -> int:
        return self._d

    @property
    def order(self) -> int:
        return self._N

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def radius_hint(self) -> float | None:
        return self._radius

    def __getitem__(self, alpha):
        return self._c[_graded_position(self._d, self._N)[tuple(alpha)]]

    def block(self, n: int) -> np.ndarray:
        """Coefficients of the degree-``n`` homogeneous part."""
        off = _offsets(self._d, self._N)
        return self._c[off[n]:off[n + 1]]

    def homogeneous_tensor(self, n: int) -> SymTensor:
        """The tensor ``T_n`` with ``<T_n | xi^{(x)n}>`` equal to the degree-``n`` part."""
        return SymTensor(n, self._d, self.block(n) / multiplicities(self._d, n))

    def to_tensors(self) -> list[SymTensor]:
        return [self.homogeneous_tensor(n) for n in range(self._N + 1)]

    def to_dict(self) -> dict:
        return {a: c for a, c in zip(graded_indices(self._d, self._N), self._c.tolist()) if c != 0}

    def degree(self) -> int:
        """Largest degree carrying a nonzero coefficient (``-1`` for zero)."""
        for n in range(self._N, -1, -1):
            if np.any(self.block(n) != 0):
                return n
        return -1

    def truncate(self, N: int) -> "PowerSeries":
        if N > self._N:
            c = np.zeros(_offsets(self._d, N)[-1], dtype=self._c.dtype)
            c[:self._c.size] = self._c
            return PowerSeries(self._d, N, c, self._radius)
        return PowerSeries(self._d, N, self._c[:_offsets(self._d, N)[-1]], self._radius)

    def __repr__(self):
        return f"PowerSeries(d={self._d}, N={self._N}, radius_hint={self._radius})"

    # arithmetic ---------------------------------------------------------

    def _compatible(self, other: "PowerSeries"):
        if (self._d, self._N) != (other._d, other._N):
            raise ShapeError(
                f"series shapes differ: (d={self._d}, N={self._N}) vs (d={other._d}, N={other._N})")

    def _radius_with(self, other: "PowerSeries"):
        radii = [r for r in (self._radius, other._radius) if r is not None]
        return min(radii) if radii else None

    def __add__(self, other):
        if np.isscalar(other):
            other = PowerSeries.constant(other, self._d, self._N)
        if not isinstance(other, PowerSeries):
            return NotImplemented
        self._compatible(other)
        return PowerSeries(self._d, self._N, self._c + other._c, self._radius_with(other))

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries(self._d, self._N, -self._c, self._radius)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return PowerSeries(self._d, self._N, self._c * other, self._radius)
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return PowerSeries(self._d, self._N, self._c / c, self._radius)

    def __call__(self, xi):
        return evaluate(self, xi)

    def reciprocal(self) -> "PowerSeries":
        return reciprocal(self)

    def derivative(self, Phi: SymTensor) -> "PowerSeries":
        """Apply ``D(Phi)``: contract the ``k``-th derivative tensor with ``Phi``.

        As a differential operator this is ``sum_{|beta|=k} (k!/beta!) Phi_beta
        d^beta``; for ``k = 1`` it is the directional derivative along ``Phi``.
        """
        D = derivative_matrix(self._d, self._N, Phi)
        return PowerSeries(self._d, self._N, D @ self._c, self._radius)


def derivative_matrix(d: int, N: int, Phi: SymTensor) -> np.ndarray:
    """Matrix of ``D(Phi)`` on graded monomial coefficients up to degree ``N``."""
    if Phi.d != d:
        raise ShapeError(f"dimension mismatch: {Phi.d} vs {d}")
    k = Phi.degree
    pos = _graded_position(d, N)
    D = np.zeros((len(pos), len(pos)), dtype=np.result_type(Phi.coeffs, float))
    if k > N:
        return D
    wk = multiplicities(d, k)
    for i, alpha in enumerate(graded_indices(d, N - k)):
        af = mi_factorial(alpha)
        for j, beta in enumerate(multi_indices(d, k)):
            if Phi.coeffs[j] == 0:
                continue
            ab = tuple(a + b for a, b in zip(alpha, beta))
            D[i, pos[ab]] += wk[j] * Phi.coeffs[j] * mi_factorial(ab) / af
    return D


def mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    """Cauchy product truncated at the common order."""
    a._compatible(b)
    I, J, K = _mul_table(a.d, a.order)
    out = np.zeros(a.coeffs.size, dtype=np.result_type(a.coeffs, b.coeffs))
    np.add.at(out, K, a.coeffs[I] * b.coeffs[J])
    return PowerSeries(a.d, a.order, out, a._radius_with(b))


def reciprocal(a: PowerSeries) -> PowerSeries:
    """Multiplicative inverse ``1/a`` up to degree ``N``.

    Solves ``b_gamma = -(1/a_0) sum_{0 < beta <= gamma} a_beta b_{gamma-beta}``
    one degree at a time, so every step only reads already-final coefficients.
    """
    a0 = a.coeffs[0]
    if a0 == 0:
        raise SingularGermError("constant term is zero; the germ has no reciprocal")
    if abs(a0) < _SMALL_CONSTANT:
        warnings.warn(f"constant term {a0!r} is small; reciprocal radius may be tiny",
                      RuntimeWarning, stacklevel=2)
    d, N = a.d, a.order
    off = _offsets(d, N)
    I, J, K = _mul_table(d, N)
    b = np.zeros(a.coeffs.size, dtype=np.result_type(a.coeffs, float))
    b[0] = 1.0 / a0
    for n in range(1, N + 1):
        conv = np.zeros_like(b)
        np.add.at(conv, K, a.coeffs[I] * b[J])
        b[off[n]:off[n + 1]] = -conv[off[n]:off[n + 1]] / a0
    return PowerSeries(d, N, b, a.radius_hint)


def evaluate_many(a: PowerSeries, points) -> np.ndarray:
    """Evaluate at each row of ``points`` (shape ``(M, d)``)."""
    pts = np.asarray(points)
    if pts.ndim != 2 or pts.shape[1] != a.d:
        raise ShapeError(f"expected points of shape (M, {a.d}), got {pts.shape}")
    A = _graded_array(a.d, a.order)
    return np.prod(pts[:, None, :] ** A[None, :, :], axis=2) @ a.coeffs


def evaluate(a: PowerSeries, xi):
    """``sum_alpha c_alpha xi^alpha`` at a real or complex point."""
    xi = np.atleast_1d(np.asarray(xi))
    if xi.shape != (a.d,):
        raise ShapeError(f"expected a point of dimension {a.d}, got shape {xi.shape}")
    powers = np.prod(xi[None, :] ** _graded_array(a.d, a.order), axis=1)
    v = complex(np.dot(a.coeffs, powers))
    return v.real if v.imag == 0 else v


def exp_linear(x, N: int = DEFAULT_ORDER) -> PowerSeries:
    """Series of ``xi -> exp<x, xi>``: ``c_alpha = x^alpha / alpha!``."""
    x = np.atleast_1d(np.asarray(x))
    d = x.shape[0]
    powers = np.prod(x[None, :] ** _graded_array(d, N), axis=1)
    return PowerSeries(d, N, powers / _graded_factorials(d, N))


def exp_series(s: PowerSeries) -> PowerSeries:
    """``exp(s)`` for a series; the constant term is factored out exactly."""
    c0 = s.coeffs[0]
    t = s - c0
    out = PowerSeries.constant(1.0, s.d, s.order)
    term = PowerSeries.constant(1.0, s.d, s.order)
    for k in range(1, s.order + 1):
        term = mul(term, t) / k
        out = out + term
    return out * np.exp(c0)


def lift(a: PowerSeries, axis: int, d: int) -> PowerSeries:
    """Embed a one-variable series as a function of coordinate ``axis`` in ``d`` variables."""
    if a.d != 1:
        raise ShapeError("only one-variable series can be lifted")
    terms = {}
    for k in range(a.order + 1):
        alpha = [0] * d
        alpha[axis] = k
        terms[tuple(alpha)] = a.coeffs[k]
    return PowerSeries.from_dict(d, a.order, terms, a.radius_hint)


def factorial_weights(d: int, N: int) -> np.ndarray:
    """``alpha!`` over the graded multi-indices, for converting moment-type tables."""
    return _graded_factorials(d, N)


def graded_position(d: int, N: int) -> dict:
    return _graded_position(d, N)


def graded_offsets(d: int, N: int) -> tuple[int, ...]:
    return _offsets(d, N)

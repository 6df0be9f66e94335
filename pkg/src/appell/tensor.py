"""Multi-indices, symmetric tensors and weighted Hilbert-scale norms on R^d.

A symmetric tensor of degree ``n`` over ``C^d`` is stored in *monomial-class*
form: one value ``v[alpha]`` per multi-index ``alpha`` with ``|alpha| = n``,
where ``v[alpha]`` is the common entry of the full tensor on every index tuple
containing coordinate ``i`` exactly ``alpha[i]`` times.  A class stands for
``n!/alpha!`` entries of the full tensor, and every pairing below applies that
multiplicity explicitly.

Multi-indices of a fixed degree are ordered lexicographically descending
(``(2, 0), (1, 1), (0, 2)``); across degrees the order is graded.  All
dual pairings are bilinear; nothing is conjugated.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial as _fact
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ShapeError

MultiIndex = tuple[int, ...]


def degree(alpha: Sequence[int]) -> int:
    return int(sum(alpha))


def mi_factorial(alpha: Sequence[int]) -> int:
    """Product of the factorials of the entries of ``alpha``."""
    out = 1
    for a in alpha:
        out *= _fact(int(a))
    return out


def _compositions(d: int, n: int):
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(d - 1, n - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def multi_indices(d: int, n: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length ``d`` and degree ``n``, lex-descending."""
    if d < 1 or n < 0:
        raise ValueError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    return tuple(_compositions(d, n))


@lru_cache(maxsize=None)
def graded_indices(d: int, N: int) -> tuple[MultiIndex, ...]:
    """All multi-indices with degree at most ``N`` in graded order."""
    out: list[MultiIndex] = []
    for n in range(N + 1):
        out.extend(multi_indices(d, n))
    return tuple(out)


@lru_cache(maxsize=None)
def index_array(d: int, n: int) -> np.ndarray:
    arr = np.array(multi_indices(d, n), dtype=np.int64).reshape(-1, d)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def index_position(d: int, n: int) -> dict[MultiIndex, int]:
    return {a: i for i, a in enumerate(multi_indices(d, n))}


def num_classes(d: int, n: int) -> int:
    return len(multi_indices(d, n))


@lru_cache(maxsize=None)
def multiplicities(d: int, n: int) -> np.ndarray:
    """``n!/alpha!`` for every ``alpha`` of degree ``n``."""
    w = np.array([_fact(n) / mi_factorial(a) for a in multi_indices(d, n)])
    w.setflags(write=False)
    return w


def factorial_as(n: int, dtype=float):
    """``n!`` accumulated in ``dtype``; reaches past ``170!`` with ``np.longdouble``."""
    out = np.ones((), dtype=dtype)
    for k in range(2, n + 1):
        out = out * k
    return out[()]


def real_dtype(*arrays) -> np.dtype:
    """Real floating type wide enough for the given arrays (at least float64)."""
    return np.result_type(*[np.abs(np.asarray(a)).dtype for a in arrays], np.float64)


def monomials(x, n: int) -> np.ndarray:
    """Vector ``(x**alpha)`` over the degree-``n`` classes of ``len(x)`` variables."""
    x = np.asarray(x)
    A = index_array(x.shape[0], n)
    return np.prod(x[None, :] ** A, axis=1)


def _as_point(x, d: int | None = None) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x))
    if x.ndim != 1:
        raise ShapeError(f"expected a point, got array of shape {x.shape}")
    if d is not None and x.shape[0] != d:
        raise ShapeError(f"expected a point in dimension {d}, got {x.shape[0]}")
    return x


@dataclass(frozen=True)
class HilbertScale:
    """Diagonal weights ``lambda_i >= 1`` defining ``|x|_p = |Lambda^p x|``.

    Positive ``p`` gives the strong norms of the test side, negative ``p``
    the weak norms of the dual side.
    """

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValueError("a Hilbert scale needs at least one weight")
        if any(v < 1.0 for v in w):
            raise ValueError(f"all weights must be >= 1, got {w}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def default(cls, d: int) -> "HilbertScale":
        """Weights ``lambda_i = i + 1`` for ``i = 1..d``."""
        return cls(tuple(float(i + 1) for i in range(1, d + 1)))

    @property
    def d(self) -> int:
        return len(self.weights)

    def norm(self, x, p: float = 0) -> float:
        x = _as_point(x, self.d)
        lam = np.asarray(self.weights)
        return float(np.sqrt(np.sum(lam ** (2 * p) * np.abs(x) ** 2)))

    def class_weights(self, n: int, p: float, dtype=float) -> np.ndarray:
        """``lambda**(2 p alpha)`` over the degree-``n`` classes."""
        return monomials(np.asarray(self.weights, dtype=dtype) ** (2 * p), n)


class SymTensor:
    """Symmetric tensor of degree ``n`` on ``C^d`` in monomial-class form."""

    __slots__ = ("_n", "_d", "_v")

    def __init__(self, n: int, d: int, coeffs=None):
        n, d = int(n), int(d)
        size = num_classes(d, n)
        if coeffs is None:
            v = np.zeros(size)
        else:
            v = np.array(coeffs)
            if v.dtype.kind not in "fc":
                v = v.astype(float)
            if v.shape != (size,):
                raise ShapeError(
                    f"degree {n} in dimension {d} has {size} classes, got shape {v.shape}")
        v.setflags(write=False)
        self._n, self._d, self._v = n, d, v

    @classmethod
    def zeros(cls, n: int, d: int) -> "SymTensor":
        return cls(n, d)

    @classmethod
    def rank_one(cls, x, n: int) -> "SymTensor":
        """The tensor power ``x^{(x) n}``; its class values are ``x**alpha``."""
        x = _as_point(x)
        return cls(n, x.shape[0], monomials(x, n))

    @classmethod
    def from_dict(cls, n: int, d: int, values: Mapping[Sequence[int], complex]) -> "SymTensor":
        pos = index_position(d, n)
        v = np.zeros(len(pos), dtype=complex if any(
            isinstance(c, complex) for c in values.values()) else float)
        for alpha, c in values.items():
            key = tuple(int(a) for a in alpha)
            if key not in pos:
                raise ShapeError(f"{key} is not a degree-{n} multi-index in dimension {d}")
            v[pos[key]] = c
        return cls(n, d, v)

    @classmethod
    def basis(cls, n: int, d: int, alpha: Sequence[int]) -> "SymTensor":
        return cls.from_dict(n, d, {tuple(alpha): 1.0})

    @property
    def degree(self) -> int:
        return self._n

    @property
    def d(self) -> int:
        return self._d

    @property
    def coeffs(self) -> np.ndarray:
        return self._v

    def __getitem__(self, alpha) -> complex:
        return self._v[index_position(self._d, self._n)[tuple(alpha)]]

    def to_dict(self) -> dict[MultiIndex, complex]:
        return dict(zip(multi_indices(self._d, self._n), self._v.tolist()))

    def _check(self, other: "SymTensor"):
        if not isinstance(other, SymTensor):
            return NotImplemented
        if (self._n, self._d) != (other._n, other._d):
            raise ShapeError(
                f"degree/dimension mismatch: ({self._n}, {self._d}) vs ({other._n}, {other._d})")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SymTensor(self._n, self._d, self._v + other._v)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SymTensor(self._n, self._d, self._v - other._v)

    def __neg__(self):
        return SymTensor(self._n, self._d, -self._v)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return SymTensor(self._n, self._d, self._v * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return SymTensor(self._n, self._d, self._v / c)

    def __eq__(self, other):
        if not isinstance(other, SymTensor):
            return NotImplemented
        return (self._n, self._d) == (other._n, other._d) and np.array_equal(self._v, other._v)

    __hash__ = None

    def __repr__(self):
        return f"SymTensor(n={self._n}, d={self._d}, coeffs={self._v!r})"

    def pairing(self, other: "SymTensor") -> complex:
        return pairing(self, other)

    def norm(self, scale: HilbertScale | None = None, p: float = 0) -> float:
        return scale_norm(self, scale or HilbertScale((1.0,) * self._d), p)


def pairing(T: SymTensor, S: SymTensor):
    """Bilinear pairing ``sum_alpha (n!/alpha!) t_alpha s_alpha``."""
    T._check(S)
    return _scalar(np.sum(multiplicities(T.d, T.degree) * T.coeffs * S.coeffs))


def scale_norm(T: SymTensor, scale: HilbertScale, p: float) -> float:
    """Norm of ``T`` in the ``p``-th tensor power of the scale.

    Equals ``sqrt(sum_alpha (n!/alpha!) lambda^(2 p alpha) |v_alpha|^2)``; for a
    rank-one tensor this is ``|x|_p ** n``.
    """
    if scale.d != T.d:
        raise ShapeError(f"scale has dimension {scale.d}, tensor has {T.d}")
    dtype = real_dtype(T.coeffs)
    w = multiplicities(T.d, T.degree) * scale.class_weights(T.degree, p, dtype)
    return np.sqrt(np.sum(w * np.abs(T.coeffs) ** 2))[()]


@lru_cache(maxsize=None)
def _product_table(d: int, a: int, b: int):
    pos = index_position(d, a + b)
    ia, ib, ig, w = [], [], [], []
    wa, wb, wg = multiplicities(d, a), multiplicities(d, b), multiplicities(d, a + b)
    for i, alpha in enumerate(multi_indices(d, a)):
        for j, beta in enumerate(multi_indices(d, b)):
            k = pos[tuple(x + y for x, y in zip(alpha, beta))]
            ia.append(i)
            ib.append(j)
            ig.append(k)
            w.append(wa[i] * wb[j] / wg[k])
    return np.array(ia), np.array(ib), np.array(ig), np.array(w)


def symmetrize_product(T: SymTensor, S: SymTensor) -> SymTensor:
    """Symmetric tensor product ``T (x)^ S`` of degree ``a + b``."""
    if T.d != S.d:
        raise ShapeError(f"dimension mismatch: {T.d} vs {S.d}")
    d, a, b = T.d, T.degree, S.degree
    ia, ib, ig, w = _product_table(d, a, b)
    dtype = np.result_type(T.coeffs, S.coeffs, float)
    out = np.zeros(num_classes(d, a + b), dtype=dtype)
    np.add.at(out, ig, w * T.coeffs[ia] * S.coeffs[ib])
    return SymTensor(a + b, d, out)


@lru_cache(maxsize=None)
def _interior_table(d: int, m: int, k: int):
    pos = index_position(d, m)
    ig, idl, isrc = [], [], []
    for g, gamma in enumerate(multi_indices(d, m - k)):
        for j, delta in enumerate(multi_indices(d, k)):
            ig.append(g)
            idl.append(j)
            isrc.append(pos[tuple(x + y for x, y in zip(gamma, delta))])
    return np.array(ig), np.array(idl), np.array(isrc)


def interior(T: SymTensor, S: SymTensor) -> SymTensor:
    """Contract the last ``k = S.degree`` slots of ``T`` with ``S``.

    Returns the degree ``T.degree - k`` tensor with entries
    ``sum_delta (k!/delta!) T[gamma + delta] S[delta]``.
    """
    if T.d != S.d:
        raise ShapeError(f"dimension mismatch: {T.d} vs {S.d}")
    m, k, d = T.degree, S.degree, T.d
    if k > m:
        raise ShapeError(f"cannot contract {k} slots of a degree-{m} tensor")
    ig, idl, isrc = _interior_table(d, m, k)
    dtype = np.result_type(T.coeffs, S.coeffs, float)
    out = np.zeros(num_classes(d, m - k), dtype=dtype)
    np.add.at(out, ig, multiplicities(d, k)[idl] * T.coeffs[isrc] * S.coeffs[idl])
    return SymTensor(m - k, d, out)


class BiSymTensor:
    """Tensor in ``Sym^m (x) Sym^n``: symmetric within the first ``m`` and last ``n`` slots.

    ``coeffs[g, h]`` is the full-tensor entry on any index tuple whose first
    group has class ``multi_indices(d, m)[g]`` and second group class
    ``multi_indices(d, n)[h]``.
    """

    __slots__ = ("_m", "_n", "_d", "_c")

    def __init__(self, m: int, n: int, d: int, coeffs=None):
        m, n, d = int(m), int(n), int(d)
        shape = (num_classes(d, m), num_classes(d, n))
        if coeffs is None:
            c = np.zeros(shape)
        else:
            c = np.array(coeffs)
            if c.dtype.kind not in "fc":
                c = c.astype(float)
            if c.shape != shape:
                raise ShapeError(f"block ({m}, {n}) in dimension {d} needs shape {shape}, got {c.shape}")
        c.setflags(write=False)
        self._m, self._n, self._d, self._c = m, n, d, c

    @classmethod
    def outer(cls, T: SymTensor, S: SymTensor) -> "BiSymTensor":
        if T.d != S.d:
            raise ShapeError(f"dimension mismatch: {T.d} vs {S.d}")
        return cls(T.degree, S.degree, T.d, np.outer(T.coeffs, S.coeffs))

    @property
    def out_degree(self) -> int:
        return self._m

    @property
    def in_degree(self) -> int:
        return self._n

    @property
    def d(self) -> int:
        return self._d

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def __add__(self, other):
        if not isinstance(other, BiSymTensor):
            return NotImplemented
        if (self._m, self._n, self._d) != (other._m, other._n, other._d):
            raise ShapeError("block shape mismatch")
        return BiSymTensor(self._m, self._n, self._d, self._c + other._c)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return BiSymTensor(self._m, self._n, self._d, self._c * c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"BiSymTensor(m={self._m}, n={self._n}, d={self._d})"

    def pair(self, xi, eta):
        """``<f | xi^{(x)m} (x) eta^{(x)n}>``."""
        a = multiplicities(self._d, self._m) * monomials(_as_point(xi, self._d), self._m)
        b = multiplicities(self._d, self._n) * monomials(_as_point(eta, self._d), self._n)
        return _scalar(a @ self._c @ b)

    def norm(self, scale: HilbertScale, p_out: float, p_in: float) -> float:
        """Hilbert-Schmidt norm in ``H_{p_out}^{(x)m} (x) H_{p_in}^{(x)n}``."""
        wm = multiplicities(self._d, self._m) * scale.class_weights(self._m, p_out)
        wn = multiplicities(self._d, self._n) * scale.class_weights(self._n, p_in)
        return float(np.sqrt(np.sum(np.outer(wm, wn) * np.abs(self._c) ** 2)))


def contract(f: BiSymTensor, S: SymTensor) -> SymTensor:
    """Contract the input group of ``f`` with ``S``.

    ``result[gamma] = sum_delta (n!/delta!) f[gamma, delta] s[delta]``.  No
    ``n!`` normalisation is applied here; operator application multiplies by
    it separately.
    """
    if f.in_degree != S.degree or f.d != S.d:
        raise ShapeError(
            f"cannot contract block ({f.out_degree}, {f.in_degree}) in dimension {f.d} "
            f"with a degree-{S.degree} tensor in dimension {S.d}")
    return SymTensor(f.out_degree, f.d, f.coeffs @ (multiplicities(S.d, S.degree) * S.coeffs))


def _scalar(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


def tensor_powers(x, N: int) -> list[SymTensor]:
    """``[x^{(x)0}, ..., x^{(x)N}]``."""
    return [SymTensor.rank_one(x, n) for n in range(N + 1)]


def check_family(tensors: Iterable[SymTensor], d: int) -> list[SymTensor]:
    out = list(tensors)
    for n, t in enumerate(out):
        if not isinstance(t, SymTensor) or t.degree != n or t.d != d:
            raise ShapeError(f"slot {n} must hold a degree-{n} SymTensor in dimension {d}")
    return out

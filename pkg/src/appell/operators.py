"""Operators between Appell test spaces, their CS-symbols and reconstruction.

An operator ``B`` from the test functions of ``nu`` to those of ``mu`` is
stored as kernels ``f[m, n]`` (:class:`~appell.tensor.BiSymTensor`) acting on
Appell coefficients by

    (B phi)_m = sum_n n! * contract(f[m, n], phi_n).

Its CS-symbol is ``F(xi, eta) = <<rho_mu(-xi), B e_nu(eta)>>``, which on
truncated data reduces to ``sum_{m,n} <f[m, n] | xi^{(x)m} (x) eta^{(x)n}>``:
``xi`` fills the output slots and ``eta`` the input slots.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Mapping

import numpy as np
from scipy.linalg import solve_triangular

from .chaos import ChaosVector, test_norm
from .errors import ExtractionError, MalformedGermError, ShapeError
from .series import derivative_matrix, graded_offsets
from .system import AppellSystem
from .tensor import (
    BiSymTensor,
    HilbertScale,
    SymTensor,
    contract,
    index_array,
    index_position,
    mi_factorial,
    monomials,
    multi_indices,
    multiplicities,
    num_classes,
)


ZERO_BLOCK_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class OperatorKernel:
    """Kernel family ``{f[m, n]}`` of an operator from ``sys_in`` to ``sys_out``."""

    sys_in: AppellSystem
    sys_out: AppellSystem
    blocks: Mapping[tuple[int, int], BiSymTensor] = field(default_factory=dict)

    def __post_init__(self):
        if self.sys_in.d != self.sys_out.d or self.sys_in.N != self.sys_out.N:
            raise ShapeError("input and output systems must share d and N")
        clean = {}
        for (m, n), f in self.blocks.items():
            if (f.out_degree, f.in_degree, f.d) != (m, n, self.d):
                raise ShapeError(f"block keyed ({m}, {n}) holds {f!r}")
            if m > self.N or n > self.N:
                raise ShapeError(f"block ({m}, {n}) exceeds truncation N={self.N}")
            clean[(m, n)] = f
        object.__setattr__(self, "blocks", dict(sorted(clean.items())))

    @property
    def d(self) -> int:
        return self.sys_in.d

    @property
    def N(self) -> int:
        return self.sys_in.N

    def block(self, m: int, n: int) -> BiSymTensor:
        return self.blocks.get((m, n)) or BiSymTensor(m, n, self.d)

    def __call__(self, phi: ChaosVector) -> ChaosVector:
        return apply(self, phi)

    def matrix(self) -> np.ndarray:
        """Matrix acting on flattened Appell coefficient vectors."""
        off = graded_offsets(self.d, self.N)
        dtype = np.result_type(float, *[f.coeffs for f in self.blocks.values()])
        A = np.zeros((off[-1], off[-1]), dtype=dtype)
        for (m, n), f in self.blocks.items():
            A[off[m]:off[m + 1], off[n]:off[n + 1]] = (
                factorial(n) * f.coeffs * multiplicities(self.d, n)[None, :])
        return A

    @classmethod
    def from_matrix(cls, A, sys_in: AppellSystem, sys_out: AppellSystem,
                    zero_tol: float = ZERO_BLOCK_TOL) -> "OperatorKernel":
        """Inverse of :meth:`matrix`; blocks with ``max |f| < zero_tol`` are dropped."""
        d, N = sys_in.d, sys_in.N
        off = graded_offsets(d, N)
        blocks = {}
        for m in range(N + 1):
            for n in range(N + 1):
                L = A[off[m]:off[m + 1], off[n]:off[n + 1]]
                f = L / (factorial(n) * multiplicities(d, n)[None, :])
                if np.max(np.abs(f)) >= zero_tol:
                    blocks[(m, n)] = BiSymTensor(m, n, d, f)
        return cls(sys_in, sys_out, blocks)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "N": self.N,
            "weights": list(self.sys_in.scale.weights),
            "measures": {"in": self.sys_in.measure.to_dicts(), "out": self.sys_out.measure.to_dicts()},
            "blocks": [_block_json(m, n, f.coeffs, self.d) for (m, n), f in self.blocks.items()],
        }

    @classmethod
    def from_json(cls, data: dict, sys_in: AppellSystem | None = None,
                  sys_out: AppellSystem | None = None) -> "OperatorKernel":
        from .measures import ProductMeasure
        from .system import build

        d, N = int(data["d"]), int(data["N"])
        scale = HilbertScale(tuple(data["weights"])) if "weights" in data else None
        if sys_in is None:
            sys_in = build(ProductMeasure.from_dicts(data["measures"]["in"]), N, scale)
        if sys_out is None:
            sys_out = build(ProductMeasure.from_dicts(data["measures"]["out"]), N, scale)
        if (sys_in.d, sys_in.N) != (d, N):
            raise ShapeError("serialized kernel does not match the systems")
        blocks = {(m, n): BiSymTensor(m, n, d, c) for (m, n), c in _parse_blocks(data, d).items()}
        return cls(sys_in, sys_out, blocks)


def _encode_value(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


def _decode_value(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    if isinstance(v, dict):
        return complex(v["re"], v.get("im", 0.0))
    return complex(v)


def _block_json(m: int, n: int, c: np.ndarray, d: int) -> dict:
    gammas, deltas = multi_indices(d, m), multi_indices(d, n)
    rows, cols = np.nonzero(c)
    entries = [{"gamma": list(gammas[g]), "delta": list(deltas[h]), "value": _encode_value(c[g, h])}
               for g, h in zip(rows, cols)]
    return {"m": m, "n": n, "entries": entries}


def _parse_blocks(data: dict, d: int) -> dict[tuple[int, int], np.ndarray]:
    out = {}
    for blk in data.get("blocks", []):
        m, n = int(blk["m"]), int(blk["n"])
        c = np.zeros((num_classes(d, m), num_classes(d, n)), dtype=complex)
        pm, pn = index_position(d, m), index_position(d, n)
        for e in blk["entries"]:
            gamma, delta = tuple(e["gamma"]), tuple(e["delta"])
            if len(gamma) != d or len(delta) != d:
                raise MalformedGermError(f"block ({m}, {n}) has an entry of the wrong dimension")
            if sum(gamma) != m or sum(delta) != n:
                raise MalformedGermError(
                    f"block ({m}, {n}) contains the term gamma={gamma}, delta={delta} "
                    "which is not bihomogeneous of that degree")
            c[pm[gamma], pn[delta]] += _decode_value(e["value"])
        if not np.any(c.imag):
            c = c.real
        out[(m, n)] = out[(m, n)] + c if (m, n) in out else c
    return out


@dataclass(frozen=True, eq=False)
class SymbolGerm:
    """Bigraded germ ``F(xi, eta) = sum_{m,n} <t[m, n] | xi^{(x)m} (x) eta^{(x)n}>``.

    Each block holds the class entries ``t[gamma, delta]`` of a symmetric
    bi-tensor, the same layout as :class:`~appell.tensor.BiSymTensor`.  The
    monomial coefficient of ``xi^gamma eta^delta`` is
    ``(m!/gamma!)(n!/delta!) t[gamma, delta]``; keeping the tensor entries
    rather than that product makes the kernel/germ correspondence exact in
    floating point.

    ``p``, ``q`` and ``delta`` describe the cylinder ``C^d x U`` on which the
    germ is meant to be holomorphic; they are metadata only.
    """

    d: int
    N: int
    blocks: Mapping[tuple[int, int], np.ndarray]
    p: float = 0.0
    q: float = 0.0
    delta: float | None = None

    def __post_init__(self):
        for (m, n), c in self.blocks.items():
            if np.shape(c) != (num_classes(self.d, m), num_classes(self.d, n)):
                raise MalformedGermError(f"block ({m}, {n}) has shape {np.shape(c)}")
        object.__setattr__(self, "blocks", dict(sorted(self.blocks.items())))

    def __call__(self, xi, eta):
        xi, eta = np.asarray(xi), np.asarray(eta)
        if xi.ndim == 2:
            return self.evaluate_many(xi, eta)
        return complex(self.evaluate_many(xi[None, :], eta[None, :])[0])

    def evaluate_many(self, XI, ETA) -> np.ndarray:
        """Vectorized evaluation at rows of ``XI`` and ``ETA`` (both ``(K, d)``)."""
        XI, ETA = np.asarray(XI), np.asarray(ETA)
        out = np.zeros(XI.shape[0], dtype=complex)
        cache_x, cache_e = {}, {}
        for (m, n), c in self.blocks.items():
            if m not in cache_x:
                cache_x[m] = np.prod(XI[:, None, :] ** index_array(self.d, m)[None], axis=2)
            if n not in cache_e:
                cache_e[n] = np.prod(ETA[:, None, :] ** index_array(self.d, n)[None], axis=2)
            w = np.outer(multiplicities(self.d, m), multiplicities(self.d, n)) * c
            out += np.einsum("kg,gh,kh->k", cache_x[m], w, cache_e[n])
        return out

    def to_json(self) -> dict:
        return {"d": self.d, "N": self.N, "p": self.p, "q": self.q, "delta": self.delta,
                "blocks": [_block_json(m, n, np.asarray(c), self.d) for (m, n), c in self.blocks.items()]}

    @classmethod
    def from_json(cls, data: dict) -> "SymbolGerm":
        d, N = int(data["d"]), int(data["N"])
        blocks = _parse_blocks(data, d)
        return cls(d, N, blocks, data.get("p", 0.0), data.get("q", 0.0), data.get("delta"))

    @classmethod
    def from_terms(cls, d: int, N: int, terms: Mapping[tuple, complex], **meta) -> "SymbolGerm":
        """From monomial coefficients ``{(gamma, delta): coefficient of xi^gamma eta^delta}``."""
        blocks: dict = {}
        for (gamma, delta), v in terms.items():
            m, n = sum(gamma), sum(delta)
            if (m, n) not in blocks:
                blocks[(m, n)] = np.zeros((num_classes(d, m), num_classes(d, n)), dtype=complex)
            blocks[(m, n)][index_position(d, m)[tuple(gamma)], index_position(d, n)[tuple(delta)]] += v
        blocks = {(m, n): c / np.outer(multiplicities(d, m), multiplicities(d, n))
                  for (m, n), c in blocks.items()}
        blocks = {k: (c.real if not np.any(c.imag) else c) for k, c in blocks.items()}
        return cls(d, N, blocks, **meta)


def apply(B: OperatorKernel, phi: ChaosVector) -> ChaosVector:
    """``(B phi)_m = sum_n n! contract(f[m, n], phi_n)``, a test function of ``sys_out``."""
    s = phi.sys
    if s is not B.sys_in and (s.N, s.d, s.measure) != (B.N, B.d, B.sys_in.measure):
        raise ShapeError("the test function is not over the operator's input system")
    out = [SymTensor.zeros(m, B.d) for m in range(B.N + 1)]
    for (m, n), f in B.blocks.items():
        out[m] = out[m] + contract(f, phi[n]) * factorial(n)
    return ChaosVector(B.sys_out, out)


def cs_symbol(B: OperatorKernel, xi, eta):
    """``sum_{m,n} <f[m, n] | xi^{(x)m} (x) eta^{(x)n}>``."""
    total = 0.0
    for f in B.blocks.values():
        total = total + f.pair(xi, eta)
    v = complex(total)
    return v.real if v.imag == 0 else v


def symbol_series(B: OperatorKernel, p: float = 0.0, q: float = 0.0,
                  delta: float | None = None) -> SymbolGerm:
    """The symbol as a germ; its blocks are copies of the kernels."""
    blocks = {(m, n): f.coeffs.copy() for (m, n), f in B.blocks.items()}
    return SymbolGerm(B.d, B.N, blocks, p, q, delta)


def reconstruct_exact(F: SymbolGerm, sys_in: AppellSystem, sys_out: AppellSystem) -> OperatorKernel:
    """Read the kernels off the bigraded coefficients of ``F``."""
    if F.d != sys_in.d:
        raise ShapeError("germ and system dimensions differ")
    blocks = {}
    for (m, n), c in F.blocks.items():
        if m > sys_in.N or n > sys_in.N:
            raise MalformedGermError(f"block ({m}, {n}) exceeds truncation N={sys_in.N}")
        if np.shape(c) != (num_classes(F.d, m), num_classes(F.d, n)):
            raise MalformedGermError(f"block ({m}, {n}) is not bihomogeneous of that degree")
        f = np.array(c)
        if np.max(np.abs(f), initial=0.0) >= ZERO_BLOCK_TOL:
            blocks[(m, n)] = BiSymTensor(m, n, F.d, f)
    return OperatorKernel(sys_in, sys_out, blocks)


def lattice_directions(d: int, M: int) -> np.ndarray:
    """Points ``alpha / M`` with ``|alpha| = M``; unisolvent for homogeneous degrees ``<= M``."""
    M = max(M, 1)
    return index_array(d, M).astype(float) / M


def reconstruct_blackbox(F: Callable, sys_in: AppellSystem, sys_out: AppellSystem,
                         M: int | None = None, radii=None, delta: float = 0.5,
                         eps: float = 1.0, n_points: int | None = None,
                         residual_tol: float = 1e-9, vectorized: bool = False,
                         zero_tol: float = ZERO_BLOCK_TOL) -> OperatorKernel:
    """Recover kernels from an evaluable symbol by Cauchy integrals on circles.

    For each pair of directions ``(u, v)`` the map ``(s, t) -> F(s u, t v)`` is
    sampled on ``|s| = R_m``, ``|t| = delta`` and a two-dimensional DFT yields
    the Taylor coefficients ``<f[m, n] | u^{(x)m} (x) v^{(x)n}>``.  Least squares
    over a unisolvent direction set then gives the class entries of each
    ``f[m, n]``.

    Parameters
    ----------
    F : callable
        ``F(xi, eta)`` for points in ``C^d``; with ``vectorized=True`` it must
        accept arrays of shape ``(K, d)`` and return shape ``(K,)``.
    M : int, optional
        Highest degree to extract in each variable; defaults to ``sys_in.N``.
    radii : sequence of float, optional
        ``R_m`` for ``m = 0..M``; defaults to ``max(1, m / eps)``.
    delta : float
        Radius of the circle in the ``eta`` variable.
    n_points : int, optional
        Samples per circle; defaults to ``4 (M + 1)``.
    residual_tol : float
        Largest admissible share of spectral mass in the upper half of the DFT
        (negative frequencies plus high-order tail).  Exceeding it means ``F``
        is not holomorphic on the circles, or is under-resolved.

    Raises
    ------
    ExtractionError
        If the spectral residual exceeds ``residual_tol``.
    """
    d, N = sys_in.d, sys_in.N
    M = N if M is None else M
    if M > N:
        raise ShapeError(f"target degree {M} exceeds truncation N={N}")
    L = n_points or 4 * (M + 1)
    if radii is None:
        radii = [max(1.0, m / eps) for m in range(M + 1)]
    radii = [float(r) for r in radii]
    if len(radii) != M + 1:
        raise ValueError("need one radius per degree 0..M")

    X = lattice_directions(d, M)
    nd = X.shape[0]
    roots = np.exp(2j * np.pi * np.arange(L) / L)
    half = L // 2

    # coefficient samples a[m][n] as (nd x nd) matrices over direction pairs
    samples = {(m, n): np.zeros((nd, nd), dtype=complex) for m in range(M + 1) for n in range(M + 1)}
    by_radius: dict[float, list[int]] = {}
    for m, R in enumerate(radii):
        by_radius.setdefault(R, []).append(m)

    S, T = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    for R, degrees in by_radius.items():
        s_vals = R * roots[S.ravel()]
        t_vals = delta * roots[T.ravel()]
        for a in range(nd):
            XI = s_vals[:, None] * X[a][None, :]
            for b in range(nd):
                ETA = t_vals[:, None] * X[b][None, :]
                if vectorized:
                    vals = np.asarray(F(XI, ETA), dtype=complex)
                else:
                    vals = np.array([F(x, e) for x, e in zip(XI, ETA)], dtype=complex)
                C = np.fft.fft2(vals.reshape(L, L)) / (L * L)
                total = np.linalg.norm(C)
                if total > 0:
                    tail = np.sqrt(np.linalg.norm(C[half:, :]) ** 2 + np.linalg.norm(C[:half, half:]) ** 2)
                    if tail / total > residual_tol:
                        raise ExtractionError(
                            f"spectral residual {tail / total:.3e} exceeds {residual_tol:.1e} on "
                            f"|s|={R}, |t|={delta}; F is not holomorphic there or is under-resolved")
                for m in degrees:
                    for n in range(M + 1):
                        samples[(m, n)][a, b] = C[m, n] / (R ** m * delta ** n)

    V = {m: (multiplicities(d, m)[None, :] * np.array([monomials(x, m) for x in X])) for m in range(M + 1)}
    Vpinv = {m: np.linalg.pinv(V[m]) for m in V}
    blocks = {}
    for (m, n), A in samples.items():
        f = Vpinv[m] @ A @ Vpinv[n].T
        if not np.any(np.abs(f.imag) > 1e-12 * max(1.0, np.max(np.abs(f.real)))):
            f = f.real
        if np.max(np.abs(f)) >= zero_tol:
            blocks[(m, n)] = BiSymTensor(m, n, d, f)
    return OperatorKernel(sys_in, sys_out, blocks)


def d_operator(sys: AppellSystem, Phi: SymTensor) -> OperatorKernel:
    """Kernel family of ``D(Phi)`` on the system's Appell basis.

    Built by conjugating the monomial action ``m!/(m-k)! <x^{(x)(m-k)} (x)^ Phi | phi_m>``
    with the Appell change of basis.
    """
    if Phi.degree > sys.N:
        raise ShapeError(f"Phi has degree {Phi.degree} > N={sys.N}")
    A = sys.basis_matrix
    D = derivative_matrix(sys.d, sys.N, Phi)
    mat = solve_triangular(A, D @ A, lower=False)
    scale = max(np.max(np.abs(mat)), 1.0)
    mat = np.where(np.abs(mat) < 1e-13 * scale, 0.0, mat)
    return OperatorKernel.from_matrix(mat, sys, sys)


def measure_change_operator(sys_nu: AppellSystem, sys_mu: AppellSystem) -> OperatorKernel:
    """``<P_{n,nu} | phi_n> -> <P_{n,mu} | phi_n>``; its symbol is ``exp<xi, eta>``."""
    if sys_nu.d != sys_mu.d or sys_nu.N != sys_mu.N:
        raise ShapeError("measure change needs systems of equal dimension and truncation")
    d = sys_nu.d
    blocks = {}
    for m in range(sys_nu.N + 1):
        ident = np.diag([mi_factorial(g) / factorial(m) for g in multi_indices(d, m)])
        blocks[(m, m)] = BiSymTensor(m, m, d, ident / factorial(m))
    return OperatorKernel(sys_nu, sys_mu, blocks)


def constants_operator(sys_in: AppellSystem, sys_out: AppellSystem, c: complex = 1.0) -> OperatorKernel:
    """Only ``f[0, 0] = c``: maps ``phi`` to ``c`` times its degree-0 coefficient."""
    return OperatorKernel(sys_in, sys_out, {(0, 0): BiSymTensor(0, 0, sys_in.d, [[c]])})


def zero_operator(sys_in: AppellSystem, sys_out: AppellSystem) -> OperatorKernel:
    return OperatorKernel(sys_in, sys_out, {})


@dataclass
class GrowthSample:
    """Rays ``t * u`` for ``xi`` and a finite set of ``eta`` points."""

    radii: np.ndarray
    directions: np.ndarray
    etas: np.ndarray

    @classmethod
    def default(cls, d: int, eta_radius: float = 0.1, t_max: float = 60.0, n_radii: int = 61):
        eye = np.eye(d)
        dirs = [eye[i] for i in range(d)] + [-eye[i] for i in range(d)]
        dirs += [np.ones(d) / np.sqrt(d), 1j * eye[0]]
        etas = [np.zeros(d)] + [eta_radius * u for u in dirs]
        return cls(np.linspace(0.0, t_max, n_radii), np.array(dirs, dtype=complex),
                   np.array(etas, dtype=complex))


def growth_bound_check(B, p0: float, eps: float, sample: GrowthSample | None = None,
                       scale: HilbertScale | None = None, growth_factor: float = 10.0):
    """Estimate ``C`` in ``|F(xi, eta)| <= C exp(eps |xi|_{-p0})`` on a sample.

    ``B`` is an :class:`OperatorKernel` or a callable ``F(xi, eta)``.  Along
    every ray the envelope ``max_eta |F| exp(-eps |xi|_{-p0})`` is recorded; a
    ray whose envelope still rises over its last quarter and has grown by more
    than ``growth_factor`` since the middle of the ray is reported as a bound
    violation.

    Returns
    -------
    C_est : float
    report : dict
        ``{"bounded": bool, "violations": [ray indices], "envelopes": [[...], ...]}``
    """
    if isinstance(B, OperatorKernel):
        F = lambda xi, eta: cs_symbol(B, xi, eta)  # noqa: E731
        scale = scale or B.sys_out.scale
        d = B.d
    else:
        F = B
        if scale is None:
            raise ValueError("a scale is required when B is a plain callable")
        d = scale.d
    sample = sample or GrowthSample.default(d)
    envelopes, violations = [], []
    for r, u in enumerate(sample.directions):
        env = []
        for t in sample.radii:
            xi = t * u
            damp = np.exp(-eps * scale.norm(xi, -p0))
            env.append(max(abs(F(xi, eta)) for eta in sample.etas) * damp)
        env = np.array(env)
        envelopes.append(env.tolist())
        tail = env[-max(2, len(env) // 4):]
        rising = np.all(np.diff(tail) > 0)
        mid = env[len(env) // 2]
        if rising and env[-1] > growth_factor * max(mid, np.finfo(float).tiny):
            violations.append(r)
    C_est = float(max((max(e) for e in envelopes), default=0.0))
    return C_est, {"bounded": not violations, "violations": violations, "envelopes": envelopes}


@dataclass
class NormChain:
    lhs: float
    rhs: float
    lhs_by_degree: np.ndarray
    rhs_by_degree: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(self.lhs <= self.rhs and np.all(self.lhs_by_degree <= self.rhs_by_degree))


def kernel_norm(f: BiSymTensor, scale_out: HilbertScale, scale_in: HilbertScale,
                p_out: float, p_in: float) -> float:
    """Hilbert-Schmidt norm of ``f`` in ``H_{p_out}^{(x)m} (x) H_{p_in}^{(x)n}``."""
    m, n, d = f.out_degree, f.in_degree, f.d
    wm = multiplicities(d, m) * scale_out.class_weights(m, p_out)
    wn = multiplicities(d, n) * scale_in.class_weights(n, p_in)
    return float(np.sqrt(np.sum(np.outer(wm, wn) * np.abs(f.coeffs) ** 2)))


def norm_chain(B: OperatorKernel, phi: ChaosVector, p: float, q: float,
               p0: float, q0: float) -> NormChain:
    """Both sides of the Schwarz-inequality estimate for ``||B phi||_{p0,q0}^2``.

    Left: ``sum_m (m!)^2 2^{m q0} |b_m phi|_{p0}^2``.  Right: ``||phi||_{p,q}^2
    sum_m (m!)^2 2^{m q0} sum_n 2^{-n q} |f[m, n]|_{p0,-p}^2``.  Per-degree
    terms are returned as well.
    """
    out = apply(B, phi)
    so, si = B.sys_out.scale, B.sys_in.scale
    phi_sq = test_norm(phi, p, q) ** 2
    lhs_m, rhs_m = np.zeros(B.N + 1), np.zeros(B.N + 1)
    for m in range(B.N + 1):
        w = factorial(m) ** 2 * 2.0 ** (m * q0)
        lhs_m[m] = w * out[m].norm(so, p0) ** 2
        ksum = sum(2.0 ** (-n * q) * kernel_norm(B.block(m, n), so, si, p0, -p) ** 2
                   for n in range(B.N + 1))
        rhs_m[m] = w * phi_sq * ksum
    return NormChain(float(lhs_m.sum()), float(rhs_m.sum()), lhs_m, rhs_m)

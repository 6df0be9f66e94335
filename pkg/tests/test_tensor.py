import itertools
from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from appell import BiSymTensor, HilbertScale, ShapeError, SymTensor, contract, pairing, scale_norm, symmetrize_product
from appell.tensor import graded_indices, interior, mi_factorial, multi_indices, multiplicities, num_classes
from helpers import class_dict, random_tensor

FROZEN = oracles.load_frozen()


def dense(T):
    return oracles.dense_from_classes(class_dict(T), T.d, T.degree)


def dense_bi(f):
    m, n, d = f.out_degree, f.in_degree, f.d
    F = np.zeros((d,) * (m + n), dtype=complex)
    gm, gn = {a: i for i, a in enumerate(multi_indices(d, m))}, {a: i for i, a in enumerate(multi_indices(d, n))}
    for idx in itertools.product(range(d), repeat=m + n):
        a = tuple(idx[:m].count(i) for i in range(d))
        b = tuple(idx[m:].count(i) for i in range(d))
        F[idx] = f.coeffs[gm[a], gn[b]]
    return F


dims = st.integers(1, 3)
degrees = st.integers(0, 4)
seeds = st.integers(0, 2**32 - 1)


class TestMultiIndices:
    def test_counts_match_stars_and_bars(self):
        for d in range(1, 5):
            for n in range(7):
                assert num_classes(d, n) == comb(n + d - 1, d - 1)

    def test_lex_descending_within_degree(self):
        idx = multi_indices(3, 2)
        assert idx == ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))

    def test_graded_order(self):
        assert graded_indices(2, 2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))

    def test_factorial_and_multiplicity(self):
        assert mi_factorial((3, 2, 0)) == 12
        assert list(multiplicities(2, 3)) == [1.0, 3.0, 3.0, 1.0]

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            multi_indices(0, 2)


class TestPairing:
    def test_spec_examples(self):
        ex = FROZEN["pairing_examples"]
        assert pairing(SymTensor.rank_one([1, 1], 2), SymTensor.rank_one([1, 1], 2)) == ex["ones_d2_n2"] == 4
        assert pairing(SymTensor.rank_one([1, 2], 2), SymTensor.rank_one([3, 1], 2)) == ex["rank_one_d2_n2"] == 25
        T = SymTensor(3, 1, [2.0])
        assert pairing(T, T) == ex["d1_n3_v2"] == 4

    @given(dims, degrees, seeds)
    def test_matches_dense_full_tensor(self, d, n, seed):
        rng = np.random.default_rng(seed)
        T, S = random_tensor(rng, n, d), random_tensor(rng, n, d)
        ref = oracles.dense_pairing(dense(T), dense(S))
        assert pairing(T, S) == pytest.approx(ref.real, rel=1e-12, abs=1e-12)

    @given(dims, st.integers(0, 6), seeds)
    def test_bilinear_and_symmetric(self, d, n, seed):
        rng = np.random.default_rng(seed)
        T, S, U = (random_tensor(rng, n, d, complex_=True) for _ in range(3))
        a, b = 0.7 - 0.2j, -1.3
        assert pairing(T, S) == pytest.approx(pairing(S, T), rel=1e-12, abs=1e-12)
        lhs = pairing(T * a + U * b, S)
        assert lhs == pytest.approx(a * pairing(T, S) + b * pairing(U, S), rel=1e-10, abs=1e-10)

    def test_no_conjugation(self):
        T = SymTensor(1, 1, [1j])
        assert pairing(T, T) == -1

    def test_mismatch_raises(self):
        with pytest.raises(ShapeError):
            pairing(SymTensor.zeros(2, 2), SymTensor.zeros(3, 2))
        with pytest.raises(ShapeError):
            pairing(SymTensor.zeros(2, 2), SymTensor.zeros(2, 3))


class TestScaleNorm:
    def test_spec_examples(self):
        ex = FROZEN["scale_norm_examples"]
        T = SymTensor.rank_one([1, 1], 2)
        assert scale_norm(T, HilbertScale((1.0, 2.0)), 1) == pytest.approx(ex["d2_lam12_p1_ones"])
        assert ex["d2_lam12_p1_ones"] == pytest.approx(5.0)
        assert scale_norm(SymTensor(2, 1, [1.0]), HilbertScale((2.0,)), -1) == pytest.approx(0.25)

    def test_p0_is_hilbert_schmidt(self, rng):
        T = random_tensor(rng, 3, 2)
        hs = np.sqrt(np.sum(np.abs(dense(T)) ** 2))
        assert scale_norm(T, HilbertScale((1.5, 7.0)), 0) == pytest.approx(hs, rel=1e-12)

    @given(dims, st.integers(0, 6), st.integers(-2, 2), seeds)
    def test_rank_one_is_power_of_vector_norm(self, d, n, p, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        scale = HilbertScale.default(d)
        got = scale_norm(SymTensor.rank_one(x, n), scale, p)
        assert got == pytest.approx(scale.norm(x, p) ** n, rel=1e-12)

    @given(dims, degrees, st.integers(-2, 2), seeds)
    def test_matches_dense_weighted_norm(self, d, n, p, seed):
        rng = np.random.default_rng(seed)
        T = random_tensor(rng, n, d)
        scale = HilbertScale.default(d)
        ref = oracles.dense_weighted_norm(dense(T), scale.weights, p)
        assert scale_norm(T, scale, p) == pytest.approx(ref, rel=1e-12)

    @given(dims, degrees, seeds)
    def test_monotone_in_p(self, d, n, seed):
        rng = np.random.default_rng(seed)
        T = random_tensor(rng, n, d)
        scale = HilbertScale.default(d)
        vals = [scale_norm(T, scale, p) for p in range(-2, 3)]
        assert all(a <= b * (1 + 1e-14) for a, b in zip(vals, vals[1:]))

    def test_extended_precision_is_preserved(self):
        x = np.array([0.5], dtype=np.longdouble)
        T = SymTensor.rank_one(x, 400) / np.longdouble(10.0) ** 300
        v = scale_norm(T, HilbertScale((1.0,)), 0)
        assert v.dtype == np.longdouble
        assert float(np.log10(v)) == pytest.approx(400 * np.log10(0.5) - 300, rel=1e-12)

    def test_scale_validation(self):
        with pytest.raises(ValueError):
            HilbertScale((0.5, 2.0))
        with pytest.raises(ValueError):
            HilbertScale(())
        assert HilbertScale.default(3).weights == (2.0, 3.0, 4.0)


class TestSymmetrizeProduct:
    def test_powers_add(self, rng):
        x = rng.standard_normal(3)
        got = symmetrize_product(SymTensor.rank_one(x, 2), SymTensor.rank_one(x, 3))
        np.testing.assert_allclose(got.coeffs, SymTensor.rank_one(x, 5).coeffs, rtol=1e-12)

    def test_basis_vectors(self):
        e1, e2 = SymTensor.basis(1, 2, (1, 0)), SymTensor.basis(1, 2, (0, 1))
        assert symmetrize_product(e1, e2)[(1, 1)] == 0.5

    @given(dims, st.integers(0, 3), st.integers(0, 3), seeds)
    def test_matches_dense_symmetrization(self, d, a, b, seed):
        rng = np.random.default_rng(seed)
        T, S = random_tensor(rng, a, d), random_tensor(rng, b, d)
        ref = oracles.dense_symmetrize(np.multiply.outer(dense(T), dense(S)))
        got = symmetrize_product(T, S)
        for alpha in multi_indices(d, a + b):
            assert got[alpha] == pytest.approx(oracles.class_value(ref, alpha).real, abs=1e-12)

    @given(dims, st.integers(0, 3), st.integers(0, 3), seeds)
    def test_commutative(self, d, a, b, seed):
        rng = np.random.default_rng(seed)
        T, S = random_tensor(rng, a, d), random_tensor(rng, b, d)
        np.testing.assert_allclose(symmetrize_product(T, S).coeffs, symmetrize_product(S, T).coeffs,
                                   rtol=1e-12, atol=1e-14)


class TestContraction:
    def test_rank_one_factorization(self, rng):
        xi, eta, theta = rng.standard_normal((3, 2))
        f = BiSymTensor.outer(SymTensor.rank_one(xi, 2), SymTensor.rank_one(eta, 3))
        got = contract(f, SymTensor.rank_one(theta, 3))
        np.testing.assert_allclose(got.coeffs, np.dot(eta, theta) ** 3 * SymTensor.rank_one(xi, 2).coeffs,
                                   rtol=1e-12)

    def test_out_degree_zero_is_pairing(self, rng):
        S = random_tensor(rng, 3, 2)
        W = random_tensor(rng, 3, 2)
        f = BiSymTensor(0, 3, 2, W.coeffs[None, :])
        assert contract(f, S).coeffs[0] == pytest.approx(pairing(W, S), rel=1e-12)

    @given(st.integers(1, 2), st.integers(0, 2), st.integers(0, 2), seeds)
    def test_matches_dense_contraction(self, d, m, n, seed):
        rng = np.random.default_rng(seed)
        f = BiSymTensor(m, n, d, rng.standard_normal((num_classes(d, m), num_classes(d, n))))
        S = random_tensor(rng, n, d)
        ref = oracles.dense_contract_last(dense_bi(f), dense(S))
        got = contract(f, S)
        for alpha in multi_indices(d, m):
            assert got[alpha] == pytest.approx(oracles.class_value(ref, alpha).real, abs=1e-12)

    @given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 2), seeds)
    def test_interior_matches_dense(self, d, m, k, seed):
        if k > m:
            return
        rng = np.random.default_rng(seed)
        T, S = random_tensor(rng, m, d), random_tensor(rng, k, d)
        ref = oracles.dense_contract_last(dense(T), dense(S))
        got = interior(T, S)
        for alpha in multi_indices(d, m - k):
            assert got[alpha] == pytest.approx(oracles.class_value(ref, alpha).real, abs=1e-12)

    def test_bisym_pair_matches_dense(self, rng):
        f = BiSymTensor(2, 1, 2, rng.standard_normal((3, 2)))
        xi, eta = rng.standard_normal(2), rng.standard_normal(2)
        ref = oracles.dense_pairing(dense_bi(f), np.multiply.outer(oracles.dense_rank_one(xi, 2), eta))
        assert f.pair(xi, eta) == pytest.approx(ref.real, rel=1e-12)

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            contract(BiSymTensor(1, 2, 2), SymTensor.zeros(1, 2))
        with pytest.raises(ShapeError):
            SymTensor(2, 2, [1.0, 2.0])
        with pytest.raises(ShapeError):
            interior(SymTensor.zeros(1, 2), SymTensor.zeros(2, 2))


class TestSymTensorValue:
    def test_immutable(self):
        T = SymTensor(1, 2, [1.0, 2.0])
        with pytest.raises(ValueError):
            T.coeffs[0] = 5.0

    def test_arithmetic_and_equality(self):
        T = SymTensor.rank_one([1.0, 2.0], 2)
        assert T + T == T * 2
        assert (T - T) == SymTensor.zeros(2, 2)
        assert -T == T * -1
        assert T / 2 == T * 0.5

    def test_dict_round_trip(self):
        T = SymTensor.from_dict(2, 2, {(1, 1): 3.0, (0, 2): -1.0})
        assert SymTensor.from_dict(2, 2, T.to_dict()) == T
        with pytest.raises(ShapeError):
            SymTensor.from_dict(2, 2, {(1, 0): 1.0})

    def test_factorial_identity(self):
        for d, n in [(2, 4), (3, 3)]:
            assert np.sum(multiplicities(d, n)) == pytest.approx(d ** n)
            assert factorial(n) == multiplicities(d, n)[0] * mi_factorial(multi_indices(d, n)[0])

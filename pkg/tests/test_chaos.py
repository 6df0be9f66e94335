import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from appell import (Gamma, Gaussian, PowerSeries, ShapeError, SymTensor, UnsupportedError, build, dual_norm,
                    embed_l2, exponential_vector, q_pair, rho, scale_norm, test_norm, to_appell, to_monomial)
from appell.chaos import ChaosFunctional, ChaosVector, evaluate
from appell.measures import ProductMeasure
from appell.series import evaluate_many, graded_offsets
from appell.tensor import graded_indices, multi_indices, multiplicities
from helpers import product, random_tensor, random_vector

seeds = st.integers(0, 2**32 - 1)


class TestNorms:
    def test_exponential_vector_geometric_sum(self):
        sys = build(product(Gaussian()), N=60)
        # default weight for d=1 is 2, so |eta|_0 = 0.5
        val = test_norm(exponential_vector(sys, [0.5]), 0.0, 1.0) ** 2
        assert val == pytest.approx(2.0 * (1 - 0.5 ** 61), rel=1e-14)

    def test_constant_and_single_degree(self, mixed2, rng):
        assert test_norm(ChaosVector.from_dict(mixed2, {0: 1.0}), 2.0, 3.0) == 1.0
        w = random_tensor(rng, 3, 2)
        v = ChaosVector.from_dict(mixed2, {3: w})
        expected = 6.0 * 2 ** (1.5 * 2) * scale_norm(w, mixed2.scale, 1.0)
        assert test_norm(v, 1.0, 2.0) == pytest.approx(expected, rel=1e-14)

    def test_dual_examples(self, gauss2):
        assert dual_norm(ChaosFunctional.from_dict(gauss2, {0: 1.0}), 1.0, 1.0) == 1.0
        xi = np.array([0.4, -0.7])
        Phi = ChaosFunctional.from_dict(gauss2, {3: SymTensor.rank_one(xi, 3)})
        p, q = 1.0, 2.0
        expected = 2 ** (-q * 3 / 2) * gauss2.scale.norm(xi, -p) ** 3
        assert dual_norm(Phi, p, q) == pytest.approx(expected, rel=1e-13)

    @given(seeds)
    def test_rho_bound(self, seed):
        rng = np.random.default_rng(seed)
        sys = build(product(Gaussian(), Gaussian()), N=8)
        xi = rng.uniform(-3, 3, 2)
        p0, q0 = rng.uniform(0, 2), rng.uniform(0, 3)
        lhs = dual_norm(rho(sys, -xi), p0, q0)
        assert lhs <= math.exp(sys.scale.norm(xi, -p0) / 2 ** (q0 / 2)) * (1 + 1e-12)

    @given(seeds)
    def test_monotone_in_p_and_q(self, seed):
        rng = np.random.default_rng(seed)
        sys = build(product(Gaussian(), Gaussian()), N=4)
        phi = random_vector(sys, rng)
        Phi = ChaosFunctional(sys, phi.coeffs)
        p, q, dp, dq = rng.uniform(0, 2, 4)
        assert test_norm(phi, p + dp, q) >= test_norm(phi, p, q) * (1 - 1e-14)
        assert test_norm(phi, p, q + dq) >= test_norm(phi, p, q) * (1 - 1e-14)
        assert dual_norm(Phi, p + dp, q) <= dual_norm(Phi, p, q) * (1 + 1e-14)
        assert dual_norm(Phi, p, q + dq) <= dual_norm(Phi, p, q) * (1 + 1e-14)

    @given(seeds)
    def test_duality_estimate(self, seed):
        rng = np.random.default_rng(seed)
        sys = build(product(Gaussian(), Gaussian()), N=5)
        phi, Phi = random_vector(sys, rng), ChaosFunctional(sys, random_vector(sys, rng).coeffs)
        p, q = rng.uniform(0, 2, 2)
        assert abs(q_pair(sys, Phi, phi)) <= dual_norm(Phi, p, q) * test_norm(phi, p, q) + 1e-12


class TestBasisChange:
    def test_gaussian_examples(self, gauss1):
        np.testing.assert_array_equal(to_monomial(ChaosVector.from_dict(gauss1, {2: 1.0})).coeffs[:3], [-1, 0, 1])
        np.testing.assert_array_equal(to_monomial(ChaosVector.from_dict(gauss1, {0: 1.0})).coeffs, np.eye(9)[0])
        phi = to_appell(PowerSeries.from_dict(1, 8, {(2,): 1.0}), gauss1)
        np.testing.assert_array_equal(phi.flat(), np.eye(9)[0] + np.eye(9)[2])

    def test_poisson_linear(self, poisson1):
        phi = to_appell(PowerSeries.from_dict(1, 8, {(1,): 1.0}), poisson1)
        np.testing.assert_allclose(phi.flat(), np.eye(9)[0] + np.eye(9)[1], atol=1e-15)

    def test_appell_polynomial_has_unit_coefficient(self, mixed2):
        for n in range(mixed2.N + 1):
            for g, gamma in enumerate(multi_indices(2, n)):
                phi = to_appell(mixed2.polynomial(n, gamma), mixed2)
                expected = np.zeros(len(phi.flat()))
                # <P_n | phi_n> picks up multiplicity times the class entry
                expected[graded_offsets(2, mixed2.N)[n] + g] = 1.0 / multiplicities(2, n)[g]
                np.testing.assert_allclose(phi.flat(), expected, atol=1e-12)

    @given(seeds)
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        sys = build(product(Gamma(2.0, 1.0), Gaussian()), N=5)
        phi = random_vector(sys, rng)
        np.testing.assert_allclose(to_appell(to_monomial(phi), sys).flat(), phi.flat(), atol=1e-12, rtol=1e-12)

    def test_degree_too_high(self, gauss1):
        with pytest.raises(ShapeError):
            to_appell(PowerSeries.from_dict(1, 12, {(10,): 1.0}), gauss1)


class TestEvaluate:
    def test_examples(self, gauss1, mixed2):
        assert evaluate(ChaosVector.from_dict(gauss1, {2: 1.0}), 2.0) == 3.0
        assert ChaosVector.from_dict(mixed2, {0: 2.5})([0.3, -9.0]) == 2.5

    def test_matches_monomial_form(self, mixed2, rng):
        phi = random_vector(mixed2, rng)
        pts = rng.uniform(-2, 2, (6, 2)) + 1j * rng.uniform(-1, 1, (6, 2))
        np.testing.assert_allclose([phi(x) for x in pts], evaluate_many(to_monomial(phi), pts), rtol=1e-12)


class TestEmbedding:
    def test_hermite_example(self, gauss1):
        Phi = embed_l2(ChaosVector.from_dict(gauss1, {2: 1.0}))
        np.testing.assert_allclose(Phi.flat(), np.eye(9)[2], atol=1e-12)

    def test_constant(self, mixed2):
        Phi = embed_l2(ChaosVector.from_dict(mixed2, {0: 1.0}))
        expected = np.zeros(len(Phi.flat()))
        expected[0] = 1.0
        np.testing.assert_allclose(Phi.flat(), expected, atol=1e-12)

    @pytest.mark.parametrize("fixture", ["gauss1", "poisson1", "gamma1", "mixed2"])
    def test_pairing_reproduces_l2_product(self, fixture, request, rng):
        sys = request.getfixturevalue(fixture)
        for _ in range(3):
            phi, psi = random_vector(sys, rng, 3), random_vector(sys, rng, 3)
            # independent check: monomial product integrated against raw moments
            exact = _integrate_by_moments(sys, to_monomial(phi), to_monomial(psi))
            assert q_pair(sys, embed_l2(phi), psi) == pytest.approx(exact, rel=1e-8, abs=1e-8)

    def test_gram_matrix_nonsingular(self, mixed2):
        n = graded_offsets(2, 3)[-1]
        sys = build(mixed2.measure, N=3)
        G = np.array([[q_pair(sys, embed_l2(ChaosVector.from_flat(sys, np.eye(n)[i])),
                              ChaosVector.from_flat(sys, np.eye(n)[j])) for j in range(n)] for i in range(n)])
        assert np.linalg.matrix_rank(G) == n
        np.testing.assert_allclose(G, G.T, atol=1e-9)

    def test_quadrature_limit(self):
        sys = build(ProductMeasure.iid(Gaussian(), 4), N=1)
        with pytest.raises(UnsupportedError):
            embed_l2(ChaosVector.from_dict(sys, {0: 1.0}))


def _integrate_by_moments(sys, a: PowerSeries, b: PowerSeries) -> float:
    idx = graded_indices(sys.d, sys.N)
    total = 0.0
    for i, al in enumerate(idx):
        for j, be in enumerate(idx):
            if a.coeffs[i] and b.coeffs[j]:
                total += a.coeffs[i] * b.coeffs[j] * sys.measure.moment(tuple(x + y for x, y in zip(al, be)))
    return total


class TestSerialization:
    def test_json_round_trip(self, mixed2, rng):
        phi = random_vector(mixed2, rng)
        back = ChaosVector.from_json(mixed2, json.loads(json.dumps(phi.to_json())))
        np.testing.assert_array_equal(back.flat(), phi.flat())

    def test_complex_round_trip(self, gauss2, rng):
        Phi = ChaosFunctional(gauss2, [random_tensor(rng, n, 2, complex_=True) for n in range(7)])
        back = ChaosFunctional.from_json(gauss2, json.loads(json.dumps(Phi.to_json())))
        np.testing.assert_array_equal(back.flat(), Phi.flat())

    def test_mismatched_system(self, gauss2, gauss1, rng):
        with pytest.raises(ShapeError):
            ChaosVector.from_json(gauss1, random_vector(gauss2, rng).to_json())

    def test_arithmetic(self, gauss2, rng):
        a, b = random_vector(gauss2, rng), random_vector(gauss2, rng)
        np.testing.assert_allclose((2 * a - b + (-a)).flat(), a.flat() - b.flat())
        with pytest.raises(ShapeError):
            ChaosVector.from_dict(gauss2, {9: 1.0})

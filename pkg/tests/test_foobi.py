from itertools import permutations
from unittest import TestCase, main

import numpy as np

from smoothtensor import DenseTensor, FoobiParams
from smoothtensor.foobi import psi, phi, build_m_phi, build_h_phi, psi_map, psi_map_inverse, condition_kappas, \
    phi_monomial_spec, generate_instance, square_root_factor, decompose, decompose_subspace, match_components, \
    matricize, null_space_basis, draw_null_element, min_gap
from smoothtensor.linalg import sigma_min, singular_values
from smoothtensor.tensor_core import outer_power, khatri_rao_power
from smoothtensor.utils.errors import DimensionMismatchError, RankOverestimateError

rng = np.random.default_rng(17)


def random_factors(n, r):
    a = rng.standard_normal((n, r))
    return a / np.linalg.norm(a, axis=0)


def power_tensor(u, ell):
    return DenseTensor([len(u)] * ell, outer_power(u, ell))


def clean_instance(n, ell, r):
    for seed in range(20):
        instance = generate_instance(n, ell, r, seed=seed)
        s = singular_values(build_h_phi(square_root_factor(instance.t, r), n))
        if s[-r] <= 1e-8 < s[-r - 1]:
            return instance
    raise AssertionError('no instance with an exact null space')


def brute_match(a, b):
    best = np.inf
    for perm in permutations(range(a.shape[1])):
        total = sum(min(np.linalg.norm(a[:, i] - b[:, p]), np.linalg.norm(a[:, i] + b[:, p]))
                    for i, p in enumerate(perm))
        best = min(best, total)
    return best


class TestPsi(TestCase):
    def test_linear_case(self):
        e = np.eye(2)
        m = psi(DenseTensor([2], e[0]), DenseTensor([2], e[1])).array()
        assert m.tolist() == [[0.0, 1.0], [-1.0, 0.0]]

    def test_vanishes_on_powers(self):
        for ell in (2, 3):
            x = power_tensor(rng.standard_normal(3), ell)
            assert np.abs(psi(x, x).data).max() < 1e-12

    def test_phi_symmetric(self):
        x = DenseTensor([3, 3], rng.standard_normal(9))
        y = DenseTensor([3, 3], rng.standard_normal(9))
        assert np.allclose(phi(x, y).data, phi(y, x).data)

    def test_phi_linear_degenerate(self):
        x = DenseTensor([4], rng.standard_normal(4))
        y = DenseTensor([4], rng.standard_normal(4))
        assert np.abs(phi(x, y).data).max() < 1e-15

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            psi(DenseTensor([2, 2], np.zeros(4)), DenseTensor([3, 3], np.zeros(9)))


class TestMPhi(TestCase):
    def test_two_factors(self):
        m = build_m_phi(random_factors(3, 2), 2)
        assert m.shape == (81, 1)

    def test_equal_columns(self):
        a = random_factors(3, 3)
        a[:, 1] = a[:, 0]
        m = build_m_phi(a, 2)
        assert np.abs(m[:, 0]).max() < 1e-15
        assert np.abs(m[:, 1]).max() > 0

    def test_single_factor(self):
        with self.assertRaises(ValueError):
            build_m_phi(random_factors(3, 1), 2)

    def test_smoothed_full_rank(self):
        good = 0
        for trial in range(100):
            instance = generate_instance(4, 2, 5, rho=0.1, seed=trial)
            good += sigma_min(build_m_phi(instance.a, 2)) > 1e-6
        assert good >= 95

    def test_monomial_spec(self):
        spec = phi_monomial_spec(3, 2)
        assert len(spec.tuples()) == 12
        assert spec.tuples()[0] == (0, 0, 1, 1)


class TestHPhi(TestCase):
    def test_product_columns(self):
        a = random_factors(3, 3)
        h = build_h_phi(khatri_rao_power(a, 2), 3)
        assert h.shape == (81, 6)
        for c in (0, 3, 5):
            assert np.abs(h[:, c]).max() < 1e-12

    def test_psi_map_indicator(self):
        z = np.zeros(6)
        z[0] = 1.0
        assert np.array_equal(psi_map(z), np.outer(np.eye(3)[0], np.eye(3)[0]))

    def test_psi_map_isometry(self):
        z = rng.standard_normal(10)
        s = psi_map(z)
        assert np.allclose(s, s.T)
        assert abs(np.linalg.norm(s) - np.linalg.norm(z)) < 1e-12
        assert np.allclose(psi_map_inverse(s), z)

    def test_psi_map_size(self):
        with self.assertRaises(DimensionMismatchError):
            psi_map(np.ones(4))


class TestKappas(TestCase):
    def test_orthonormal_linear(self):
        kappa_u, _ = condition_kappas(np.eye(3), 1)
        assert abs(kappa_u - 1.0) < 1e-12

    def test_duplicated_column(self):
        a = random_factors(4, 3)
        a[:, 2] = a[:, 0]
        kappa_u, kappa_m = condition_kappas(a, 2)
        assert kappa_u == float('inf') and kappa_m == float('inf')


class TestDecompose(TestCase):
    def test_single_component(self):
        instance = generate_instance(3, 2, 1, seed=1)
        b = decompose(instance.t, 1, seed=1)
        a = instance.a[:, 0]
        assert min(np.linalg.norm(b[:, 0] - a), np.linalg.norm(b[:, 0] + a)) <= 1e-8

    def test_exact_recovery(self):
        good = 0
        for seed in range(20):
            instance = generate_instance(4, 2, 5, seed=seed)
            b = decompose(instance.t, 5, seed=seed)
            error, _, _ = match_components(instance.a, b)
            good += error <= 1e-6
        assert good >= 18

    def test_null_space_dimension(self):
        good = 0
        for seed in range(20):
            instance = generate_instance(4, 2, 5, seed=seed)
            s = singular_values(build_h_phi(square_root_factor(instance.t, 5), 4))
            good += s[-5] <= 1e-8 < s[-6]
        assert good >= 18

    def test_small_error(self):
        good = 0
        for seed in range(20):
            instance = generate_instance(4, 2, 5, err_norm=1e-8, seed=200 + seed)
            error, _, _ = match_components(instance.a, decompose(instance.t, 5, seed=seed))
            good += error <= 1e-4
        assert good >= 18

    def test_reconstruction(self):
        for seed in range(5):
            instance = generate_instance(4, 2, 5, seed=400 + seed)
            m, _, _ = matricize(instance.t)
            h = square_root_factor(instance.t, 5)
            assert np.linalg.norm(h @ h.T - m) <= 1e-8 * np.linalg.norm(m)

    def test_eigengap_frequency(self):
        n, r = 4, 5
        instance = clean_instance(n, 2, r)
        basis = null_space_basis(build_h_phi(square_root_factor(instance.t, r), n), r)
        threshold = FoobiParams().gap_threshold(r)
        good = sum(min_gap(np.linalg.eigh(draw_null_element(basis, rng))[0]) >= threshold for _ in range(100))
        assert good >= 80

    def test_same_seed_same_output(self):
        instance = clean_instance(4, 2, 5)
        assert np.array_equal(decompose(instance.t, 5, seed=3), decompose(instance.t, 5, seed=3))

    def test_higher_order(self):
        good = 0
        for seed in range(5):
            instance = generate_instance(3, 3, 4, seed=300 + seed)
            error, _, _ = match_components(instance.a, decompose(instance.t, 4, seed=seed))
            good += error <= 1e-5
        assert good >= 4

    def test_rank_overestimate(self):
        instance = generate_instance(4, 2, 2, seed=3)
        with self.assertRaises(RankOverestimateError):
            decompose(instance.t, 4)

    def test_order_two(self):
        with self.assertRaises(ValueError):
            decompose(DenseTensor([3, 3], np.eye(3).ravel()), 1)

    def test_odd_order(self):
        with self.assertRaises(DimensionMismatchError):
            decompose(DenseTensor([2, 2, 2], np.zeros(8)), 1)


class TestDecomposeSubspace(TestCase):
    def test_mixed_basis(self):
        a = random_factors(4, 4)
        w = khatri_rao_power(a, 2) @ rng.standard_normal((4, 4))
        b = decompose_subspace(w, 4, seed=4)
        assert np.allclose(np.linalg.norm(b, axis=0), 1.0)
        error, _, _ = match_components(a, b)
        assert error <= 1e-6


class TestMatch(TestCase):
    def test_identical(self):
        a = random_factors(4, 5)
        error, perm, signs = match_components(a, a)
        assert error == 0.0
        assert perm.tolist() == list(range(5)) and signs.tolist() == [1.0] * 5

    def test_reversed_negated(self):
        a = random_factors(4, 5)
        error, perm, signs = match_components(a, -a[:, ::-1])
        assert error == 0.0
        assert perm.tolist() == [4, 3, 2, 1, 0] and signs.tolist() == [-1.0] * 5

    def test_unsigned(self):
        a = random_factors(3, 2)
        error, _, _ = match_components(a, -a, signed=False)
        assert error > 0

    def test_brute_force(self):
        for r in range(2, 7):
            a, b = random_factors(3, r), random_factors(3, r)
            error, _, _ = match_components(a, b)
            assert abs(error - brute_match(a, b)) < 1e-12


class TestParams(TestCase):
    def test_json(self):
        params = FoobiParams(retries=5, gap_floor=0.5)
        assert FoobiParams.from_json(params.to_json()).to_json() == params.to_json()
        assert abs(params.gap_threshold(5) - 0.5 / 500) < 1e-15

    def test_invalid(self):
        with self.assertRaises(ValueError):
            FoobiParams(retries=0)
        with self.assertRaises(ValueError):
            FoobiParams(gap_floor=0.0)


if __name__ == '__main__':
    main()

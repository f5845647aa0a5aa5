from functools import reduce
from itertools import product
from math import comb
from unittest import TestCase, main

import numpy as np

from smoothtensor import HmmModel
from smoothtensor.foobi import match_components
from smoothtensor.hmm import stationary, sparse_pattern, gen_model, build_views, transition_factor, \
    collapsed_transition_factor, collapse_rows, path_spec, exact_moment3, exact_moments, sample_sequences, \
    empirical_moments, empirical_moment3, jennrich, estimate_views, recover_observation, recover_transition, \
    recover_model, recovery_errors, view_condition, row_collapse_holds
from smoothtensor.tensor_core import delta_profile
from smoothtensor.utils.errors import ReducibleChainError, DimensionMismatchError, SmoothTensorError

rng = np.random.default_rng(29)


def random_model(r, n, d, seed, rho=0.1):
    return gen_model(r, n, d, rho, seed=seed)


def brute_moment3(model, ell):
    o, p, w = model.o_tilde, model.p, model.w
    window = 2 * ell + 1
    total = 0.0
    for states in product(range(model.r), repeat=window):
        prob = w[states[0]] * np.prod([p[a, b] for a, b in zip(states, states[1:])])
        past = reduce(np.kron, [o[:, z] for z in reversed(states[:ell])])
        future = reduce(np.kron, [o[:, z] for z in states[ell + 1:]])
        total = total + prob * np.einsum('a,b,c->abc', past, o[:, states[ell]], future)
    return total


class TestStationary(TestCase):
    def test_swap(self):
        assert np.allclose(stationary([[0.0, 1.0], [1.0, 0.0]]), [0.5, 0.5])

    def test_doubly_stochastic(self):
        p = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
        assert np.allclose(stationary(p), np.full(3, 1 / 3))

    def test_reducible(self):
        with self.assertRaises(ReducibleChainError):
            stationary(np.eye(2))

    def test_nearly_identity(self):
        p = np.eye(3) * (1 - 2e-9) + 1e-9 * (np.ones((3, 3)) - np.eye(3))
        with self.assertRaises(ReducibleChainError):
            stationary(p)

    def test_weak_but_real_transitions(self):
        p = np.array([[0.99, 0.01, 0.0], [0.0, 0.99, 0.01], [0.01, 0.0, 0.99]])
        assert np.allclose(stationary(p), np.full(3, 1 / 3))

    def test_generated_positive(self):
        for seed in range(10):
            w = random_model(5, 3, 2, seed=40 + seed).w
            assert (w > 0).all() and abs(w.sum() - 1.0) <= 1e-12


class TestModel(TestCase):
    def test_dense(self):
        model = random_model(4, 5, 4, seed=1)
        assert (model.p > 0).all()

    def test_pattern(self):
        pattern = sparse_pattern(6, 2, rng)
        assert (pattern.sum(axis=0) == 2).all() and (pattern.sum(axis=1) == 2).all()

    def test_no_perturbation(self):
        base = np.eye(3)[:, :2]
        model = gen_model(2, 3, 2, 0.0, seed=2, base=base)
        assert np.array_equal(model.o_tilde, base)

    def test_invariants(self):
        for seed in range(10):
            model = random_model(6, 4, 2, seed=seed)
            assert np.abs(model.p.sum(axis=1) - 1.0).max() <= 1e-12
            assert np.abs(model.w @ model.p - model.w).max() <= 1e-10
            assert (model.p > 0).sum(axis=1).max() <= 2 and (model.p > 0).sum(axis=0).max() <= 2
            assert np.linalg.svd(model.p, compute_uv=False)[-1] >= 0.05

    def test_validation(self):
        with self.assertRaises(ValueError):
            HmmModel([[0.5, 0.4], [0.5, 0.5]], np.eye(2), [0.5, 0.5])
        with self.assertRaises(ValueError):
            HmmModel([[0.5, 0.5], [0.5, 0.5]], np.eye(2), [0.9, 0.1])
        with self.assertRaises(ValueError):
            HmmModel(np.full((3, 3), 1 / 3), np.eye(3), np.full(3, 1 / 3), d=2)

    def test_json(self):
        model = random_model(3, 4, 2, seed=3)
        again = HmmModel.from_json(model.to_json())
        assert np.array_equal(again.p, model.p) and np.array_equal(again.o_tilde, model.o_tilde)
        assert again.d == model.d


class TestViews(TestCase):
    def test_linear_future(self):
        model = random_model(4, 5, 2, seed=4)
        views = build_views(model, 1)
        assert np.allclose(views.c, model.o_tilde @ model.p.T)
        assert np.array_equal(views.b, model.o_tilde)

    def test_path_sum(self):
        model = random_model(3, 3, 2, seed=5)
        for ell in (1, 2, 3):
            o = reduce(np.kron, [model.o_tilde] * ell)
            assert np.allclose(build_views(model, ell).c, o @ transition_factor(model.p, ell))

    def test_moment_brute_force(self):
        model = random_model(2, 2, 2, seed=6)
        for ell in (1, 2):
            assert np.allclose(exact_moment3(model, ell).array(), brute_moment3(model, ell))

    def test_moments_agree(self):
        model = random_model(3, 3, 2, seed=7)
        moments = exact_moments(model, 2)
        assert moments.exact
        assert np.allclose(moments.t3.array(), exact_moment3(model, 2).array())
        assert np.allclose(moments.mean, model.o_tilde @ model.w)
        assert moments.m13_long.shape == (9, 27)

    def test_view_condition(self):
        assert view_condition(random_model(4, 5, 2, seed=8), 1) > 0


class TestSampling(TestCase):
    def test_deterministic(self):
        model = random_model(3, 4, 2, seed=9)
        x1, z1 = sample_sequences(model, 3, 25000, seed=10, jobs=1)
        x2, z2 = sample_sequences(model, 3, 25000, seed=10, jobs=3)
        assert np.array_equal(x1, x2) and np.array_equal(z1, z2)
        assert x1.shape == (25000, 3, 4)

    def test_single_state_no_noise(self):
        o = rng.standard_normal(3)
        model = HmmModel(np.ones((1, 1)), o[:, None], [1.0], sigma_obs=0.0)
        x, z = sample_sequences(model, 3, 5, seed=11)
        assert np.array_equal(x, np.broadcast_to(o, (5, 3, 3)))
        assert (z == 0).all()

    def test_empirical_converges(self):
        model = random_model(3, 3, 2, seed=12)
        x, _ = sample_sequences(model, 4, 50000, seed=13)
        empirical = empirical_moments(x, 1)
        exact = exact_moments(model, 1)
        assert np.linalg.norm(empirical.t3.data - exact.t3.data) < 0.1
        assert np.linalg.norm(empirical.m13 - exact.m13) < 0.1
        assert np.linalg.norm(empirical.mean - exact.mean) < 0.05
        assert empirical.samples == 50000 and empirical.m13_long is not None
        assert np.allclose(empirical_moment3(x[:, :3], 1).data, empirical.t3.data)

    def test_empirical_invalid(self):
        with self.assertRaises(ValueError):
            empirical_moments(np.zeros((0, 3, 2)), 1)
        with self.assertRaises(ValueError):
            empirical_moments(np.zeros((10, 2, 2)), 1)


class TestRecovery(TestCase):
    def test_jennrich_exact(self):
        model = random_model(4, 5, 2, seed=14)
        moments = exact_moments(model, 1)
        a_hat, c_hat, _ = jennrich(moments.t3, 4, moments.m13, seed=0)
        views = build_views(model, 1)
        a = views.a / np.linalg.norm(views.a, axis=0)
        c = views.c / np.linalg.norm(views.c, axis=0)
        assert match_components(a, a_hat)[0] <= 1e-6
        assert match_components(c, c_hat)[0] <= 1e-6

    def test_linear_window(self):
        model = random_model(4, 5, 2, seed=15)
        o_hat, p_hat, w_hat = recover_model(exact_moments(model, 1), 4, seed=0)
        o_err, p_err, perm = recovery_errors(model, o_hat, p_hat)
        assert o_err <= 1e-6 and p_err <= 1e-6
        assert np.allclose(w_hat[perm], model.w, atol=1e-6)

    def test_linear_window_seeds(self):
        good = 0
        for seed in range(20):
            model = random_model(4, 5, 2, seed=500 + seed)
            try:
                o_hat, p_hat, _ = recover_model(exact_moments(model, 1), 4, seed=seed)
            except SmoothTensorError:
                continue
            o_err, p_err, _ = recovery_errors(model, o_hat, p_hat)
            good += o_err <= 1e-6 and p_err <= 1e-6
        assert good >= 18

    def test_rebuilt_model_moments(self):
        model = random_model(4, 5, 2, seed=15)
        o_hat, p_hat, _ = recover_model(exact_moments(model, 1), 4, seed=0)
        rebuilt = HmmModel(p_hat, o_hat, stationary(p_hat))
        assert np.allclose(exact_moment3(rebuilt, 1).array(), exact_moment3(model, 1).array(), atol=1e-6)

    def test_observation_only(self):
        model = random_model(4, 5, 2, seed=16)
        o_hat, w_hat = recover_observation(exact_moments(model, 1), 4, seed=1)
        error, perm, _ = match_components(model.o_tilde, o_hat, signed=False)
        assert error <= 1e-6
        assert np.allclose(w_hat[perm], model.w, atol=1e-6)

    def test_fewer_observations_than_states(self):
        good = 0
        for seed in range(20):
            model = random_model(6, 4, 2, seed=100 + seed)
            try:
                o_hat, p_hat, _ = recover_model(exact_moments(model, 2), 6, seed=seed)
            except SmoothTensorError:
                continue
            o_err, p_err, _ = recovery_errors(model, o_hat, p_hat)
            good += o_err <= 1e-4 and p_err <= 1e-4
        assert good >= 18

    def test_identity_transition(self):
        o = rng.standard_normal((2, 3))
        model = HmmModel(np.eye(3), o, [0.2, 0.3, 0.5])
        moments = exact_moments(model, 2)
        views = estimate_views(moments, 3, seed=0)
        o_hat, w_hat = recover_observation(moments, 3, views=views)
        assert w_hat is None
        assert np.allclose(recover_transition(views, moments, o_hat, 3), np.eye(3), atol=1e-6)
        with self.assertRaises(ReducibleChainError):
            recover_model(moments, 3, seed=0)


class TestCollapse(TestCase):
    def test_sum(self):
        a = np.arange(12.0).reshape(6, 2)
        assert collapse_rows(a, 2).tolist() == [[6.0, 8.0], [10.0, 12.0], [14.0, 16.0]]

    def test_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            collapse_rows(np.ones((5, 2)), 2)

    def test_inequality(self):
        for _ in range(100):
            assert row_collapse_holds(rng.standard_normal((12, 3)), 3)


class TestPathSpec(TestCase):
    def test_delta_bound(self):
        ell, d = 3, 2
        model = random_model(6, 3, d, seed=17)
        profile = delta_profile(path_spec(model.p, ell))
        for s, delta in enumerate(profile[:-1], start=1):
            assert delta <= comb(ell, s) * d ** s

    def test_linear_factor(self):
        p = random_model(3, 2, 3, seed=18).p
        assert np.array_equal(transition_factor(p, 1), p.T)

    def test_collapsed_factor(self):
        p = random_model(4, 2, 2, seed=19).p
        for ell in (1, 2, 3):
            assert np.allclose(collapsed_transition_factor(p, ell), np.linalg.matrix_power(p.T, ell))


if __name__ == '__main__':
    main()

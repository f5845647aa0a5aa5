import csv
import json
import os
import tempfile
from unittest import TestCase, main

import numpy as np

from smoothtensor import DenseTensor, ExperimentConfig, HmmModel, ResultRow
from smoothtensor.expcli import run, main as cli_main, summarize, read_model, write_model, EXIT_OK, EXIT_FAILED, \
    EXIT_CONFIG
from smoothtensor.hmm import gen_model, sample_sequences, recovery_errors
from smoothtensor.foobi import generate_instance as foobi_instance
from smoothtensor.subspace_recovery import generate_instance, evaluate
from smoothtensor.Subspace import Subspace
from smoothtensor.utils.matfile import read_matrix, write_matrix, write_tensor


def write_config(directory, text, name='experiment.conf'):
    path = os.path.join(directory, name)
    with open(path, 'w') as f:
        f.write(text)
    return path


def read_rows(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


def read_summary(path):
    with open(path) as f:
        return json.load(f)


def two_state_model():
    return HmmModel([[0.9, 0.1], [0.2, 0.8]], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [2 / 3, 1 / 3],
                    sigma_obs=0.0)


class TestEnsemble(TestCase):
    def test_reproducible(self):
        with tempfile.TemporaryDirectory() as d:
            outputs = []
            for jobs in (1, 3):
                out = os.path.join(d, f'jobs{jobs}')
                path = write_config(d, f'kind = ensemble\nexperiment = column_poly\nn = 4\nell = 2\nk = 5\n'
                                       f'trials = 10\nseed = 7\njobs = {jobs}\nmin_pass_fraction = 0.5\nout = {out}\n')
                assert run(path) == EXIT_OK
                with open(os.path.join(out, 'ensemble.csv'), 'rb') as f:
                    outputs.append(f.read())
            assert outputs[0] == outputs[1]
            rows = read_rows(os.path.join(d, 'jobs1', 'ensemble.csv'))
            assert len(rows) == 10
            assert [int(row['trial_id']) for row in rows] == list(range(10))
            assert all(row['wall_time'] == '0.000000' for row in rows)
            summary = read_summary(os.path.join(d, 'jobs1', 'ensemble_summary.json'))
            assert summary['accepted'] and summary['kind'] == 'ensemble'
            assert [m['count'] for m in summary['metrics'].values()] == [10]

    def test_unknown_experiment(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = ensemble\nexperiment = plotting\nout = {d}\n')
            assert run(path) == EXIT_CONFIG


class TestSubspace(TestCase):
    def test_no_inliers(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = subspace\nn = 8\nd = 2\nm = 64\nalpha = 0\ntrials = 3\nout = {d}\n')
            assert run(path) == EXIT_FAILED
            rows = read_rows(os.path.join(d, 'subspace.csv'))
            assert len(rows) == 3
            assert all(row['metric'] == 'insufficient_inliers_detected' and row['passed'] == 'false'
                       for row in rows)
            assert all(float(row['threshold']) == 4 for row in rows)

    def test_invalid_fraction(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = subspace\nalpha = 1.5\ntrials = 1\nout = {d}\n')
            assert run(path) == EXIT_CONFIG

    def test_points_file(self):
        with tempfile.TemporaryDirectory() as d:
            instance = generate_instance(6, 2, 60, 1.0, 0.1, 0.0, seed=3)
            points = os.path.join(d, 'points.txt')
            write_matrix(points, instance.points)
            path = write_config(d, f'kind = subspace\nd = 2\nell = 1\npoints_file = {points}\nout = {d}\n')
            assert run(path) == EXIT_OK
            basis = read_matrix(os.path.join(d, 'subspace_basis.txt'))
            assert basis.shape == (6, 2)
            assert evaluate(instance.t, Subspace(basis)) <= 1e-8

    def test_missing_points_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = subspace\npoints_file = {d}/absent.txt\nout = {d}\n')
            assert run(path) == EXIT_CONFIG


class TestFoobi(TestCase):
    def test_trials(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = foobi\ntrials = 5\nmin_pass_fraction = 0.6\nout = {d}\n')
            assert run(path) == EXIT_OK
            summary = read_summary(os.path.join(d, 'foobi_summary.json'))
            assert summary['metrics']['matched_error']['median'] <= 1e-6
            low, high = summary['metrics']['matched_error']['wilson_95']
            assert 0.0 <= low <= summary['metrics']['matched_error']['pass_fraction'] <= high <= 1.0

    def test_tensor_file(self):
        with tempfile.TemporaryDirectory() as d:
            tensor = os.path.join(d, 'tensor.txt')
            write_tensor(tensor, foobi_instance(4, 2, 5, seed=4).t)
            path = write_config(d, f'kind = foobi\nR = 5\ntensor_file = {tensor}\nout = {d}\n')
            assert run(path) == EXIT_OK
            assert read_matrix(os.path.join(d, 'foobi_factors.txt')).shape == (4, 5)
            provenance = read_summary(os.path.join(d, 'foobi_factors.json'))
            assert provenance['R'] == 5 and provenance['source'] == tensor

    def test_rank_too_large(self):
        with tempfile.TemporaryDirectory() as d:
            tensor = os.path.join(d, 'tensor.txt')
            write_tensor(tensor, foobi_instance(4, 2, 2, seed=3).t)
            path = write_config(d, f'kind = foobi\nR = 4\ntensor_file = {tensor}\nout = {d}\n')
            assert run(path) == EXIT_FAILED
            rows = read_rows(os.path.join(d, 'foobi.csv'))
            assert len(rows) == 1
            assert rows[0]['metric'] == 'error' and rows[0]['passed'] == 'false'
            assert rows[0]['params'] == 'error=RankOverestimateError'
            assert not read_summary(os.path.join(d, 'foobi_summary.json'))['accepted']

    def test_malformed_tensor_file(self):
        with tempfile.TemporaryDirectory() as d:
            tensor = write_config(d, '3 2 2\n1.0\n', name='tensor.txt')
            path = write_config(d, f'kind = foobi\ntensor_file = {tensor}\nout = {d}\n')
            assert run(path) == EXIT_CONFIG

    def test_unknown_key(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = foobi\nwidth = 3\nout = {d}\n')
            assert run(path) == EXIT_CONFIG
            assert not os.path.exists(os.path.join(d, 'foobi.csv'))


class TestHmm(TestCase):
    def test_exact_moments(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = hmm\nr = 4\nn = 5\nd = 2\nell = 1\ntrials = 3\nout = {d}\n')
            assert cli_main(['hmm', '--config', path, '--seed', '11']) == EXIT_OK
            rows = read_rows(os.path.join(d, 'hmm.csv'))
            assert [row['metric'] for row in rows] == ['observation_error', 'transition_error'] * 3
            assert all(float(row['value']) <= 1e-6 for row in rows)

    def test_sparsity_range(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = hmm\nr = 3\nd = 4\nout = {d}\n')
            assert run(path) == EXIT_CONFIG

    def test_model_file(self):
        with tempfile.TemporaryDirectory() as d:
            model = gen_model(4, 5, 2, 0.1, seed=15)
            model_path = os.path.join(d, 'model.txt')
            write_model(model_path, model.p, model.o_tilde, model.w)
            path = write_config(d, f'kind = hmm\nell = 1\nmodel_file = {model_path}\nout = {d}\n')
            assert run(path) == EXIT_OK
            rows = read_rows(os.path.join(d, 'hmm.csv'))
            assert [row['metric'] for row in rows] == ['observation_error', 'transition_error']
            assert all(float(row['value']) <= 1e-6 for row in rows)
            stacked = read_matrix(os.path.join(d, 'hmm_model.txt'))
            assert stacked.shape == (10, 4)
            o_err, p_err, _ = recovery_errors(model, stacked[4:9], stacked[:4])
            assert o_err <= 1e-6 and p_err <= 1e-6

    def test_model_file_round_trip(self):
        with tempfile.TemporaryDirectory() as d:
            model = gen_model(3, 4, 2, 0.1, seed=20)
            path = os.path.join(d, 'model.txt')
            write_model(path, model.p, model.o_tilde, model.w)
            again = read_model(path, model.sigma_obs)
            assert np.array_equal(again.p, model.p) and np.array_equal(again.o_tilde, model.o_tilde)
            assert np.array_equal(again.w, model.w)

    def test_samples_file(self):
        model = two_state_model()
        x, _ = sample_sequences(model, 4, 20000, seed=21)
        with tempfile.TemporaryDirectory() as d:
            samples = os.path.join(d, 'samples.txt')
            write_tensor(samples, DenseTensor(x.shape, x.ravel()))
            model_path = os.path.join(d, 'model.txt')
            write_model(model_path, model.p, model.o_tilde, model.w)
            path = write_config(d, f'kind = hmm\nell = 1\nsigma_obs = 0\nmax_error = 0.2\n'
                                   f'model_file = {model_path}\nsamples_file = {samples}\nout = {d}\n')
            assert run(path) == EXIT_OK
            assert read_matrix(os.path.join(d, 'hmm_model.txt')).shape == (6, 2)

    def test_samples_without_model(self):
        x, _ = sample_sequences(two_state_model(), 4, 20000, seed=22)
        with tempfile.TemporaryDirectory() as d:
            samples = os.path.join(d, 'samples.txt')
            write_tensor(samples, DenseTensor(x.shape, x.ravel()))
            path = write_config(d, f'kind = hmm\nr = 2\nell = 1\nsamples_file = {samples}\nout = {d}\n')
            assert run(path) == EXIT_OK
            rows = read_rows(os.path.join(d, 'hmm.csv'))
            assert [row['metric'] for row in rows] == ['model_written']
            stacked = read_matrix(os.path.join(d, 'hmm_model.txt'))
            assert stacked.shape == (6, 2)
            assert np.allclose(stacked[:2].sum(axis=1), 1.0)
            assert abs(stacked[-1].sum() - 1.0) <= 1e-12

    def test_missing_model_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = hmm\nmodel_file = {d}/absent.txt\nout = {d}\n')
            assert run(path) == EXIT_CONFIG

    def test_short_model_file(self):
        with tempfile.TemporaryDirectory() as d:
            model_path = os.path.join(d, 'model.txt')
            write_matrix(model_path, np.full((3, 2), 0.5))
            path = write_config(d, f'kind = hmm\nmodel_file = {model_path}\nout = {d}\n')
            assert run(path) == EXIT_CONFIG


class TestSummary(TestCase):
    @staticmethod
    def rows(passed, total):
        return [ResultRow('foobi', i, 0, {}, 'matched_error', 0.0, 1.0, i < passed) for i in range(total)]

    def test_within_interval(self):
        config = ExperimentConfig('foobi', {'min_pass_fraction': 0.95})
        summary = summarize(config, self.rows(9, 10))
        low, high = summary['metrics']['matched_error']['wilson_95']
        assert low < 0.9 < 0.95 < high
        assert summary['accepted']

    def test_far_below(self):
        config = ExperimentConfig('foobi', {'min_pass_fraction': 0.95})
        assert not summarize(config, self.rows(5, 20))['accepted']

    def test_none_passed(self):
        config = ExperimentConfig('foobi', {'min_pass_fraction': 0.0})
        summary = summarize(config, self.rows(0, 10))
        assert not summary['metrics']['matched_error']['accepted'] and not summary['accepted']


class TestMain(TestCase):
    def test_selftest(self):
        with tempfile.TemporaryDirectory() as d:
            assert cli_main(['selftest', '--trials', '6', '--out', d, '--jobs', '2']) == EXIT_OK
            rows = read_rows(os.path.join(d, 'selftest.csv'))
            assert len(rows) == 30
            assert all(row['passed'] == 'true' for row in rows)

    def test_timing(self):
        with tempfile.TemporaryDirectory() as d:
            assert cli_main(['selftest', '--trials', '2', '--out', d, '--timing']) == EXIT_OK
            rows = read_rows(os.path.join(d, 'selftest.csv'))
            assert any(float(row['wall_time']) > 0 for row in rows)

    def test_kind_mismatch(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = foobi\nout = {d}\n')
            assert cli_main(['hmm', '--config', path]) == EXIT_CONFIG

    def test_overrides(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = selftest\ntrials = 50\nout = {d}/ignored\n')
            assert cli_main(['selftest', '--config', path, '--trials', '1', '--out', d]) == EXIT_OK
            assert len(read_rows(os.path.join(d, 'selftest.csv'))) == 5
            assert read_summary(os.path.join(d, 'selftest_summary.json'))['trials'] == 1

    def test_config_written(self):
        with tempfile.TemporaryDirectory() as d:
            path = write_config(d, f'kind = ensemble\nexperiment = column_poly\nn = 4\nell = 2\nk = 5\n'
                                   f'trials = 2\nseed = 3\nmin_pass_fraction = 0.5\nout = {d}/out\n')
            run(path)
            written = ExperimentConfig.load(os.path.join(d, 'out', 'ensemble.conf'))
            assert written == ExperimentConfig.load(path)
            assert written['eps_grid'] == ExperimentConfig('ensemble')['eps_grid']


if __name__ == '__main__':
    main()

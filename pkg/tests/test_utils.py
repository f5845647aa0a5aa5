import os
import tempfile
import threading
import time
from unittest import TestCase, main

import numpy as np

from smoothtensor import DenseTensor, ExperimentConfig, ResultRow, TrialReport
from smoothtensor.ResultRow import FIELDS
from smoothtensor.utils.collections import remove_none_values, pairs
from smoothtensor.utils.errors import ConfigError, MalformedFileError
from smoothtensor.utils.matfile import read_matrix, write_matrix, read_tensor, write_tensor
from smoothtensor.utils.seeding import trial_seed, trial_rng, make_rng, child_rngs
from smoothtensor.utils.stats import wilson_interval, intervals_overlap, median, loglog_slope
from smoothtensor.utils.workers import run_trials

rng = np.random.default_rng(11)


def random_path(directory, name):
    return os.path.join(directory, f'{name}-{rng.integers(1 << 30)}.txt')


class TestMatrixFile(TestCase):
    def test_identity(self):
        with tempfile.TemporaryDirectory() as d:
            path = random_path(d, 'identity')
            write_matrix(path, np.eye(2))
            assert np.array_equal(read_matrix(path), np.eye(2))

    def test_random_bit_exact(self):
        with tempfile.TemporaryDirectory() as d:
            path = random_path(d, 'random')
            m = rng.standard_normal((5, 3)) * 10.0 ** rng.integers(-20, 20, size=(5, 3))
            write_matrix(path, m)
            assert np.array_equal(read_matrix(path), m)

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = random_path(d, 'empty')
            open(path, 'w').close()
            with self.assertRaises(MalformedFileError):
                read_matrix(path)

    def test_row_length(self):
        with tempfile.TemporaryDirectory() as d:
            path = random_path(d, 'short')
            with open(path, 'w') as f:
                f.write('2 2\n1 2\n3\n')
            with self.assertRaises(MalformedFileError):
                read_matrix(path)


class TestTensorFile(TestCase):
    def test_round_trip(self):
        with tempfile.TemporaryDirectory() as d:
            path = random_path(d, 'tensor')
            t = DenseTensor([2, 3, 4], rng.standard_normal(24))
            write_tensor(path, t)
            assert read_tensor(path) == t

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = random_path(d, 'empty')
            open(path, 'w').close()
            with self.assertRaises(MalformedFileError):
                read_tensor(path)

    def test_size_mismatch(self):
        with tempfile.TemporaryDirectory() as d:
            path = random_path(d, 'mismatch')
            with open(path, 'w') as f:
                f.write('2 2 2\n1\n2\n3\n')
            with self.assertRaises(MalformedFileError):
                read_tensor(path)


class TestSeeding(TestCase):
    def test_trial_seed_deterministic(self):
        assert trial_seed(5, 3) == trial_seed(5, 3)
        assert trial_seed(5, 3) != trial_seed(5, 4)
        assert trial_seed(5, 3) != trial_seed(6, 3)

    def test_trial_rng(self):
        assert np.array_equal(trial_rng(1, 2).standard_normal(4), trial_rng(1, 2).standard_normal(4))

    def test_make_rng_passthrough(self):
        g = make_rng(3)
        assert make_rng(g) is g

    def test_child_rngs(self):
        a = [g.standard_normal() for g in child_rngs(9, 3)]
        b = [g.standard_normal() for g in child_rngs(9, 3)]
        assert a == b and len(set(a)) == 3


class TestStats(TestCase):
    def test_wilson(self):
        low, high = wilson_interval(95, 100)
        assert 0.88 < low < 0.95 < high < 0.99
        assert wilson_interval(0, 0) == (0.0, 1.0)
        low, high = wilson_interval(0, 20)
        assert low == 0.0 and high < 0.2

    def test_overlap(self):
        assert intervals_overlap((0.1, 0.3), (0.2, 0.5))
        assert not intervals_overlap((0.1, 0.2), (0.3, 0.5))

    def test_median(self):
        assert median([3.0, 1.0, 2.0]) == 2.0
        assert np.isnan(median([]))

    def test_slope(self):
        xs = [1e-3, 1e-2, 1e-1]
        assert abs(loglog_slope(xs, [3 * x ** 2 for x in xs]) - 2.0) < 1e-10
        assert abs(loglog_slope(xs, [0.0, 1e-2, 1e-1]) - 1.0) < 1e-10
        with self.assertRaises(ValueError):
            loglog_slope(xs, [0.0, 0.0, 1.0])


class TestWorkers(TestCase):
    def test_sorted_results(self):
        def trial(i):
            time.sleep(0.01 * (5 - i))
            return i * i
        assert run_trials(trial, [3, 1, 4, 0, 2], jobs=4) == [0, 1, 4, 9, 16]

    def test_sequential(self):
        names = run_trials(lambda i: threading.current_thread().name, range(3), jobs=1)
        assert len(set(names)) == 1


class TestCollections(TestCase):
    def test_remove_none_values(self):
        assert remove_none_values({'a': 1, 'b': None}) == {'a': 1}

    def test_pairs(self):
        assert list(pairs(3)) == [(0, 1), (0, 2), (1, 2)]
        assert list(pairs(2, diagonal=True)) == [(0, 0), (0, 1), (1, 1)]


class TestExperimentConfig(TestCase):
    def test_defaults(self):
        config = ExperimentConfig('foobi')
        assert config['n'] == 4 and config['R'] == 5 and config['seed'] == 0

    def test_parse(self):
        config = ExperimentConfig.parse('# comment\nkind = hmm\nr = 6  # states\nn = 4\nell = 2\ntiming = true\n')
        assert config.kind == 'hmm'
        assert config['r'] == 6 and config['ell'] == 2 and config['timing'] is True

    def test_round_trip(self):
        config = ExperimentConfig('ensemble', {'rho': 0.1 + 0.2, 'eps_grid': '0.001, 0.01', 'trials': 7})
        again = ExperimentConfig.parse(config.dumps())
        assert again == config
        assert again['eps_grid'] == [0.001, 0.01]

    def test_dump_sorted(self):
        keys = [line.split(' = ')[0] for line in ExperimentConfig('subspace').dumps().splitlines()]
        assert keys == sorted(keys)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.parse('kind = foobi\nunknown = 1\n')
        with self.assertRaises(ConfigError):
            ExperimentConfig.parse('kind = foobi\nn = four\n')
        with self.assertRaises(ConfigError):
            ExperimentConfig.parse('n = 4\n')
        with self.assertRaises(ConfigError):
            ExperimentConfig.parse('kind = plotting\n')
        with self.assertRaises(ConfigError):
            ExperimentConfig.parse('kind = foobi\nthis line has no separator\n')

    def test_overrides(self):
        config = ExperimentConfig('hmm').with_overrides(seed=5, trials=None)
        assert config['seed'] == 5 and config['trials'] == 10


class TestResultRow(TestCase):
    def test_csv(self):
        row = ResultRow('foobi', 3, 17, {'n': 4, 'R': 5}, 'matched_error', 1e-9, 1e-6, True)
        assert row.to_csv() == ['foobi', '3', '17', 'R=5;n=4', 'matched_error', '1e-09', '1e-06', 'true',
                                '0.000000']
        assert len(row.to_csv()) == len(FIELDS)

    def test_sort_key(self):
        rows = [ResultRow('hmm', 1, 0, {}, 'b', 0, 0, True), ResultRow('hmm', 0, 0, {}, 'z', 0, 0, True),
                ResultRow('hmm', 1, 0, {}, 'a', 0, 0, True)]
        assert [(r.trial_id, r.metric) for r in sorted(rows, key=lambda r: r.sort_key)] == \
            [(0, 'z'), (1, 'a'), (1, 'b')]

    def test_from_report(self):
        report = TrialReport(2, 9, {'k': 3}, 'sigma_k', 0.5, 0.1)
        row = ResultRow.from_report('ensemble', report)
        assert row.passed and row.metric == 'sigma_k' and row.trial_id == 2


if __name__ == '__main__':
    main()

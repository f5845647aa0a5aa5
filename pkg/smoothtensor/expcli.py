"""
Запуск экспериментов из командной строки.

    python -m smoothtensor <ensemble|subspace|foobi|hmm|selftest> [--config PATH] [--seed N] [--trials N]
                           [--out DIR] [--jobs N] [--verbose] [--timing]

Каждое испытание получает собственный сид, выведенный из главного сида и номера испытания, поэтому
повторный запуск с тем же сидом даёт побайтно тот же CSV. Результаты пишутся в <out>/<kind>.csv
(колонки FIELDS), сводка в <out>/<kind>_summary.json, использованная конфигурация в <out>/<kind>.conf.
"""
import argparse
import csv
import json
import logging
import os
import sys
import time
from math import ceil, factorial, floor, sqrt
from typing import Callable, Dict, List, Optional

import numpy as np

from smoothtensor import foobi
from smoothtensor.CoefficientMatrix import CoefficientMatrix
from smoothtensor.ExperimentConfig import ExperimentConfig
from smoothtensor.FoobiParams import FoobiParams
from smoothtensor.HmmModel import HmmModel
from smoothtensor.MonomialSpec import MonomialSpec
from smoothtensor.PerturbationModel import PerturbationModel
from smoothtensor.RecoveryParams import RecoveryParams
from smoothtensor.ResultRow import ResultRow, FIELDS
from smoothtensor.Subspace import Subspace
from smoothtensor.SymTensor import SymTensor
from smoothtensor.ensembles import trial_column_poly, trial_monomial, trial_sym_projection, \
    trial_decoupled_projection, signed_combination_demo, small_ball_curve, counterexample_matrix
from smoothtensor.hmm import gen_model, exact_moments, sample_sequences, empirical_moments, recover_model, \
    recovery_errors, row_collapse_holds
from smoothtensor.linalg import sigma_k, sigma_min, leave_one_out, sylvester_holds
from smoothtensor.subspace_recovery import generate_instance, recover_with_selection, evaluate
from smoothtensor.tensor_core import random_sym_subspace, rademacher_sign_moment, decoupling_signed_sum, \
    decoupled_side
from smoothtensor.utils.errors import ConfigError, SmoothTensorError, InsufficientInliersError, MalformedFileError
from smoothtensor.utils.matfile import read_matrix, write_matrix, read_tensor, write_tensor
from smoothtensor.utils.multiindex import sym_dim
from smoothtensor.utils.seeding import trial_seed, make_rng
from smoothtensor.utils.stats import wilson_interval, intervals_overlap, median, loglog_slope
from smoothtensor.utils.workers import run_trials

__all__ = ['main', 'run', 'execute', 'validate', 'summarize', 'read_model', 'write_model', 'read_matrix',
           'write_matrix', 'read_tensor', 'write_tensor']

logger = logging.getLogger(__name__)

KINDS = ['ensemble', 'subspace', 'foobi', 'hmm', 'selftest']
ENSEMBLE_EXPERIMENTS = ['column_poly', 'monomial', 'sym_projection', 'decoupled', 'small_ball',
                        'signed_combination']

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

Trial = Callable[[ExperimentConfig, int], List[ResultRow]]


def _unit_rows(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    rows = rng.standard_normal((count, n))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def _ensemble_trial(config: ExperimentConfig, trial_id: int) -> List[ResultRow]:
    seed = trial_seed(config['seed'], trial_id)
    rng = make_rng(trial_seed(seed, 0))
    model = PerturbationModel(config['rho'], config['n'], trial_seed(seed, 1))
    n, ell, k, c = config['n'], config['ell'], config['k'], config['c']
    experiment = config['experiment']
    if experiment == 'small_ball':
        return _small_ball_rows(config, trial_id, seed, model)
    if experiment == 'column_poly':
        base = np.tile(np.eye(n)[0], (k, 1))
        report = trial_column_poly(CoefficientMatrix.identity(n, ell), base, model, c, config['delta'], trial_id)
    elif experiment == 'monomial':
        columns = [[(i + s) % k for s in range(ell)] for i in range(k)]
        report = trial_monomial(MonomialSpec(k, ell, columns), _unit_rows(rng, k, n), model, c, 1.0, trial_id)
    elif experiment == 'sym_projection':
        s = random_sym_subspace(n, ell, int(floor(config['dim_fraction'] * sym_dim(n, ell))), rng)
        report = trial_sym_projection(_unit_rows(rng, 1, n), s, model, c, trial_id)
    elif experiment == 'decoupled':
        dim = max(1, int(floor(config['dim_fraction'] * n ** ell)))
        w = Subspace.span(rng.standard_normal((n ** ell, dim)))
        report = trial_decoupled_projection(_unit_rows(rng, ell, n), w, model, c, trial_id)
    else:
        s = random_sym_subspace(n, 2, int(floor(config['dim_fraction'] * sym_dim(n, 2))), rng)
        report = signed_combination_demo(_unit_rows(rng, 1, n), s, model, config['r'],
                                         c * config['rho'] ** 2 / n ** 2, trial_id)
    row = ResultRow.from_report('ensemble', report)
    row.seed = seed
    row.params['experiment'] = experiment
    return [row]


def _small_ball_rows(config: ExperimentConfig, trial_id: int, seed: int,
                     model: PerturbationModel) -> List[ResultRow]:
    n, ell, r = config['n'], config['ell'], config['r']
    g = counterexample_matrix(n, ell, r)
    curve = small_ball_curve(g, np.zeros(n), model, config['eps_grid'], config['samples'], config['eta'])
    eps = [e for e, _, _ in curve]
    probs = [p for _, p, _ in curve]
    try:
        slope = loglog_slope(eps, probs, [p * count for _, p, count in curve])
    except ValueError as e:
        logger.warning('trial %d: %s', trial_id, e)
        slope = float('nan')
    params = {'experiment': 'small_ball', 'n': n, 'ell': ell, 'r': r, 'rho': config['rho'],
              'samples': config['samples'], 'eta': config['eta']}
    index = min(int(ceil(r * n / factorial(ell))), min(g.entries.shape))
    sigma = sigma_k(g.entries, index)
    floor_ = 1.0 / sqrt(factorial(ell)) - 1e-10
    return [
        ResultRow('ensemble', trial_id, seed, params, 'loglog_slope', slope, r,
                  abs(slope - r) <= config['slope_tolerance'] * r),
        ResultRow('ensemble', trial_id, seed, params, 'counterexample_sigma', sigma, floor_, sigma >= floor_),
    ]


def _recovery_params(config: ExperimentConfig, n: int) -> RecoveryParams:
    params = RecoveryParams.default(n, config['ell'], config['rho'], config['delta'])
    if config['tau'] > 0:
        params = RecoveryParams(params.ell, params.delta, config['tau'], params.b)
    return params


def _subspace_trial(config: ExperimentConfig, trial_id: int) -> List[ResultRow]:
    seed = trial_seed(config['seed'], trial_id)
    n, d = config['n'], config['d']
    instance = generate_instance(n, d, config['m'], config['alpha'], config['rho'], config['eps0'], seed)
    params = _recovery_params(config, n)
    echo = {'n': n, 'd': d, 'm': config['m'], 'alpha': config['alpha'], 'rho': config['rho'],
            'eps0': config['eps0'], 'ell': params.ell, 'b': params.b, 'tau': params.tau}
    try:
        t_hat, chosen = recover_with_selection(instance.points, params, d)
    except InsufficientInliersError as e:
        logger.error('trial %d: %s', trial_id, e)
        return [ResultRow('subspace', trial_id, seed, echo, 'insufficient_inliers_detected', e.selected, e.required,
                          False)]
    angle = evaluate(instance.t, t_hat)
    outliers = int(np.sum(~instance.labels[chosen]))
    limit = config['max_sin_theta']
    return [
        ResultRow('subspace', trial_id, seed, echo, 'sin_theta', angle, limit, angle <= limit),
        ResultRow('subspace', trial_id, seed, echo, 'outliers_selected', outliers, 0, outliers == 0),
    ]


def _subspace_file(config: ExperimentConfig) -> List[ResultRow]:
    points = read_matrix(config['points_file'])
    params = _recovery_params(config, points.shape[1])
    echo = {'points_file': config['points_file'], 'd': config['d'], 'b': params.b, 'tau': params.tau}
    try:
        t_hat, chosen = recover_with_selection(points, params, config['d'], config['jobs'])
    except InsufficientInliersError as e:
        logger.error('%s', e)
        return [ResultRow('subspace', 0, config['seed'], echo, 'insufficient_inliers_detected', e.selected,
                          e.required, False)]
    path = os.path.join(config['out'], 'subspace_basis.txt')
    write_matrix(path, t_hat.basis)
    logger.info('recovered basis written to %s', path)
    return [ResultRow('subspace', 0, config['seed'], echo, 'selected_points', len(chosen), 2 * t_hat.dim, True)]


def _foobi_params(config: ExperimentConfig) -> FoobiParams:
    return FoobiParams(config['retries'], config['gap_floor'])


def _foobi_trial(config: ExperimentConfig, trial_id: int) -> List[ResultRow]:
    seed = trial_seed(config['seed'], trial_id)
    n, ell, r = config['n'], config['ell'], config['R']
    echo = {'n': n, 'ell': ell, 'R': r, 'err_norm': config['err_norm']}
    limit = config['max_error']
    instance = foobi.generate_instance(n, ell, r, config['err_norm'], seed=trial_seed(seed, 0))
    try:
        a_hat = foobi.decompose(instance.t, r, _foobi_params(config), trial_seed(seed, 1))
    except SmoothTensorError as e:
        logger.error('trial %d: %s', trial_id, e)
        return [ResultRow('foobi', trial_id, seed, echo, 'matched_error', float('inf'), limit, False)]
    error, _, _ = foobi.match_components(instance.a, a_hat)
    return [ResultRow('foobi', trial_id, seed, echo, 'matched_error', error, limit, error <= limit)]


def _foobi_file(config: ExperimentConfig) -> List[ResultRow]:
    t = read_tensor(config['tensor_file'])
    params = _foobi_params(config)
    echo = {'tensor_file': config['tensor_file'], 'R': config['R']}
    a_hat = foobi.decompose(t, config['R'], params, config['seed'])
    path = os.path.join(config['out'], 'foobi_factors.txt')
    write_matrix(path, a_hat)
    with open(os.path.join(config['out'], 'foobi_factors.json'), 'w') as f:
        json.dump({'seed': config['seed'], 'source': config['tensor_file'], 'R': config['R'],
                   'params': params.to_json()}, f, indent=2, sort_keys=True)
    logger.info('factors written to %s', path)
    return [ResultRow('foobi', 0, config['seed'], echo, 'factors_written', a_hat.shape[1], config['R'],
                      a_hat.shape[1] == config['R'])]


def _hmm_trial(config: ExperimentConfig, trial_id: int) -> List[ResultRow]:
    seed = trial_seed(config['seed'], trial_id)
    r, n, ell = config['r'], config['n'], config['ell']
    echo = {'r': r, 'n': n, 'd': config['d'], 'ell': ell, 'rho': config['rho'], 'samples': config['samples']}
    limit = config['max_error']
    try:
        model = gen_model(r, n, config['d'], config['rho'], trial_seed(seed, 0), config['sigma_obs'],
                          config['gamma'])
        if config['samples'] > 0:
            observations, _ = sample_sequences(model, 2 * ell + 2, config['samples'], trial_seed(seed, 1))
            moments = empirical_moments(observations, ell)
        else:
            moments = exact_moments(model, ell)
        o_hat, p_hat, _ = recover_model(moments, r, trial_seed(seed, 2))
        o_err, p_err, _ = recovery_errors(model, o_hat, p_hat)
    except SmoothTensorError as e:
        logger.error('trial %d: %s', trial_id, e)
        o_err = p_err = float('inf')
    return [
        ResultRow('hmm', trial_id, seed, echo, 'observation_error', o_err, limit, o_err <= limit),
        ResultRow('hmm', trial_id, seed, echo, 'transition_error', p_err, limit, p_err <= limit),
    ]


def read_model(path: str, sigma_obs: float) -> HmmModel:
    """
    Модель из файла матрицы (r + n + 1) x r: строки P, затем строки O~, затем w^T.

    :raise MalformedFileError: когда число строк не согласуется с числом столбцов
    """
    m = read_matrix(path)
    r = m.shape[1]
    if m.shape[0] < r + 2:
        raise MalformedFileError(f'model file needs at least {r + 2} rows for {r} states, found {m.shape[0]}')
    return HmmModel(m[:r], m[r:-1], m[-1], sigma_obs)


def write_model(path: str, p: np.ndarray, o_tilde: np.ndarray, w: np.ndarray):
    write_matrix(path, np.vstack([p, o_tilde, np.reshape(w, (1, -1))]))


def _hmm_file(config: ExperimentConfig) -> List[ResultRow]:
    model = read_model(config['model_file'], config['sigma_obs']) if config['model_file'] else None
    r = model.r if model is not None else config['r']
    ell = config['ell']
    echo = {'model_file': config['model_file'], 'samples_file': config['samples_file'], 'r': r, 'ell': ell}
    if config['samples_file']:
        moments = empirical_moments(read_tensor(config['samples_file']).array(), ell)
    else:
        moments = exact_moments(model, ell)
    o_hat, p_hat, w_hat = recover_model(moments, r, config['seed'])
    path = os.path.join(config['out'], 'hmm_model.txt')
    write_model(path, p_hat, o_hat, w_hat)
    logger.info('recovered model written to %s', path)
    if model is None:
        return [ResultRow('hmm', 0, config['seed'], echo, 'model_written', r, r, True)]
    limit = config['max_error']
    o_err, p_err, _ = recovery_errors(model, o_hat, p_hat)
    return [
        ResultRow('hmm', 0, config['seed'], echo, 'observation_error', o_err, limit, o_err <= limit),
        ResultRow('hmm', 0, config['seed'], echo, 'transition_error', p_err, limit, p_err <= limit),
    ]


def _selftest_trial(config: ExperimentConfig, trial_id: int) -> List[ResultRow]:
    seed = trial_seed(config['seed'], trial_id)
    rng = make_rng(seed)
    rows = []

    def add(metric: str, params: Dict, value: float, threshold: float, passed: bool):
        rows.append(ResultRow('selftest', trial_id, seed, params, metric, value, threshold, passed))

    n, ell = 2 + trial_id % 4, 2 + trial_id % 3
    t = SymTensor.random(n, ell, rng)
    x, zs = rng.standard_normal(n), rng.standard_normal((ell, n))
    expected = decoupled_side(t, x, zs)
    error = abs(decoupling_signed_sum(t, x, zs) - expected) / max(1.0, abs(expected))
    add('decoupling_identity', {'n': n, 'ell': ell}, error, 1e-8, error <= 1e-8)

    m = 1 + trial_id % 6
    alphas = rng.uniform(0.5, 1.5, m + 1) * rng.choice([-1.0, 1.0], m + 1)
    expected = factorial(m + 1) * float(np.prod(alphas))
    error = abs(rademacher_sign_moment(alphas) - expected) / max(1.0, abs(expected))
    add('rademacher_identity', {'m': m}, error, 1e-10, error <= 1e-10)

    cols = int(rng.integers(2, 21))
    rows_ = int(rng.integers(cols, 41))
    a = rng.standard_normal((rows_, cols))
    loo, smallest = leave_one_out(a), sigma_min(a)
    ratio = min(smallest * np.sqrt(cols) / loo, loo / smallest)
    add('leave_one_out_sandwich', {'rows': rows_, 'cols': cols}, ratio, 1.0 - 1e-10, ratio >= 1.0 - 1e-10)

    size = 6
    pi = Subspace.span(rng.standard_normal((size, int(rng.integers(1, size))))).complement().projector()
    u = rng.standard_normal((size, int(rng.integers(1, size + 1))))
    p, r = int(rng.integers(1, size + 1)), int(rng.integers(1, u.shape[1] + 1))
    held = sylvester_holds(pi, u, p, r)
    add('sylvester_inequality', {'size': size, 'p': p, 'r': r}, float(held), 1.0, held)

    n1, n2 = int(rng.integers(1, 4)), int(rng.integers(2, 5))
    n3 = int(rng.integers(1, n2 + 1))
    held = row_collapse_holds(rng.standard_normal((n1 * n2, n3)), n1)
    add('row_collapse', {'n1': n1, 'n2': n2, 'n3': n3}, float(held), 1.0, held)
    return rows


TRIALS: Dict[str, Trial] = {
    'ensemble': _ensemble_trial,
    'subspace': _subspace_trial,
    'foobi': _foobi_trial,
    'hmm': _hmm_trial,
    'selftest': _selftest_trial,
}


def validate(config: ExperimentConfig):
    """
    :raise ConfigError: когда параметры не описывают выполнимый эксперимент
    """
    if config['trials'] < 1:
        raise ConfigError('trials must be positive')
    if config['jobs'] < 0:
        raise ConfigError('jobs must be non-negative')
    if not 0 <= config['min_pass_fraction'] <= 1:
        raise ConfigError('min_pass_fraction must lie in [0, 1]')
    if config.kind == 'ensemble':
        if config['experiment'] not in ENSEMBLE_EXPERIMENTS:
            raise ConfigError(f'unknown ensemble experiment {config["experiment"]!r}, '
                              f'expected one of {ENSEMBLE_EXPERIMENTS}')
        if config['n'] < 1 or config['ell'] < 1 or config['k'] < 1:
            raise ConfigError('n, ell and k must be positive')
    elif config.kind == 'subspace':
        if config['points_file'] and not os.path.exists(config['points_file']):
            raise ConfigError(f'points file not found: {config["points_file"]}')
        if not config['points_file'] and not 1 <= config['d'] < config['n']:
            raise ConfigError('hidden dimension d must lie in [1, n)')
    elif config.kind == 'foobi':
        if config['ell'] < 2:
            raise ConfigError('foobi requires ell >= 2')
        if config['tensor_file'] and not os.path.exists(config['tensor_file']):
            raise ConfigError(f'tensor file not found: {config["tensor_file"]}')
    elif config.kind == 'hmm':
        for key in ('model_file', 'samples_file'):
            if config[key] and not os.path.exists(config[key]):
                raise ConfigError(f'{key.replace("_", " ")} not found: {config[key]}')
        if not config['model_file'] and not 1 <= config['d'] <= config['r']:
            raise ConfigError('sparsity d must lie in [1, r]')


def summarize(config: ExperimentConfig, rows: List[ResultRow]) -> Dict:
    """
    Сводка по метрикам: число строк, число прошедших, медиана, интервал Уилсона для доли прошедших.
    Метрика принята, если хотя бы одна строка прошла и интервал Уилсона пересекается с
    [min_pass_fraction, 1]. Эксперимент принят, если приняты все метрики.
    """
    metrics = {}
    for metric in sorted({row.metric for row in rows}):
        selected = [row for row in rows if row.metric == metric]
        passed = sum(row.passed for row in selected)
        fraction = passed / len(selected)
        interval = wilson_interval(passed, len(selected))
        metrics[metric] = {
            'count': len(selected),
            'passed': passed,
            'pass_fraction': fraction,
            'median': median([row.value for row in selected]),
            'wilson_95': list(interval),
            'accepted': passed > 0 and intervals_overlap(interval, (config['min_pass_fraction'], 1.0)),
        }
    return {
        'kind': config.kind,
        'seed': config['seed'],
        'trials': config['trials'],
        'min_pass_fraction': config['min_pass_fraction'],
        'metrics': metrics,
        'accepted': bool(metrics) and all(m['accepted'] for m in metrics.values()),
    }


def _timed(trial: Trial, config: ExperimentConfig) -> Callable[[int], List[ResultRow]]:
    def run_one(trial_id: int) -> List[ResultRow]:
        start = time.perf_counter()
        rows = trial(config, trial_id)
        elapsed = time.perf_counter() - start if config['timing'] else 0.0
        for row in rows:
            row.wall_time = elapsed
        return rows
    return run_one


def _write_results(config: ExperimentConfig, rows: List[ResultRow], summary: Dict):
    with open(os.path.join(config['out'], f'{config.kind}.csv'), 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(FIELDS)
        for row in rows:
            writer.writerow(row.to_csv())
    with open(os.path.join(config['out'], f'{config.kind}_summary.json'), 'w') as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write('\n')


def execute(config: ExperimentConfig) -> int:
    """
    Выполнение проверенной конфигурации.

    :return: код выхода: 0 - все пороги пройдены, 1 - нет, 2 - недопустимые параметры
    """
    os.makedirs(config['out'], exist_ok=True)
    logger.info('running %r', config)
    try:
        if config.kind == 'subspace' and config['points_file']:
            rows = _subspace_file(config)
        elif config.kind == 'foobi' and config['tensor_file']:
            rows = _foobi_file(config)
        elif config.kind == 'hmm' and (config['model_file'] or config['samples_file']):
            rows = _hmm_file(config)
        else:
            per_trial = run_trials(_timed(TRIALS[config.kind], config), range(config['trials']), config['jobs'])
            rows = [row for trial_rows in per_trial for row in trial_rows]
    except (ValueError, MalformedFileError) as e:
        print(f'invalid parameters: {e}', file=sys.stderr)
        return EXIT_CONFIG
    except SmoothTensorError as e:
        logger.error('%s', e)
        print(f'{config.kind}: {e}', file=sys.stderr)
        rows = [ResultRow(config.kind, 0, config['seed'], {'error': type(e).__name__}, 'error', float('inf'), 0.0,
                          False)]
    config.dump(os.path.join(config['out'], f'{config.kind}.conf'))
    rows.sort(key=lambda row: row.sort_key)
    summary = summarize(config, rows)
    _write_results(config, rows, summary)
    for metric, stats in summary['metrics'].items():
        logger.info('%s: %d/%d passed, median %.3e', metric, stats['passed'], stats['count'], stats['median'])
    if not summary['accepted']:
        failed = [metric for metric, stats in summary['metrics'].items() if not stats['accepted']]
        print(f'{config.kind}: thresholds not met for {", ".join(failed) or "all metrics"}', file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def run(config_path: str) -> int:
    """
    Выполнение эксперимента, описанного файлом конфигурации.

    :param config_path: путь к файлу "key = value"
    :return: 0 - все пороги пройдены, 1 - порог не пройден, 2 - ошибка конфигурации
    """
    try:
        config = ExperimentConfig.load(config_path)
        validate(config)
    except ConfigError as e:
        print(f'config error: {e}', file=sys.stderr)
        return EXIT_CONFIG
    return execute(config)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='config file with "key = value" lines')
    common.add_argument('--seed', type=int, help='master seed')
    common.add_argument('--trials', type=int, help='number of trials')
    common.add_argument('--out', metavar='DIR', help='output directory')
    common.add_argument('--jobs', type=int, help='worker threads, 0 for all cores')
    common.add_argument('--timing', action='store_true', help='record real wall time per trial')
    common.add_argument('--verbose', '-v', action='store_true', help='debug logging to stderr')
    parser = argparse.ArgumentParser(prog='smoothtensor', description='Smoothed tensor analysis experiments')
    commands = parser.add_subparsers(dest='kind', metavar='KIND')
    commands.required = True
    for kind in KINDS:
        commands.add_parser(kind, parents=[common], help=f'run the {kind} experiment')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig(args.kind)
        if config.kind != args.kind:
            raise ConfigError(f'config describes {config.kind!r}, command is {args.kind!r}')
        config = config.with_overrides(seed=args.seed, trials=args.trials, out=args.out, jobs=args.jobs,
                                       timing=True if args.timing else None)
        validate(config)
    except ConfigError as e:
        print(f'config error: {e}', file=sys.stderr)
        return EXIT_CONFIG
    return execute(config)

"""
Робастное восстановление подпространства по тензорным степеням точек.

В каждом пакете точка выбирается, если её тензорная степень выражается 1-ограниченной линейной
комбинацией степеней остальных точек пакета с l1-ошибкой не больше tau / 2. Подпространство
восстанавливается по старшим левым сингулярным векторам выбранных точек.
"""
import logging
from math import ceil
from typing import List, Tuple, Optional

import numpy as np
from scipy.optimize import linprog

from smoothtensor.Adversary import Adversary, AlignedAdversary
from smoothtensor.RecoveryInstance import RecoveryInstance
from smoothtensor.RecoveryParams import RecoveryParams
from smoothtensor.Subspace import Subspace
from smoothtensor.linalg import sin_theta, top_left_subspace, singular_values
from smoothtensor.tensor_core import outer_power
from smoothtensor.utils.assertion import check_dimension, check_non_negative, check_same
from smoothtensor.utils.errors import LinearProgramError, InsufficientInliersError
from smoothtensor.utils.seeding import make_rng, Seed
from smoothtensor.utils.workers import run_trials

logger = logging.getLogger(__name__)

LP_OPTIONS = {
    'primal_feasibility_tolerance': 1e-9,
    'dual_feasibility_tolerance': 1e-9,
}


def generate_instance(n: int, d: int, m: int, alpha: float, rho: float, eps0: float, seed: Seed = None,
                      adversary: Optional[Adversary] = None) -> RecoveryInstance:
    """
    Генерация экземпляра: случайное T, ceil(alpha m) инлаеров в T с возмущением B_T N(0, rho^2 / d),
    выбросы с возмущением N(0, rho^2 / n), шум противника с нормой eps0, случайный порядок точек.

    :raise ValueError: когда d >= n или alpha вне [0, 1]
    """
    check_dimension(d)
    if d >= n:
        raise ValueError("hidden dimension must be smaller than the ambient dimension")
    if not 0 <= alpha <= 1:
        raise ValueError("inlier fraction must lie in [0, 1]")
    check_non_negative(rho, 'rho')
    check_non_negative(eps0, 'eps0')
    rng = make_rng(seed)
    adversary = AlignedAdversary() if adversary is None else adversary

    q, _ = np.linalg.qr(rng.standard_normal((n, d)))
    t = Subspace(q)
    inliers = int(ceil(alpha * m - 1e-9))
    if inliers != alpha * m:
        logger.debug('inlier count alpha * m = %.3f rounded up to %d', alpha * m, inliers)
    base = np.vstack([adversary.inliers(inliers, t, rng), adversary.outliers(m - inliers, n, rng)])
    labels = np.arange(m) < inliers
    noise = np.vstack([rng.normal(0.0, rho / np.sqrt(d), size=(inliers, d)) @ t.basis.T,
                       rng.normal(0.0, rho / np.sqrt(n), size=(m - inliers, n))])
    order = rng.permutation(m)
    base, labels, clean = base[order], labels[order], (base + noise)[order]
    points = clean + adversary.corruption(clean, labels, t, eps0, rng)
    return RecoveryInstance(points, labels, t, rho, eps0, alpha, base, clean)


def bounded_combo_residual(u: np.ndarray, others: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    min ||u - sum_i a_i v_i||_1 при |a_i| <= 1, как линейная программа
    min sum t  при  -t <= u - V a <= t.

    :param u: целевой вектор
    :param others: векторы v_i по строкам
    :return: (l1-невязка, коэффициенты a)
    :raise LinearProgramError: когда решатель не нашёл оптимум
    """
    u = np.asarray(u, dtype=float).ravel()
    v = np.atleast_2d(np.asarray(others, dtype=float)).T
    if v.shape[1] == 0:
        raise ValueError("at least one other vector is required")
    check_same(v.shape[0], u.size, 'vector length')
    size, k = v.shape
    eye = np.identity(size)
    cost = np.concatenate([np.zeros(k), np.ones(size)])
    a_ub = np.concatenate([
        np.concatenate([-v, -eye], 1),
        np.concatenate([+v, -eye], 1),
    ], 0)
    b_ub = np.concatenate([-u, +u])
    bounds = [(-1.0, 1.0)] * k + [(0.0, None)] * size
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method='highs', options=LP_OPTIONS)
    if not result.success:
        raise LinearProgramError(result.message)
    alphas = np.clip(result.x[:k], -1.0, 1.0)
    return float(np.abs(u - v @ alphas).sum()), alphas


def batch_plan(m: int, b: int) -> List[List[int]]:
    """
    Пакеты индексов (0-based). Если b делит m - m / b непересекающихся блоков; иначе для каждого j
    циклическое окно длины m' (наибольшее кратное b, меньшее m), начинающееся с j, разбитое на блоки по b.

    :raise ValueError: когда b > m
    """
    if b < 1 or b > m:
        raise ValueError(f"batch size must lie in [1, {m}], got {b}")
    if m % b == 0:
        return [list(range(start, start + b)) for start in range(0, m, b)]
    window = (m // b) * b
    plan = []
    for j in range(m):
        indices = [(j + t) % m for t in range(window)]
        plan.extend(indices[start:start + b] for start in range(0, window, b))
    return plan


def select_in_batch(lifted: np.ndarray, block: List[int], tau: float) -> List[int]:
    """
    Индексы пакета, чьи тензорные степени выражаются через остальные с невязкой <= tau / 2.
    """
    selected = []
    for pos, index in enumerate(block):
        others = [block[i] for i in range(len(block)) if i != pos]
        if not others:
            continue
        residual, _ = bounded_combo_residual(lifted[index], lifted[others])
        if residual <= tau / 2:
            selected.append(index)
    return selected


def estimate_dimension(points: np.ndarray, rtol: float = 1e-12) -> int:
    """
    Размерность по наибольшему относительному разрыву в спектре точек (по строкам).
    """
    s = singular_values(np.atleast_2d(points))
    if s.size <= 1:
        return int(s.size)
    floored = np.maximum(s, rtol * s[0])
    return int(np.argmax(floored[:-1] / floored[1:])) + 1


def select_points(points: np.ndarray, params: RecoveryParams, required: Optional[int], jobs: int = 1) -> List[int]:
    """
    Обход пакетов по порядку до тех пор, пока число выбранных точек не достигнет required.
    Пакеты обрабатываются волнами по jobs штук; результат не зависит от jobs.
    При required = None просматривается только первое окно пакетов.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = points.shape[0]
    plan = batch_plan(m, params.b)
    if required is None:
        plan = plan[:max(1, (m // params.b))]
    lifted = np.array([outer_power(p, params.ell) for p in points])
    chosen = set()
    wave = max(1, jobs)
    for start in range(0, len(plan), wave):
        blocks = plan[start:start + wave]
        results = run_trials(lambda i: select_in_batch(lifted, blocks[i], params.tau), range(len(blocks)), jobs)
        for offset, selected in enumerate(results):
            chosen.update(selected)
            logger.debug('batch %d: %d selected, %d total', start + offset, len(selected), len(chosen))
            if required is not None and len(chosen) >= required:
                return sorted(chosen)
    return sorted(chosen)


def recover_with_selection(points: np.ndarray, params: RecoveryParams, d: Optional[int] = None,
                           jobs: int = 1) -> Tuple[Subspace, List[int]]:
    """
    Восстановление скрытого подпространства: выбор инлаеров по пакетам, затем старшие d левых
    сингулярных векторов первых 2d выбранных точек.

    :param points: точки по строкам, m x n
    :param params: параметры алгоритма
    :param d: размерность подпространства; если None, оценивается по спектральному разрыву
    :param jobs: число одновременно обрабатываемых пакетов
    :return: (подпространство, индексы использованных точек)
    :raise InsufficientInliersError: когда выбрано меньше 2d точек
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    required = None if d is None else 2 * d
    chosen = select_points(points, params, required, jobs)
    if d is None:
        if not chosen:
            raise InsufficientInliersError(0, 1)
        d = estimate_dimension(points[chosen])
        logger.info('estimated hidden dimension %d from %d selected points', d, len(chosen))
    if len(chosen) < 2 * d:
        raise InsufficientInliersError(len(chosen), 2 * d)
    chosen = chosen[:2 * d]
    logger.info('recovering from selected points %s', chosen)
    return top_left_subspace(points[chosen].T, d), chosen


def recover(points: np.ndarray, params: RecoveryParams, d: Optional[int] = None, jobs: int = 1) -> Subspace:
    return recover_with_selection(points, params, d, jobs)[0]


def evaluate(t: Subspace, t_hat: Subspace) -> float:
    return sin_theta(t, t_hat)


def calibrate_threshold(n: int, ell: int, rho: float, b: int, seed: Seed = None, percentile: float = 1.0) -> float:
    """
    Калибровка порога: половина заданного перцентиля невязок выбросов на пилотном пакете из одних выбросов.
    """
    rng = make_rng(seed)
    pilot = generate_instance(n, 1, b, 0.0, rho, 0.0, rng)
    lifted = np.array([outer_power(p, ell) for p in pilot.points])
    residuals = [bounded_combo_residual(lifted[i], np.delete(lifted, i, axis=0))[0] for i in range(b)]
    return 0.5 * float(np.percentile(residuals, percentile))

"""
Стенд сглаженного анализа: rho-возмущённые семейства векторов, структурированные случайные матрицы,
оценки хвостов sigma_min и вероятностей малого шара.

Каждый отчёт хранит наблюдаемое значение и порог; множитель порога c задаёт вызывающий код.
"""
import logging
from itertools import product
from math import ceil
from typing import List, Tuple, Sequence

import numpy as np

from smoothtensor.CoefficientMatrix import CoefficientMatrix
from smoothtensor.MonomialSpec import MonomialSpec
from smoothtensor.PerturbationModel import PerturbationModel
from smoothtensor.Subspace import Subspace
from smoothtensor.TrialReport import TrialReport
from smoothtensor.linalg import singular_values, proj_orth
from smoothtensor.tensor_core import eval_poly_matrix, monomial_matrix, delta_profile, outer_power, sym_basis
from smoothtensor.utils.assertion import check_vectors, check_ascending, check_index
from smoothtensor.utils.errors import DimensionMismatchError
from smoothtensor.utils.multiindex import sym_dim, orbit_sizes, sorted_multi_indices

logger = logging.getLogger(__name__)

SAMPLE_CHUNK = 20000


def _seed_of(model: PerturbationModel):
    return model.seed if isinstance(model.seed, int) else None


def _kth(values: np.ndarray, k: int) -> float:
    return float(values[k - 1]) if k <= values.size else 0.0


def _order_of(ambient: int, n: int) -> int:
    ell = int(round(np.log(ambient) / np.log(n))) if n > 1 else 1
    if n ** ell != ambient:
        raise DimensionMismatchError(f'ambient dimension {ambient} is not a power of {n}')
    return ell


def perturb(base: np.ndarray, model: PerturbationModel, rng: np.random.Generator = None) -> np.ndarray:
    """
    rho-возмущение семейства векторов: a_i + g_i, g_i ~ N(0, rho^2 / n)^n.

    :param base: векторы по строкам
    :param model: модель возмущения
    :param rng: генератор; по умолчанию создаётся из model.seed
    :return: возмущённые векторы, детерминированы при фиксированном сиде
    """
    base = np.atleast_2d(np.asarray(base, dtype=float))
    check_vectors(base, model.n)
    rng = model.rng() if rng is None else rng
    return base + model.noise(base.shape[0], rng)


def trial_column_poly(u: CoefficientMatrix, base: np.ndarray, model: PerturbationModel, c: float = 1.0,
                      delta: float = 0.1, trial_id: int = 0) -> TrialReport:
    """
    sigma_k матрицы M_f(a~_1, ..., a~_k) против порога (c / sqrt(k)) (rho / n)^ell sigma_{k + delta D}(U).
    Если k больше числа строк, sigma_k считается нулём; если k + delta D больше числа сингулярных
    значений U, нулю равен порог.
    """
    base = np.atleast_2d(np.asarray(base, dtype=float))
    k = base.shape[0]
    m = eval_poly_matrix(u, perturb(base, model))
    total = sym_dim(u.n, u.ell)
    sigma = _kth(singular_values(m), k)
    u_index = k + int(ceil(delta * total))
    threshold = c / np.sqrt(k) * (model.rho / u.n) ** u.ell * _kth(singular_values(u.entries), u_index)
    logger.debug('column-poly trial %d: sigma_%d = %.3e, threshold %.3e', trial_id, k, sigma, threshold)
    return TrialReport(trial_id, _seed_of(model), {'n': u.n, 'ell': u.ell, 'k': k, 'delta': delta, 'rho': model.rho},
                       'sigma_k', sigma, threshold)


def delta_condition(profile: Sequence[int], n: int, ell: int, c: float = 1.0) -> Tuple[float, bool]:
    """
    :return: (sum_s Delta_s (n / ell)^{ell - s}, выполнено ли условие <= c (n / ell)^ell)
    """
    ratio = n / ell
    total = float(sum(d * ratio ** (ell - s) for s, d in enumerate(profile, start=1)))
    return total, total <= c * ratio ** ell


def trial_monomial(spec: MonomialSpec, base: np.ndarray, model: PerturbationModel, c: float = 1.0,
                   condition_c: float = 1.0, trial_id: int = 0) -> TrialReport:
    """
    sigma_R матрицы тензорных мономов на возмущённых векторах против порога c (rho / n)^ell / sqrt(R).
    Условие на профиль перекрытий вычисляется и записывается, но не проверяется.
    """
    m = monomial_matrix(perturb(base, model), spec)
    sigma = _kth(singular_values(m), spec.R)
    threshold = c * (model.rho / model.n) ** spec.ell / np.sqrt(spec.R)
    profile = delta_profile(spec)
    weight, held = delta_condition(profile, model.n, spec.ell, condition_c)
    return TrialReport(trial_id, _seed_of(model), {'n': model.n, 'ell': spec.ell, 'R': spec.R, 'rho': model.rho},
                       'sigma_R', sigma, threshold,
                       {'delta_profile': list(profile), 'delta_weight': weight, 'delta_condition': held})


def trial_sym_projection(x: np.ndarray, s: Subspace, model: PerturbationModel, c: float = 1.0,
                         trial_id: int = 0) -> TrialReport:
    """
    ||Pi_{S^perp} x~^{(x) ell}|| против порога c rho^ell / n^ell. Порядок ell определяется по размерности S.
    """
    ell = _order_of(s.ambient, model.n)
    x_tilde = perturb(x, model)[0]
    value = proj_orth(outer_power(x_tilde, ell), s)
    threshold = c * model.rho ** ell / model.n ** ell
    delta = 1.0 - s.dim / sym_dim(model.n, ell)
    return TrialReport(trial_id, _seed_of(model), {'n': model.n, 'ell': ell, 'dim': s.dim, 'delta': delta,
                                                   'rho': model.rho},
                       'projection', value, threshold)


def trial_decoupled_projection(base: np.ndarray, w: Subspace, model: PerturbationModel, c: float = 1.0,
                               trial_id: int = 0) -> TrialReport:
    """
    ||Pi_W (x~_1 (x) ... (x) x~_ell)|| для независимо возмущённых множителей.
    """
    x_tilde = perturb(base, model)
    ell = x_tilde.shape[0]
    check_vectors(w.basis.T, model.n ** ell)
    flat = x_tilde[0]
    for v in x_tilde[1:]:
        flat = np.multiply.outer(flat, v).ravel()
    value = float(np.linalg.norm(w.basis.T @ flat))
    threshold = c * model.rho ** ell / model.n ** ell
    return TrialReport(trial_id, _seed_of(model), {'n': model.n, 'ell': ell, 'dim': w.dim, 'rho': model.rho},
                       'decoupled_projection', value, threshold)


def projection_polys(s: Subspace, n: int) -> CoefficientMatrix:
    """
    Многочлены f(x) = Pi_{S^perp} x^{(x) ell} в мономиальных координатах.
    """
    ell = _order_of(s.ambient, n)
    embed = sym_basis(n, ell) * np.sqrt(orbit_sizes(n, ell))
    return CoefficientMatrix(n, ell, embed - s.basis @ (s.basis.T @ embed))


def small_ball_curve(g: CoefficientMatrix, u: np.ndarray, model: PerturbationModel, eps_grid: Sequence[float],
                     samples: int = 10000, eta: float = 1.0) -> List[Tuple[float, float, int]]:
    """
    Монте-Карло оценки Pr[||g(u + z)|| < eps * eta * rho^ell / n^ell] для каждого eps из сетки.

    :param g: векторнозначный однородный многочлен
    :param u: центр
    :param eps_grid: возрастающая положительная сетка
    :param samples: число испытаний на точку
    :return: список (eps, оценка вероятности, число испытаний)
    """
    check_ascending(eps_grid)
    grid = np.asarray(eps_grid, dtype=float)
    scale = eta * model.rho ** g.ell / g.n ** g.ell
    center = np.asarray(u, dtype=float).ravel()
    rng = model.rng()
    hits = np.zeros(grid.size, dtype=np.int64)
    done = 0
    while done < samples:
        count = min(SAMPLE_CHUNK, samples - done)
        points = center + model.noise(count, rng)
        norms = np.linalg.norm(eval_poly_matrix(g, points), axis=0)
        hits += (norms[None, :] < grid[:, None] * scale).sum(axis=1)
        done += count
    return [(float(e), float(h) / samples, samples) for e, h in zip(grid, hits)]


def counterexample_matrix(n: int, ell: int, r: int) -> CoefficientMatrix:
    """
    Плотный пример: строка (I, j), I из [n]^{ell-1}, j < r, задаёт многочлен x^I x_j,
    то есть симметризацию E_I (x) e_j. Малый шар вокруг нуля имеет вероятность порядка eps^r.
    """
    check_index(r, n, 'r')
    total = sym_dim(n, ell)
    lookup = {tuple(row): i for i, row in enumerate(sorted_multi_indices(n, ell).tolist())}
    rows = []
    for prefix in product(range(n), repeat=ell - 1):
        for j in range(r):
            row = np.zeros(total)
            row[lookup[tuple(sorted(prefix + (j,)))]] = 1.0
            rows.append(row)
    return CoefficientMatrix(n, ell, np.array(rows))


def signed_combination_demo(x: np.ndarray, s: Subspace, model: PerturbationModel, r: int, threshold: float,
                            trial_id: int = 0) -> TrialReport:
    """
    Для z_1..z_r с дисперсией rho^2 / (r n) перебирает все 2^{r-1} комбинации x + z_1 +- z_2 ... +- z_r
    и считает, у скольких ||Pi_{S^perp} (.)^{(x) 2}|| меньше порога.
    Значение отчёта - второе по величине снизу, так что отчёт проходит, если низких комбинаций не больше одной.
    """
    if not 1 <= r <= 12:
        raise ValueError("split count must lie in [1, 12]")
    _order_of(s.ambient, model.n)
    rng = model.rng()
    zs = rng.normal(0.0, model.rho / np.sqrt(r * model.n), size=(r, model.n))
    start = np.asarray(x, dtype=float).ravel() + zs[0]
    signs = np.array(list(product((-1.0, 1.0), repeat=r - 1))).reshape(2 ** (r - 1), r - 1)
    points = start + signs @ zs[1:]
    values = np.sort([proj_orth(outer_power(p, 2), s) for p in points])
    low = int(np.sum(values < threshold))
    second = float(values[1]) if values.size > 1 else float('inf')
    return TrialReport(trial_id, _seed_of(model), {'n': model.n, 'r': r, 'dim': s.dim, 'rho': model.rho},
                       'second_lowest_projection', second, threshold,
                       {'low_patterns': low, 'patterns': int(values.size)})


def deconditioning_check(x: np.ndarray, y: np.ndarray, a: float, b: float) -> Tuple[float, float]:
    """
    Эмпирические Pr[X <= a] и Pr[X <= a | X + Y <= b] по независимым выборкам X и Y.
    Для независимых величин первая не превышает второй.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    below = x <= a
    given = (x + y) <= b
    if not given.any():
        raise ValueError("conditioning event has empirical probability zero")
    return float(below.mean()), float(below[given].mean())

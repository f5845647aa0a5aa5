"""
Восстановление скрытой марковской модели с непрерывными наблюдениями по моментам окна из 2 ell + 1 наблюдений.

Соглашения. P строчно-стохастическая, прямой оператор K = P^T, обратный K' = diag(w) P diag(w)^{-1}.
Виды: прошлое X_ell (x) ... (x) X_1, настоящее X_{ell+1}, будущее X_{ell+2} (x) ... (x) X_{2 ell + 1};
ближайшее к середине наблюдение идёт первым множителем. Тогда

    C^(1) = O~ K,  C^(t+1) = (O~ (.) C^(t)) K,  A - так же с K',  B = O~,  D = (O~ (.) C) K.

Восстановление P. Пусть A = A^ diag(a), s = w a. Тогда Z_1 = pinv(A^) M13 = diag(s) C^T,
Z_2 = pinv(A^) M13' = diag(s) D^T и Q = pinv(O~ (.) Z_1^T) Z_2^T = diag(s)^{-1} K diag(s).
Из 1^T K = 1^T следует Q^T s = s, поэтому s - собственный вектор Q^T с собственным числом 1,
и P = K^T = diag(1/s) Q^T diag(s).
"""
import logging
from functools import reduce
from itertools import product
from typing import Tuple, Optional, List

import numpy as np
from scipy.sparse.csgraph import connected_components

from smoothtensor.DenseTensor import DenseTensor
from smoothtensor.HmmModel import HmmModel
from smoothtensor.HmmMoments import HmmMoments
from smoothtensor.MonomialSpec import MonomialSpec
from smoothtensor.ViewMatrices import ViewMatrices
from smoothtensor.foobi import match_components
from smoothtensor.linalg import sigma_k, singular_values, orient_columns, RANK_RTOL
from smoothtensor.tensor_core import khatri_rao
from smoothtensor.utils.assertion import check_order, check_dimension, check_index, check_matrix
from smoothtensor.utils.errors import ReducibleChainError, ResamplingExhaustedError, RankDeficiencyError, \
    DegenerateSpectrumError, UnresolvableScaleError, ScaleAmbiguityError, DimensionMismatchError
from smoothtensor.utils.seeding import make_rng, child_rngs, Seed
from smoothtensor.utils.workers import run_trials

logger = logging.getLogger(__name__)

SAMPLE_CHUNK = 10000
EIGEN_TOL = 1e-8
SUPPORT_RTOL = 1e-6


def stationary(p: np.ndarray) -> np.ndarray:
    """
    Единственное стационарное распределение w^T P = w^T.
    Переходы с весом ниже SUPPORT_RTOL от наибольшего не считаются рёбрами графа.

    :raise ReducibleChainError: когда граф переходов не сильно связен, собственное значение 1
        не простое или стационарный вектор не неотрицателен
    """
    p = np.asarray(p, dtype=float)
    check_matrix(p)
    scale = np.abs(p).max()
    components, _ = connected_components(np.abs(p) > SUPPORT_RTOL * scale, directed=True, connection='strong')
    if components != 1:
        raise ReducibleChainError(f'transition graph has {components} strongly connected components')
    values, vectors = np.linalg.eig(p.T)
    unit = np.abs(values - 1.0) <= EIGEN_TOL
    if unit.sum() > 1:
        raise ReducibleChainError(f'eigenvalue 1 has multiplicity {int(unit.sum())}')
    v = np.real(vectors[:, np.argmin(np.abs(values - 1.0))])
    w = v / v.sum()
    if w.min() < -SUPPORT_RTOL:
        raise ReducibleChainError(f'stationary vector has negative entry {w.min():.3e}')
    return w


def sparse_pattern(r: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """
    Случайный d-регулярный шаблон: объединение d непересекающихся перестановочных матриц.
    """
    rows = rng.permutation(r)
    cols = rng.permutation(r)
    pattern = np.zeros((r, r), dtype=bool)
    for shift in range(d):
        pattern[rows, cols[(np.arange(r) + shift) % r]] = True
    return pattern


def gen_model(r: int, n: int, d: int, rho: float, seed: Seed = None, sigma_obs: float = 0.1, gamma: float = 0.05,
              base: Optional[np.ndarray] = None, attempts: int = 1000) -> HmmModel:
    """
    Случайная модель: d-разреженная P со случайными положительными весами, перевыбираемая до неприводимости
    и sigma_min(P) >= gamma; O~ = base (единичные столбцы) + N(0, rho^2 / n).

    :raise ResamplingExhaustedError: когда за attempts попыток подходящая P не найдена
    """
    check_dimension(r)
    check_dimension(n)
    check_index(d, r, 'sparsity')
    rng = make_rng(seed)
    for attempt in range(1, attempts + 1):
        weights = rng.uniform(0.1, 1.0, size=(r, r)) * sparse_pattern(r, d, rng)
        p = weights / weights.sum(axis=1, keepdims=True)
        if connected_components(p > 0, directed=True, connection='strong')[0] != 1:
            continue
        if sigma_k(p, r) < gamma:
            continue
        logger.debug('transition matrix accepted after %d attempts', attempt)
        break
    else:
        raise ResamplingExhaustedError(f'no transition matrix with sigma_min >= {gamma} in {attempts} attempts')
    if base is None:
        base = rng.standard_normal((n, r))
        base /= np.linalg.norm(base, axis=0)
    o_tilde = np.array(base, dtype=float)
    if rho > 0:
        o_tilde = o_tilde + rng.normal(0.0, rho / np.sqrt(n), size=o_tilde.shape)
    return HmmModel(p, o_tilde, stationary(p), sigma_obs, d)


def _chain(o: np.ndarray, k: np.ndarray, ell: int) -> np.ndarray:
    out = o @ k
    for _ in range(ell - 1):
        out = khatri_rao(o, out) @ k
    return out


def build_views(model: HmmModel, ell: int, with_d: bool = False) -> ViewMatrices:
    """
    Матрицы видов A, B, C и, по запросу, D = (O~ (.) C) K.
    """
    check_order(ell)
    c = _chain(model.o_tilde, model.forward, ell)
    a = _chain(model.o_tilde, model.backward, ell)
    d = khatri_rao(model.o_tilde, c) @ model.forward if with_d else None
    return ViewMatrices(a, model.o_tilde, c, d)


def transition_factor(p: np.ndarray, ell: int) -> np.ndarray:
    """
    F размера r^ell x r: F[(i_1..i_ell), j] = P[j, i_1] P[i_1, i_2] ... P[i_{ell-1}, i_ell],
    так что C = O~^{(x) ell} F.
    """
    p = np.asarray(p, dtype=float)
    r = p.shape[0]
    out = p.T[None]
    for _ in range(ell - 1):
        out = np.einsum('maj,ab->mabj', out, p).reshape(-1, r, r)
    return out.reshape(-1, r)


def collapsed_transition_factor(p: np.ndarray, ell: int) -> np.ndarray:
    """
    F' - сумма строк F по всем индексам путей, кроме последнего; равна (P^T)^ell.
    """
    f = transition_factor(p, ell)
    r = f.shape[1]
    return f.reshape(-1, r, r).sum(axis=0)


def collapse_rows(a: np.ndarray, n1: int) -> np.ndarray:
    """
    Матрица n2 x n3, строка i2 которой - сумма строк (i1, i2) матрицы a размера n1 n2 x n3.
    """
    a = np.asarray(a, dtype=float)
    if a.shape[0] % n1:
        raise DimensionMismatchError(f'{a.shape[0]} rows do not split into {n1} blocks')
    return a.reshape(n1, -1, a.shape[1]).sum(axis=0)


def path_spec(p: np.ndarray, ell: int) -> MonomialSpec:
    """
    Мономиальная структура будущего вида: все пути длины ell в графе переходов.
    """
    support = np.asarray(p) > 0
    r = support.shape[0]
    paths = [path for path in product(range(r), repeat=ell)
             if all(support[path[t], path[t + 1]] for t in range(ell - 1))]
    return MonomialSpec(r, ell, paths)


def exact_moment3(model: HmmModel, ell: int) -> DenseTensor:
    """
    sum_i w_i A_i (x) B_i (x) C_i формы (n^ell, n, n^ell).
    """
    views = build_views(model, ell)
    t = np.einsum('i,ai,bi,ci->abc', model.w, views.a, views.b, views.c)
    return DenseTensor(t.shape, t.ravel())


def exact_moments(model: HmmModel, ell: int) -> HmmMoments:
    views = build_views(model, ell, with_d=True)
    t = np.einsum('i,ai,bi,ci->abc', model.w, views.a, views.b, views.c)
    scaled = views.a * model.w
    return HmmMoments(DenseTensor(t.shape, t.ravel()), scaled @ views.c.T, model.o_tilde @ model.w,
                      scaled @ views.d.T)


def _sample_chunk(model: HmmModel, window: int, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    cumulative = np.cumsum(model.p, axis=1)
    states = np.empty((count, window), dtype=np.int64)
    states[:, 0] = rng.choice(model.r, size=count, p=model.w)
    for t in range(1, window):
        u = rng.random(count)
        states[:, t] = np.minimum((cumulative[states[:, t - 1]] < u[:, None]).sum(axis=1), model.r - 1)
    noise = rng.normal(0.0, model.sigma_obs / np.sqrt(model.n), size=(count, window, model.n))
    return model.o_tilde.T[states] + noise, states


def sample_sequences(model: HmmModel, window: int, count: int, seed: Seed = None,
                     jobs: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """
    count независимых окон наблюдений стационарной цепи.
    Выборка делится на куски с собственными генераторами, так что результат не зависит от jobs.

    :return: (наблюдения формы (count, window, n), состояния формы (count, window))
    """
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2 ** 63))
    chunks = max(1, -(-count // SAMPLE_CHUNK))
    rngs = child_rngs(seed, chunks)
    sizes = [min(SAMPLE_CHUNK, count - i * SAMPLE_CHUNK) for i in range(chunks)]
    parts = run_trials(lambda i: _sample_chunk(model, window, max(sizes[i], 0), rngs[i]), range(chunks), jobs)
    return np.concatenate([x for x, _ in parts]), np.concatenate([z for _, z in parts])


def _kron_rows(blocks: List[np.ndarray]) -> np.ndarray:
    return reduce(lambda x, y: np.einsum('sa,sb->sab', x, y).reshape(x.shape[0], -1), blocks)


def _views_of(observations: np.ndarray, ell: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    past = _kron_rows([observations[:, t] for t in range(ell - 1, -1, -1)])
    future = _kron_rows([observations[:, t] for t in range(ell + 1, 2 * ell + 1)])
    return past, observations[:, ell], future


def empirical_moment3(observations: np.ndarray, ell: int) -> DenseTensor:
    """
    Среднее (X_ell (x) ... (x) X_1) (x) X_{ell+1} (x) (X_{ell+2} (x) ... (x) X_{2 ell + 1}).

    :raise ValueError: когда выборка пуста или окно короче 2 ell + 1
    """
    return empirical_moments(observations, ell).t3


def empirical_moments(observations: np.ndarray, ell: int) -> HmmMoments:
    """
    Эмпирические моменты; M13' вычисляется, если окно не короче 2 ell + 2.
    Суммирование идёт по кускам в порядке их номеров.
    """
    check_order(ell)
    observations = np.asarray(observations, dtype=float)
    if observations.ndim != 3 or observations.shape[0] == 0:
        raise ValueError("empty sample set")
    count, window, n = observations.shape
    if window < 2 * ell + 1:
        raise ValueError(f"window {window} is shorter than {2 * ell + 1}")
    long = window >= 2 * ell + 2
    t3 = np.zeros((n ** ell, n, n ** ell))
    m13 = np.zeros((n ** ell, n ** ell))
    m13_long = np.zeros((n ** ell, n ** (ell + 1))) if long else None
    for start in range(0, count, SAMPLE_CHUNK):
        chunk = observations[start:start + SAMPLE_CHUNK]
        past, middle, future = _views_of(chunk, ell)
        t3 += np.einsum('sa,sb,sc->abc', past, middle, future)
        m13 += past.T @ future
        if long:
            m13_long += past.T @ _kron_rows([chunk[:, t] for t in range(ell + 1, 2 * ell + 2)])
    return HmmMoments(DenseTensor(t3.shape, t3.ravel() / count), m13 / count,
                      observations[:, ell].mean(axis=0), None if m13_long is None else m13_long / count, count)


def jennrich(t: DenseTensor, r: int, m13: np.ndarray, seed: Seed = None, retries: int = 20,
             gap_tol: float = 1e-6, rtol: float = RANK_RTOL) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Одновременная диагонализация тензора T = sum_i A_i (x) B_i (x) C_i формы (p, q, p).

    Средняя мода сворачивается со случайными theta_1, theta_2; в базисах старших r сингулярных векторов
    развёрток собственные векторы S_1 S_2^{-1} дают направления A, а S_1^T S_2^{-T} - направления C,
    с одинаковыми собственными числами.

    :param t: тензор
    :param r: ранг
    :param m13: маргинал E[прошлое (x) будущее] = A diag(w) C^T
    :param seed: сид для theta
    :param retries: число попыток с новыми theta
    :param gap_tol: минимальный относительный разрыв собственных чисел
    :return: (A^ с единичными столбцами, C^ с единичными столбцами, диагональ pinv(A^) M13 pinv(C^)^T)
    :raise RankDeficiencyError: когда развёртки имеют ранг меньше r
    :raise DegenerateSpectrumError: когда собственные числа не разделены за retries попыток
    """
    p, q, p3 = t.shape
    check_index(r, min(p, p3), 'rank')
    tensor = t.array()
    u, s1, _ = np.linalg.svd(tensor.reshape(p, q * p3), full_matrices=False)
    v, s3, _ = np.linalg.svd(tensor.transpose(2, 0, 1).reshape(p3, p * q), full_matrices=False)
    if s1[r - 1] <= rtol * s1[0] or s3[r - 1] <= rtol * s3[0]:
        raise RankDeficiencyError(f'unfoldings have rank below {r}')
    u, v = u[:, :r], v[:, :r]
    rng = make_rng(seed)
    for attempt in range(1, retries + 1):
        theta = rng.standard_normal((2, q))
        s_1, s_2 = (u.T @ np.tensordot(tensor, th, axes=(1, 0)) @ v for th in theta)
        left_values, left = np.linalg.eig(s_1 @ np.linalg.pinv(s_2))
        right_values, right = np.linalg.eig(s_1.T @ np.linalg.pinv(s_2.T))
        scale = max(1.0, float(np.abs(left_values).max()))
        if np.abs(np.imag(left_values)).max() > EIGEN_TOL * scale or \
                np.abs(np.imag(right_values)).max() > EIGEN_TOL * scale:
            logger.debug('attempt %d: complex eigenvalues', attempt)
            continue
        order_l = np.argsort(np.real(left_values))
        order_r = np.argsort(np.real(right_values))
        sorted_values = np.real(left_values)[order_l]
        if r > 1 and np.diff(sorted_values).min() < gap_tol * scale:
            logger.debug('attempt %d: eigenvalue gap below tolerance', attempt)
            continue
        a_hat = u @ np.real(left[:, order_l])
        c_hat = v @ np.real(right[:, order_r])
        a_hat = orient_columns(a_hat / np.linalg.norm(a_hat, axis=0))
        c_hat = orient_columns(c_hat / np.linalg.norm(c_hat, axis=0))
        d_diag = np.diag(np.linalg.pinv(a_hat) @ m13 @ np.linalg.pinv(c_hat).T)
        return a_hat, c_hat, d_diag
    raise DegenerateSpectrumError(f'simultaneous diagonalization failed after {retries} attempts')


def estimate_views(moments: HmmMoments, r: int, seed: Seed = None, scale_tol: float = 1e-10) -> ViewMatrices:
    """
    A^ и C^ (единичные столбцы) из разложения тензора, B^ = O~^ из средней развёртки:
    G^T = lstsq(A^ (.) C^, T_(2)^T), O~^_i = G_i / d_i.

    :raise UnresolvableScaleError: когда некоторое d_i ниже допуска
    """
    a_hat, c_hat, d_diag = jennrich(moments.t3, r, moments.m13, seed)
    if np.abs(d_diag).min() <= scale_tol * max(np.abs(d_diag).max(), np.finfo(float).tiny):
        raise UnresolvableScaleError(f'scale entries {d_diag} are below tolerance')
    n = moments.t3.shape[1]
    middle = moments.t3.array().transpose(1, 0, 2).reshape(n, -1)
    g, *_ = np.linalg.lstsq(khatri_rao(a_hat, c_hat), middle.T, rcond=None)
    return ViewMatrices(a_hat, g.T / d_diag, c_hat)


def recover_observation(moments: HmmMoments, r: int, seed: Seed = None,
                        views: Optional[ViewMatrices] = None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    :return: (O~^, w^); w^ - решение наименьших квадратов O~^ w = E[X] при n >= r, иначе None
             (тогда w^ берётся из стационарного распределения P^)
    """
    views = estimate_views(moments, r, seed) if views is None else views
    o_hat = views.b
    if o_hat.shape[0] < r:
        return o_hat, None
    w_hat, *_ = np.linalg.lstsq(o_hat, moments.mean, rcond=None)
    return o_hat, w_hat / w_hat.sum()


def _normalize_rows(p: np.ndarray) -> np.ndarray:
    return p / p.sum(axis=1, keepdims=True)


def recover_transition(views: ViewMatrices, moments: HmmMoments, o_hat: np.ndarray, r: int,
                       tol: float = 1e-6) -> np.ndarray:
    """
    Восстановление P в порядке столбцов views.

    При ell = 1 и n >= r: pinv(O~^) Z_1^T = K diag(s), s - суммы столбцов, P^ = (K diag(s) diag(1/s))^T.
    Иначе Q = pinv(O~^ (.) Z_1^T) Z_2^T и P^ = diag(1/v) Q^T diag(v), v - собственный вектор Q^T при 1.

    :raise ScaleAmbiguityError: когда собственное подпространство при 1 не одномерно
    """
    z1 = np.linalg.pinv(views.a) @ moments.m13
    n = o_hat.shape[0]
    if moments.m13.shape[1] == n and n >= r:
        scaled = np.linalg.pinv(o_hat) @ z1.T
        return _normalize_rows((scaled / scaled.sum(axis=0)).T)
    if moments.m13_long is None:
        raise ValueError("transition recovery needs the long-window cross moment")
    z2 = np.linalg.pinv(views.a) @ moments.m13_long
    q = np.linalg.pinv(khatri_rao(o_hat, z1.T)) @ z2.T
    values, vectors = np.linalg.eig(q.T)
    near = np.flatnonzero(np.abs(values - 1.0) <= tol)
    if near.size != 1:
        off = q - np.diag(np.diag(q))
        if near.size > 1 and np.abs(off).max() <= tol * max(1.0, np.abs(q).max()):
            return _normalize_rows(np.real(q.T))
        raise ScaleAmbiguityError(f'{near.size} eigenvalues within {tol} of one')
    v = np.real(vectors[:, near[0]])
    return _normalize_rows(q.T * v[None, :] / v[:, None])


def recover_model(moments: HmmMoments, r: int, seed: Seed = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Полный конвейер: (O~^, P^, w^).
    """
    views = estimate_views(moments, r, seed)
    o_hat, w_hat = recover_observation(moments, r, views=views)
    p_hat = recover_transition(views, moments, o_hat, r)
    if w_hat is None:
        w_hat = stationary(p_hat)
    return o_hat, p_hat, w_hat


def recovery_errors(model: HmmModel, o_hat: np.ndarray, p_hat: np.ndarray) -> Tuple[float, float, np.ndarray]:
    """
    Ошибки ||O~^ - O~||_F и ||P^ - P||_F после сопоставления столбцов (без смены знаков).

    :return: (ошибка O, ошибка P, перестановка)
    """
    _, perm, _ = match_components(model.o_tilde, o_hat, signed=False)
    o_err = float(np.linalg.norm(o_hat[:, perm] - model.o_tilde))
    p_err = float(np.linalg.norm(p_hat[np.ix_(perm, perm)] - model.p))
    return o_err, p_err, perm


def view_condition(model: HmmModel, ell: int) -> float:
    """
    sigma_min будущего вида C.
    """
    c = build_views(model, ell).c
    return sigma_k(c, min(c.shape))


def row_collapse_holds(a: np.ndarray, n1: int, rtol: float = 1e-12) -> bool:
    """
    sigma_{n3}(A) >= sigma_{n3}(B) / sqrt(n1) для B = collapse_rows(A, n1).
    """
    b = collapse_rows(a, n1)
    n3 = a.shape[1]
    lhs = singular_values(a)[n3 - 1]
    rhs = singular_values(b)[n3 - 1] / np.sqrt(n1)
    return lhs >= rhs - rtol * max(1.0, rhs)

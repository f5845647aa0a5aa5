"""
Разложение симметричного тензора порядка 2 ell (ell >= 2) в сумму R тензорных степеней.

Детектор ранга один Phi обнуляется на парах u^{(x) ell}, u^{(x) ell}. Конвейер: симметризация матричной
развёртки, проекция на конус PSD, квадратный корень ранга R, ядро системы H_Phi, случайный элемент ядра,
его собственные векторы и извлечение векторов ранга один.
"""
import logging
from math import isqrt
from typing import Tuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from smoothtensor.DenseTensor import DenseTensor
from smoothtensor.FoobiInstance import FoobiInstance
from smoothtensor.FoobiParams import FoobiParams
from smoothtensor.MonomialSpec import MonomialSpec
from smoothtensor.linalg import psd_project, sqrt_factor, singular_values, RANK_RTOL
from smoothtensor.tensor_core import khatri_rao_power
from smoothtensor.utils.assertion import check_order, check_matrix, check_same, check_dimension
from smoothtensor.utils.collections import pairs
from smoothtensor.utils.errors import DimensionMismatchError, DegenerateSpectrumError
from smoothtensor.utils.seeding import make_rng, Seed

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


def _cubic_side(t: DenseTensor) -> int:
    if not t.is_cubic:
        raise DimensionMismatchError(f'cubic tensor expected, got shape {t.shape}')
    return t.shape[0]


def _psi_flat(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    xm = x.reshape(-1, n)
    ym = y.reshape(-1, n)
    return (np.einsum('ai,bj->aibj', xm, ym) - np.einsum('aj,bi->aibj', xm, ym)).ravel()


def _phi_flat(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    return _psi_flat(x, y, n) + _psi_flat(y, x, n)


def psi(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    """
    Psi(X, Y)(i_1..i_ell, j_1..j_ell) = X_{i_1..i_ell} Y_{j_1..j_ell} - X_{i_1..i_{ell-1} j_ell} Y_{j_1..j_{ell-1} i_ell}.

    :raise DimensionMismatchError: когда формы различны или не кубические
    """
    n = _cubic_side(x)
    if x.shape != y.shape:
        raise DimensionMismatchError(f'shape mismatch: {x.shape} != {y.shape}')
    return DenseTensor([n] * (2 * x.order), _psi_flat(x.data, y.data, n))


def phi(x: DenseTensor, y: DenseTensor) -> DenseTensor:
    """
    Phi(X, Y) = Psi(X, Y) + Psi(Y, X); симметричен по аргументам и равен нулю на X = Y = u^{(x) ell}.
    """
    return psi(x, y) + psi(y, x)


def build_m_phi(a: np.ndarray, ell: int) -> np.ndarray:
    """
    Матрица n^{2 ell} x R(R-1)/2 со столбцами Phi(A_i^{(x) ell}, A_j^{(x) ell}) для i < j.

    :raise ValueError: когда R < 2
    """
    a = np.asarray(a, dtype=float)
    check_matrix(a)
    n, r = a.shape
    if r < 2:
        raise ValueError("at least two factors are required")
    u = khatri_rao_power(a, ell)
    return np.column_stack([_phi_flat(u[:, i], u[:, j], n) for i, j in pairs(r)])


def build_h_phi(h: np.ndarray, n: int) -> np.ndarray:
    """
    Матрица n^{2 ell} x R(R+1)/2: столбец (i, i) равен Phi(H_i, H_i), столбец (i < j) равен sqrt(2) Phi(H_i, H_j).
    """
    h = np.asarray(h, dtype=float)
    check_matrix(h)
    columns = []
    for i, j in pairs(h.shape[1], diagonal=True):
        column = _phi_flat(h[:, i], h[:, j], n)
        columns.append(column if i == j else SQRT2 * column)
    return np.column_stack(columns)


def _rank_of_pairs(size: int) -> int:
    r = (isqrt(8 * size + 1) - 1) // 2
    if r * (r + 1) // 2 != size:
        raise DimensionMismatchError(f'{size} is not a triangular number')
    return r


def psi_map(z: np.ndarray) -> np.ndarray:
    """
    Изометрия R(R+1)/2-векторов на симметричные матрицы R x R: диагональ z_ii, вне диагонали z_ij / sqrt(2).
    """
    z = np.asarray(z, dtype=float).ravel()
    r = _rank_of_pairs(z.size)
    out = np.zeros((r, r))
    for value, (i, j) in zip(z, pairs(r, diagonal=True)):
        if i == j:
            out[i, i] = value
        else:
            out[i, j] = out[j, i] = value / SQRT2
    return out


def psi_map_inverse(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.array([s[i, i] if i == j else SQRT2 * s[i, j] for i, j in pairs(s.shape[0], diagonal=True)])


def rank_deficiency(m: np.ndarray, rtol: float = RANK_RTOL) -> Optional[int]:
    """
    :return: номер (от 1) первого сингулярного числа ниже rtol * sigma_max или None при полном ранге
    """
    s = singular_values(m)
    full = min(np.asarray(m).shape)
    if s.size < full or s[0] == 0:
        return 1
    below = np.flatnonzero(s <= rtol * s[0])
    return int(below[0]) + 1 if below.size else None


def _kappa(m: np.ndarray) -> float:
    s = singular_values(m)
    index = rank_deficiency(m)
    if index is not None:
        logger.warning('rank deficiency at singular value %d of a %s matrix', index, m.shape)
        return float('inf')
    return float(s[0] / s[-1])


def condition_kappas(a: np.ndarray, ell: int) -> Tuple[float, float]:
    """
    :return: (kappa_U, kappa_M) - отношения sigma_max / sigma_min для U = A^{(.) ell} и M_Phi;
             при вырожденности - бесконечность
    """
    return _kappa(khatri_rao_power(a, ell)), _kappa(build_m_phi(a, ell))


def phi_monomial_spec(r: int, ell: int) -> MonomialSpec:
    """
    Мономиальная структура столбцов M_Phi: столбец (i < j) - сумма четырёх тензорных мономов порядка 2 ell
    со знаками (+, -, +, -), по четыре кортежа на пару в лексикографическом порядке пар.
    """
    columns = []
    for i, j in pairs(r):
        columns.append((i,) * ell + (j,) * ell)
        columns.append((i,) * (ell - 1) + (j,) + (j,) * (ell - 1) + (i,))
        columns.append((j,) * ell + (i,) * ell)
        columns.append((j,) * (ell - 1) + (i,) + (i,) * (ell - 1) + (j,))
    return MonomialSpec(r, 2 * ell, columns)


def generate_instance(n: int, ell: int, r: int, err_norm: float = 0.0, rho: Optional[float] = None,
                      base: Optional[np.ndarray] = None, seed: Seed = None) -> FoobiInstance:
    """
    Истинные множители - случайные единичные векторы; при заданном rho - rho-возмущение base
    (по умолчанию случайной базы из единичных векторов). Ошибка - гауссов тензор с нормой err_norm.
    """
    check_dimension(n)
    check_order(ell, 2)
    rng = make_rng(seed)
    if base is None:
        base = rng.standard_normal((n, r))
        base /= np.linalg.norm(base, axis=0)
    a = np.array(base, dtype=float)
    if rho is not None:
        a = a + rng.normal(0.0, rho / np.sqrt(n), size=a.shape)
    u = khatri_rao_power(a, ell)
    data = (u @ u.T).ravel()
    if err_norm > 0:
        err = rng.standard_normal(data.size)
        data = data + err * (err_norm / np.linalg.norm(err))
    kappa_u, kappa_m = condition_kappas(a, ell) if r >= 2 else (None, None)
    return FoobiInstance(a, ell, DenseTensor([n] * (2 * ell), data), err_norm, kappa_u, kappa_m)


def matricize(t: DenseTensor) -> Tuple[np.ndarray, int, int]:
    """
    :return: (матрица n^ell x n^ell, n, ell)
    :raise DimensionMismatchError: когда порядок нечётный или форма не кубическая
    """
    n = _cubic_side(t)
    if t.order % 2:
        raise DimensionMismatchError(f'even order expected, got {t.order}')
    ell = t.order // 2
    return t.matricize(ell), n, ell


def square_root_factor(t: DenseTensor, r: int, params: FoobiParams = FoobiParams()) -> np.ndarray:
    """
    Шаги 1-3: симметризация (A + A^T) / 2, проекция на конус PSD и квадратный корень ранга r.

    :raise RankOverestimateError: когда r-е собственное число ниже допуска
    """
    m, _, _ = matricize(t)
    return sqrt_factor(psd_project((m + m.T) / 2, params.symmetry_tol), r, params.rank_rtol)


def null_space_basis(h_phi: np.ndarray, r: int) -> np.ndarray:
    """
    Правые сингулярные векторы для r наименьших сингулярных чисел (полное SVD), столбцами.
    """
    _, s, vt = np.linalg.svd(h_phi, full_matrices=True)
    logger.debug('smallest singular values of H_phi: %s', s[-(r + 1):])
    return vt[-r:].T


def draw_null_element(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    psi_map(V g), g ~ N(0, I_r).
    """
    return psi_map(basis @ rng.standard_normal(basis.shape[1]))


def min_gap(values: np.ndarray) -> float:
    values = np.sort(np.real(values))
    return float(np.diff(values).min()) if values.size > 1 else float('inf')


def extract_rank_one(columns: np.ndarray, n: int) -> np.ndarray:
    """
    Для каждого столбца - развёртка n x n^{ell-1} и sigma_1^{1/ell} u_1 по старшей сингулярной паре.
    """
    ell = int(round(np.log(columns.shape[0]) / np.log(n))) if n > 1 else 1
    out = []
    for column in columns.T:
        u, s, _ = np.linalg.svd(column.reshape(n, -1), full_matrices=False)
        out.append(s[0] ** (1.0 / ell) * u[:, 0])
    return np.column_stack(out)


def decompose(t: DenseTensor, r: int, params: FoobiParams = FoobiParams(), seed: Seed = None) -> np.ndarray:
    """
    Разложение тензора порядка 2 ell в сумму r степеней a_i^{(x) 2 ell}.

    :param t: тензор
    :param r: ранг
    :param params: параметры
    :param seed: сид случайного элемента ядра
    :return: матрица n x r, столбцы определены с точностью до перестановки и знака
    :raise ValueError: когда ell < 2
    :raise RankOverestimateError: когда энергия ранга r ниже допуска
    :raise DegenerateSpectrumError: когда разрыв спектра не достигнут за params.retries попыток
    """
    _, n, ell = matricize(t)
    check_order(ell, 2)
    rng = make_rng(seed)
    h = square_root_factor(t, r, params)
    basis = null_space_basis(build_h_phi(h, n), r)
    threshold = params.gap_threshold(r)
    for attempt in range(1, params.retries + 1):
        z = draw_null_element(basis, rng)
        values, vectors = np.linalg.eigh(z)
        gap = min_gap(values)
        if gap >= threshold:
            logger.debug('eigengap %.3e after %d attempts', gap, attempt)
            return extract_rank_one(h @ vectors, n)
        logger.debug('attempt %d: eigengap %.3e below %.3e', attempt, gap, threshold)
    raise DegenerateSpectrumError(f'eigengap stayed below {threshold:.3e} after {params.retries} attempts')


def decompose_subspace(basis: np.ndarray, n: int, params: FoobiParams = FoobiParams(),
                       seed: Seed = None) -> np.ndarray:
    """
    Векторы ранга один в подпространстве, заданном произвольным (не обязательно ортонормированным)
    базисом из r столбцов длины n^ell. Для базиса W = U M элементы ядра H_Phi имеют вид M^{-1} D M^{-T},
    поэтому собственные векторы Z_1 Z_2^{-1} - столбцы M^{-1}.

    :return: единичные векторы n x r, с точностью до перестановки и знака
    :raise DegenerateSpectrumError: когда собственные числа не разделены за params.retries попыток
    """
    basis = np.asarray(basis, dtype=float)
    check_matrix(basis)
    r = basis.shape[1]
    rng = make_rng(seed)
    kernel = null_space_basis(build_h_phi(basis, n), r)
    threshold = params.gap_threshold(r)
    for attempt in range(1, params.retries + 1):
        z1 = draw_null_element(kernel, rng)
        z2 = draw_null_element(kernel, rng)
        values, vectors = np.linalg.eig(z1 @ np.linalg.pinv(z2))
        scale = max(1.0, float(np.abs(values).max()))
        if np.abs(np.imag(values)).max() <= 1e-8 * scale and min_gap(values) >= threshold * scale:
            rows = extract_rank_one(basis @ np.real(vectors), n)
            return rows / np.linalg.norm(rows, axis=0)
        logger.debug('attempt %d: pencil eigenvalues not separated', attempt)
    raise DegenerateSpectrumError(f'pencil eigenvalues stayed unseparated after {params.retries} attempts')


def match_components(a: np.ndarray, b: np.ndarray, signed: bool = True) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    min_{pi, s} sum_i ||A_i - s_i B_{pi(i)}|| через точное назначение (венгерский алгоритм).

    :param a: истинные векторы по столбцам
    :param b: восстановленные векторы по столбцам
    :param signed: допускать ли смену знака
    :return: (ошибка, перестановка pi, знаки s)
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    check_same(a.shape[1], b.shape[1], 'column count')
    plus = np.linalg.norm(a[:, :, None] - b[:, None, :], axis=0)
    minus = np.linalg.norm(a[:, :, None] + b[:, None, :], axis=0)
    cost = np.minimum(plus, minus) if signed else plus
    rows, cols = linear_sum_assignment(cost)
    perm = cols[np.argsort(rows)]
    signs = np.where(signed & (minus[np.arange(a.shape[1]), perm] < plus[np.arange(a.shape[1]), perm]), -1.0, 1.0)
    return float(cost[np.arange(a.shape[1]), perm].sum()), perm, signs

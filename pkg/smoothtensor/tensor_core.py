"""
Примитивы над тензорами и мультииндексами: внешние степени, координаты симметричных тензоров,
произведения Хатри-Рао, матрицы тензорных мономов и профили перекрытий.

Мультииндексы упорядочены лексикографически по отсортированным кортежам, развёртка везде row-major.
"""
import logging
from functools import reduce, lru_cache
from itertools import product
from math import factorial
from typing import Tuple, Sequence

import numpy as np

from smoothtensor.CoefficientMatrix import CoefficientMatrix
from smoothtensor.DenseTensor import DenseTensor
from smoothtensor.MonomialSpec import MonomialSpec
from smoothtensor.Subspace import Subspace
from smoothtensor.SymTensor import SymTensor
from smoothtensor.utils.assertion import check_order, check_vectors, check_same, check_matrix
from smoothtensor.utils.multiindex import sym_dim, sorted_multi_indices, dense_to_sym, orbit_sizes

logger = logging.getLogger(__name__)

__all__ = [
    'sym_dim', 'outer_power', 'monomial_vector', 'lift_points', 'eval_poly_matrix', 'khatri_rao',
    'khatri_rao_power', 'monomial_matrix', 'delta_profile', 'symmetrize', 'decoupled_eval', 'sym_form',
    'rademacher_sign_moment', 'decoupling_signed_sum', 'decoupled_side', 'sym_basis', 'random_sym_subspace',
]


def outer_power(v: np.ndarray, ell: int) -> np.ndarray:
    """
    Плоская (row-major) внешняя степень v^{(x) ell}, длина n^ell.
    """
    check_order(ell)
    v = np.asarray(v, dtype=float).ravel()
    return reduce(np.multiply.outer, [v] * ell).ravel()


def monomial_vector(x: np.ndarray, ell: int) -> np.ndarray:
    """
    Значения всех мономов степени ell от x без мультиномиальных весов:
    элемент с отсортированным мультииндексом J равен prod_{j in J} x_j.
    """
    x = np.asarray(x, dtype=float).ravel()
    return x[sorted_multi_indices(x.size, ell)].prod(axis=1)


def lift_points(points: np.ndarray, ell: int) -> np.ndarray:
    """
    Векторы мономов для каждой строки points, shape (k, C(n + ell - 1, ell)).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return points[:, sorted_multi_indices(points.shape[1], ell)].prod(axis=2)


def eval_poly_matrix(u: CoefficientMatrix, points: np.ndarray) -> np.ndarray:
    """
    Матрица m x k со значениями f_i(a_j).

    :param u: коэффициенты многочленов
    :param points: точки a_j, по одной в строке
    :raise DimensionMismatchError: когда размерность точек не совпадает с u.n
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    check_vectors(points, u.n)
    return u.entries @ lift_points(points, u.ell).T


def khatri_rao(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Постолбцовое произведение Кронекера: столбец i равен x_i (x) y_i.

    :raise DimensionMismatchError: когда число столбцов различается
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    check_matrix(x)
    check_matrix(y)
    check_same(x.shape[1], y.shape[1], 'column count')
    return np.einsum('ir,jr->ijr', x, y).reshape(x.shape[0] * y.shape[0], x.shape[1])


def khatri_rao_power(x: np.ndarray, ell: int) -> np.ndarray:
    check_order(ell)
    return reduce(khatri_rao, [x] * ell)


def monomial_matrix(vectors: np.ndarray, spec: MonomialSpec) -> np.ndarray:
    """
    Матрица n^ell x R, столбец c которой равен a_{f(1)} (x) ... (x) a_{f(ell)} для f = spec.columns[c].

    :param vectors: k векторов по строкам
    :raise DimensionMismatchError: когда число векторов не равно spec.k
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    check_same(vectors.shape[0], spec.k, 'vector count')
    cols = spec.columns
    out = vectors[cols[:, 0]]
    for t in range(1, spec.ell):
        out = np.einsum('ra,rb->rab', out, vectors[cols[:, t]]).reshape(spec.R, -1)
    return out.T


def delta_profile(spec: MonomialSpec) -> Tuple[int, ...]:
    """
    Профиль перекрытий (Delta_1, ..., Delta_ell): Delta_s - максимум по столбцам числа других столбцов,
    кортеж которых отличается ровно в s позициях.
    """
    cols = spec.columns
    if spec.R == 0:
        return tuple(0 for _ in range(spec.ell))
    distances = (cols[:, None, :] != cols[None, :, :]).sum(axis=2)
    return tuple(int((distances == s).sum(axis=1).max()) for s in range(1, spec.ell + 1))


def symmetrize(t: DenseTensor) -> SymTensor:
    """
    :raise DimensionMismatchError: когда форма тензора не кубическая
    """
    return SymTensor.from_dense(t)


def decoupled_eval(t: SymTensor, factors: np.ndarray) -> float:
    """
    Полилинейная форма <T, u_1 (x) ... (x) u_ell>.

    :param factors: ell векторов по строкам
    :raise DimensionMismatchError: когда число или размерность векторов не совпадает с тензором
    """
    factors = np.atleast_2d(np.asarray(factors, dtype=float))
    check_vectors(factors, t.n)
    check_same(factors.shape[0], t.ell, 'factor count')
    out = t.to_dense().array()
    for u in factors:
        out = np.tensordot(u, out, axes=(0, 0))
    return float(out)


def sym_form(t: SymTensor, x: np.ndarray) -> float:
    """
    <T, x^{(x) ell}> через координаты симметричного тензора.
    """
    return float(t.coeffs @ (orbit_sizes(t.n, t.ell) * monomial_vector(x, t.ell)))


def rademacher_sign_moment(alphas: Sequence[float]) -> float:
    """
    Точное среднее E[(a_0 + sum a_i z_i)^{m+1} prod z_i] по всем 2^m знаковым векторам z.
    Для любых коэффициентов оно равно (m + 1)! a_0 a_1 ... a_m.
    """
    alphas = np.asarray(alphas, dtype=float).ravel()
    m = alphas.size - 1
    signs = np.array(list(product((-1.0, 1.0), repeat=m))).reshape(2 ** m, m)
    values = (alphas[0] + signs @ alphas[1:]) ** (m + 1) * signs.prod(axis=1)
    return float(values.mean())


def decoupling_signed_sum(t: SymTensor, x: np.ndarray, zs: np.ndarray) -> float:
    """
    Знакопеременная сумма по 2^{ell-1} наборам знаков z_2..z_ell:
    sum prod(z_i) <T, (x + z_1 + sum z_i zs_i)^{(x) ell}>.
    """
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    check_vectors(zs, t.n)
    check_same(zs.shape[0], t.ell, 'perturbation count')
    y = np.asarray(x, dtype=float) + zs[0]
    total = 0.0
    for signs in product((-1.0, 1.0), repeat=t.ell - 1):
        signs = np.array(signs)
        total += signs.prod() * sym_form(t, y + signs @ zs[1:])
    return total


def decoupled_side(t: SymTensor, x: np.ndarray, zs: np.ndarray) -> float:
    """
    2^{ell-1} ell! <T, (x + z_1) (x) z_2 (x) ... (x) z_ell>, значение знакопеременной суммы.
    """
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    factors = np.vstack([np.asarray(x, dtype=float) + zs[0], zs[1:]])
    return 2 ** (t.ell - 1) * factorial(t.ell) * decoupled_eval(t, factors)


@lru_cache(maxsize=32)
def sym_basis(n: int, ell: int) -> np.ndarray:
    """
    Ортонормированный базис симметричных тензоров внутри R^{n^ell}, shape (n^ell, C(n + ell - 1, ell)).
    Столбец J - индикатор орбиты J, делённый на корень из её размера.
    """
    index = dense_to_sym(n, ell)
    out = np.zeros((index.size, sym_dim(n, ell)))
    out[np.arange(index.size), index] = 1.0
    out /= np.sqrt(orbit_sizes(n, ell))
    out.flags.writeable = False
    return out


def random_sym_subspace(n: int, ell: int, dim: int, rng: np.random.Generator) -> Subspace:
    """
    Случайное подпространство размерности dim среди симметричных тензоров порядка ell.
    """
    total = sym_dim(n, ell)
    if not 0 <= dim <= total:
        raise ValueError(f"subspace dimension must lie in [0, {total}]")
    if dim == 0:
        return Subspace.zero(n ** ell)
    q, _ = np.linalg.qr(rng.standard_normal((total, dim)))
    return Subspace(sym_basis(n, ell) @ q)

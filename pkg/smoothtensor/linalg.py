"""
Спектральные примитивы: сингулярные числа, расстояние leave-one-out, проекции на подпространства,
главные углы, проекция на конус PSD и квадратные корни матриц.
"""
import numpy as np

from smoothtensor.Subspace import Subspace
from smoothtensor.utils.assertion import check_index, check_matrix, check_same, check_symmetric
from smoothtensor.utils.errors import RankOverestimateError

RANK_RTOL = 1e-10
SYMMETRY_TOL = 1e-8


def singular_values(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    check_matrix(m)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def sigma_k(m: np.ndarray, k: int) -> float:
    """
    k-е по убыванию сингулярное число (k от 1).

    :raise ValueError: когда k вне [1, min(rows, cols)]
    """
    m = np.asarray(m, dtype=float)
    check_matrix(m)
    check_index(k, min(m.shape), 'k')
    return float(singular_values(m)[k - 1])


def sigma_min(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=float)
    return sigma_k(m, min(m.shape))


def rank(m: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = singular_values(m)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def leave_one_out(m: np.ndarray) -> float:
    """
    min_i dist(M_i, span{M_j : j != i}).

    :raise ValueError: когда столбцов меньше двух
    """
    m = np.asarray(m, dtype=float)
    check_matrix(m)
    if m.shape[1] < 2:
        raise ValueError("leave-one-out distance needs at least two columns")
    best = np.inf
    for i in range(m.shape[1]):
        others = np.delete(m, i, axis=1)
        coeffs, *_ = np.linalg.lstsq(others, m[:, i], rcond=None)
        best = min(best, float(np.linalg.norm(m[:, i] - others @ coeffs)))
    return best


def proj_orth(v: np.ndarray, s: Subspace) -> float:
    """
    ||Pi_{S^perp} v||_2.

    :raise DimensionMismatchError: когда длина v не совпадает с размерностью пространства
    """
    v = np.asarray(v, dtype=float).ravel()
    check_same(v.size, s.ambient, 'ambient dimension')
    return float(np.linalg.norm(v - s.basis @ (s.basis.T @ v)))


def sin_theta(u: Subspace, v: Subspace) -> float:
    """
    Норма Фробениуса матрицы синусов главных углов, ||V - U U^T V||_F.

    :raise DimensionMismatchError: когда размерности подпространств различаются
    """
    check_same(u.ambient, v.ambient, 'ambient dimension')
    check_same(u.dim, v.dim, 'subspace dimension')
    return float(np.linalg.norm(v.basis - u.basis @ (u.basis.T @ v.basis)))


def orient_columns(e: np.ndarray) -> np.ndarray:
    """
    Меняет знак столбцов так, чтобы наибольший по модулю элемент был положительным.
    """
    e = np.array(e, dtype=float)
    if e.size == 0:
        return e
    pivots = e[np.abs(e).argmax(axis=0), np.arange(e.shape[1])]
    return e * np.where(pivots < 0, -1.0, 1.0)


def psd_project(s: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """
    Ближайшая по Фробениусу PSD матрица: отрицательные собственные числа обнуляются.

    :raise ValueError: когда матрица несимметрична сверх допуска
    """
    s = np.asarray(s, dtype=float)
    check_symmetric(s, tol)
    values, vectors = np.linalg.eigh((s + s.T) / 2)
    return (vectors * np.clip(values, 0.0, None)) @ vectors.T


def sqrt_factor(s: np.ndarray, r: int, rtol: float = RANK_RTOL) -> np.ndarray:
    """
    H = E_R Lambda_R^{1/2} по R старшим собственным парам; HH^T - лучшее PSD приближение ранга R.

    :raise RankOverestimateError: когда R-е собственное число не превышает rtol * lambda_max
    """
    s = np.asarray(s, dtype=float)
    check_symmetric(s, SYMMETRY_TOL)
    check_index(r, s.shape[0], 'rank')
    values, vectors = np.linalg.eigh((s + s.T) / 2)
    order = np.argsort(values)[::-1][:r]
    values, vectors = values[order], orient_columns(vectors[:, order])
    if values[-1] <= rtol * max(values[0], np.finfo(float).tiny):
        raise RankOverestimateError(f'eigenvalue {r} is {values[-1]:.3e}, below tolerance for rank {r}')
    return vectors * np.sqrt(values)


def orthonormalize(m: np.ndarray, rtol: float = RANK_RTOL) -> Subspace:
    return Subspace.span(m, rtol)


def top_left_subspace(m: np.ndarray, d: int) -> Subspace:
    """
    Подпространство d старших левых сингулярных векторов.
    """
    m = np.asarray(m, dtype=float)
    check_index(d, min(m.shape), 'dimension')
    u, _, _ = np.linalg.svd(m, full_matrices=False)
    return Subspace(u[:, :d])


def weyl_gap(a: np.ndarray, e: np.ndarray, k: int) -> float:
    """
    |sigma_k(A) - sigma_k(A + E)|; по неравенству Вейля не превышает ||E||.
    """
    return abs(sigma_k(a, k) - sigma_k(np.asarray(a) + np.asarray(e), k))


def sylvester_holds(pi: np.ndarray, u: np.ndarray, p: int, r: int, rtol: float = 1e-10) -> bool:
    """
    Проверка sigma_{p + r - n'}(Pi U) >= sigma_p(Pi) sigma_r(U) для матрицы Pi размера n' x n'.
    Если индекс меньше единицы, утверждение пусто.
    """
    index = p + r - pi.shape[0]
    if index < 1:
        return True
    lhs = sigma_k(pi @ u, index)
    rhs = sigma_k(pi, p) * sigma_k(u, r)
    return lhs >= rhs - rtol * max(1.0, rhs)


def procrustes(z: np.ndarray, h: np.ndarray) -> np.ndarray:
    """
    Ортогональная Q, минимизирующая ||ZQ - H||_F.
    """
    a, _, bt = np.linalg.svd(np.asarray(z).T @ np.asarray(h))
    return a @ bt


def sqrt_error_bound(delta: float, h: np.ndarray) -> float:
    """
    Граница на min_Q ||ZQ - H||_F при ||ZZ^T - HH^T|| <= delta:
    (d delta)^{1/2} + 2 delta d sigma_1(H) / sigma_d(H)^2.
    """
    d = h.shape[1]
    s = singular_values(h)
    return float(np.sqrt(d * delta) + 2 * delta * d * s[0] / s[d - 1] ** 2)

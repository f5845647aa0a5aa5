from typing import Sequence

import numpy as np

from smoothtensor.DenseTensor import DenseTensor
from smoothtensor.utils.assertion import check_dimension, check_order
from smoothtensor.utils.errors import DimensionMismatchError
from smoothtensor.utils.multiindex import sym_dim, dense_to_sym, orbit_sizes


class SymTensor(object):
    def __init__(self, n: int, ell: int, coeffs: Sequence[float]):
        """
        Симметричный тензор порядка ell над R^n, заданный значениями на отсортированных
        мультииндексах j_1 <= ... <= j_ell (лексикографический порядок).

        :param n: размерность пространства
        :param ell: порядок
        :param coeffs: значения, длина C(n + ell - 1, ell)
        :raise DimensionMismatchError: когда длина значений не совпадает с размерностью
        """
        check_dimension(n)
        check_order(ell)
        coeffs = np.array(coeffs, dtype=float).ravel()
        if coeffs.size != sym_dim(n, ell):
            raise DimensionMismatchError(f'expected {sym_dim(n, ell)} coefficients, got {coeffs.size}')
        coeffs.flags.writeable = False
        self._n = n
        self._ell = ell
        self._coeffs = coeffs

    @classmethod
    def random(cls, n: int, ell: int, rng: np.random.Generator) -> 'SymTensor':
        return SymTensor(n, ell, rng.standard_normal(sym_dim(n, ell)))

    @classmethod
    def from_dense(cls, t: DenseTensor) -> 'SymTensor':
        """
        Ортогональная проекция плотного кубического тензора на симметричные тензоры:
        значение на мультииндексе J - среднее t по всем перестановкам J.

        :raise DimensionMismatchError: когда тензор не кубический
        """
        if not t.is_cubic:
            raise DimensionMismatchError(f'symmetrization requires a cubic tensor, got shape {t.shape}')
        n, ell = t.shape[0], t.order
        sums = np.bincount(dense_to_sym(n, ell), weights=t.data, minlength=sym_dim(n, ell))
        return SymTensor(n, ell, sums / orbit_sizes(n, ell))

    @property
    def n(self) -> int:
        return self._n

    @property
    def ell(self) -> int:
        return self._ell

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def to_dense(self) -> DenseTensor:
        """
        :return: развёртка в плотный тензор формы n^ell
        """
        return DenseTensor([self._n] * self._ell, self._coeffs[dense_to_sym(self._n, self._ell)])

    def __repr__(self) -> str:
        return f'SymTensor(n={self._n}, ell={self._ell})'

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymTensor):
            return False
        return self._n == other.n and self._ell == other.ell and np.array_equal(self._coeffs, other.coeffs)

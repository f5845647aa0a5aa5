import numpy as np

from smoothtensor.utils.assertion import check_dimension, check_order
from smoothtensor.utils.errors import DimensionMismatchError
from smoothtensor.utils.multiindex import sym_dim


class CoefficientMatrix(object):
    def __init__(self, n: int, ell: int, entries: np.ndarray):
        """
        Коэффициенты m однородных многочленов степени ell от n переменных.
        Столбцы соответствуют отсортированным мультииндексам в лексикографическом порядке,
        без мультиномиальных весов: f_i(x) = sum_J U[i, J] x^J.

        :raise DimensionMismatchError: когда число столбцов не равно C(n + ell - 1, ell)
        """
        check_dimension(n)
        check_order(ell)
        entries = np.array(entries, dtype=float)
        if entries.ndim == 1:
            entries = entries[None, :]
        if entries.ndim != 2 or entries.shape[1] != sym_dim(n, ell):
            raise DimensionMismatchError(f'expected {sym_dim(n, ell)} columns, got shape {entries.shape}')
        entries.flags.writeable = False
        self._n = n
        self._ell = ell
        self._entries = entries

    @classmethod
    def identity(cls, n: int, ell: int) -> 'CoefficientMatrix':
        return CoefficientMatrix(n, ell, np.eye(sym_dim(n, ell)))

    @property
    def n(self) -> int:
        return self._n

    @property
    def ell(self) -> int:
        return self._ell

    @property
    def m(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def __repr__(self) -> str:
        return f'CoefficientMatrix(m={self.m}, n={self._n}, ell={self._ell})'

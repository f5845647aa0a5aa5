from typing import Sequence, Tuple, List

import numpy as np

from smoothtensor.utils.assertion import check_order


class MonomialSpec(object):
    def __init__(self, k: int, ell: int, columns: Sequence[Sequence[int]]):
        """
        Описание матрицы тензорных мономов: столбец c равен a_{f(1)} x ... x a_{f(ell)}
        для кортежа f = columns[c]. Индексы векторов 0-based.

        :param k: число базовых векторов
        :param ell: порядок мономов
        :param columns: кортежи длины ell со значениями в [0, k)
        """
        check_order(ell)
        cols = np.array(columns, dtype=np.int64).reshape(-1, ell)
        if cols.size and (cols.min() < 0 or cols.max() >= k):
            raise ValueError(f"monomial tuple entries must lie in [0, {k})")
        cols.flags.writeable = False
        self._k = k
        self._ell = ell
        self._columns = cols

    @property
    def k(self) -> int:
        return self._k

    @property
    def ell(self) -> int:
        return self._ell

    @property
    def columns(self) -> np.ndarray:
        """
        :return: массив кортежей формы (R, ell)
        """
        return self._columns

    @property
    def R(self) -> int:
        return self._columns.shape[0]

    def tuples(self) -> List[Tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self._columns]

    def __repr__(self) -> str:
        return f'MonomialSpec(k={self._k}, ell={self._ell}, R={self.R})'

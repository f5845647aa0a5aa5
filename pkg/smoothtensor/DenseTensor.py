from typing import List, Sequence

import numpy as np

from smoothtensor.utils.errors import DimensionMismatchError


class DenseTensor(object):
    def __init__(self, shape: Sequence[int], data: Sequence[float]):
        """
        Плотный тензор произвольного порядка. Данные хранятся плоско, в row-major порядке.

        :param shape: размеры мод, все положительные
        :param data: значения, длина равна произведению размеров
        :raise DimensionMismatchError: когда длина данных не совпадает с формой
        """
        shape = [int(d) for d in shape]
        if len(shape) == 0 or any(d <= 0 for d in shape):
            raise ValueError("all mode dimensions must be greater than zero")
        data = np.array(data, dtype=float).ravel()
        if data.size != int(np.prod(shape)):
            raise DimensionMismatchError(f'data length {data.size} does not match shape {shape}')
        data.flags.writeable = False
        self._shape = shape
        self._data = data

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'DenseTensor':
        array = np.asarray(array, dtype=float)
        return DenseTensor(array.shape, array.ravel())

    @property
    def shape(self) -> List[int]:
        """
        :return: размеры мод
        """
        return list(self._shape)

    @property
    def data(self) -> np.ndarray:
        """
        :return: плоские данные (только для чтения)
        """
        return self._data

    @property
    def order(self) -> int:
        return len(self._shape)

    @property
    def is_cubic(self) -> bool:
        return len(set(self._shape)) == 1

    def array(self) -> np.ndarray:
        return self._data.reshape(self._shape)

    def matricize(self, row_modes: int) -> np.ndarray:
        """
        Матрица, строки которой индексируются первыми row_modes модами, а столбцы - остальными.
        """
        rows = int(np.prod(self._shape[:row_modes]))
        return self._data.reshape(rows, -1)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self._data))

    def __add__(self, other: 'DenseTensor') -> 'DenseTensor':
        if self._shape != other.shape:
            raise DimensionMismatchError(f'shape mismatch: {self._shape} != {other.shape}')
        return DenseTensor(self._shape, self._data + other.data)

    def __repr__(self) -> str:
        return f'DenseTensor(shape={self._shape})'

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseTensor):
            return False
        return self._shape == other.shape and np.array_equal(self._data, other.data)

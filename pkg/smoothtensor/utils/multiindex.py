from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import comb

from smoothtensor.utils.assertion import check_dimension, check_order
from smoothtensor.utils.errors import InstanceTooLargeError

MAX_COUNT = np.iinfo(np.int64).max


def sym_dim(n: int, ell: int) -> int:
    """
    Размерность пространства симметричных тензоров порядка ell над R^n: C(n + ell - 1, ell).

    :raise InstanceTooLargeError: когда размерность не помещается в int64
    """
    check_dimension(n)
    check_order(ell)
    count = int(comb(n + ell - 1, ell, exact=True))
    if count > MAX_COUNT:
        raise InstanceTooLargeError(f'C({n + ell - 1}, {ell}) does not fit the count type')
    return count


@lru_cache(maxsize=64)
def sorted_multi_indices(n: int, ell: int) -> np.ndarray:
    """
    Все отсортированные мультииндексы j_1 <= ... <= j_ell в лексикографическом порядке, shape (D, ell).
    """
    sym_dim(n, ell)
    out = np.array(list(combinations_with_replacement(range(n), ell)), dtype=np.int64).reshape(-1, ell)
    out.flags.writeable = False
    return out


def _encode(indices: np.ndarray, n: int) -> np.ndarray:
    ell = indices.shape[1]
    weights = n ** np.arange(ell - 1, -1, -1, dtype=np.int64)
    return indices @ weights


@lru_cache(maxsize=64)
def dense_to_sym(n: int, ell: int) -> np.ndarray:
    """
    Для каждой позиции плоского тензора n^ell (row-major) - номер её отсортированного мультииндекса.
    """
    grid = np.indices([n] * ell).reshape(ell, -1).T
    keys = _encode(np.sort(grid, axis=1), n)
    out = np.searchsorted(_encode(sorted_multi_indices(n, ell), n), keys)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=64)
def orbit_sizes(n: int, ell: int) -> np.ndarray:
    """
    Число позиций плотного тензора, отвечающих каждому отсортированному мультииндексу.
    """
    out = np.bincount(dense_to_sym(n, ell), minlength=sym_dim(n, ell))
    out.flags.writeable = False
    return out

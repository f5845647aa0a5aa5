from typing import Optional

import numpy as np

from smoothtensor.DenseTensor import DenseTensor


class HmmMoments(object):
    def __init__(self, t3: DenseTensor, m13: np.ndarray, mean: np.ndarray, m13_long: Optional[np.ndarray] = None,
                 samples: Optional[int] = None):
        """
        Моменты наблюдений, нужные для восстановления модели.

        :param t3: тензор (прошлое, настоящее, будущее) формы (n^ell, n, n^ell)
        :param m13: E[прошлое (x) будущее], n^ell x n^ell
        :param mean: E[X], длина n
        :param m13_long: E[прошлое (x) удлинённое будущее], n^ell x n^{ell+1}; требует окна 2 ell + 2
        :param samples: число выборок; None для точных моментов
        """
        self.t3 = t3
        self.m13 = np.asarray(m13, dtype=float)
        self.mean = np.asarray(mean, dtype=float).ravel()
        self.m13_long = None if m13_long is None else np.asarray(m13_long, dtype=float)
        self.samples = samples

    @property
    def n(self) -> int:
        return self.t3.shape[1]

    @property
    def exact(self) -> bool:
        return self.samples is None

    def __repr__(self) -> str:
        return f'HmmMoments(shape={self.t3.shape}, long={self.m13_long is not None}, samples={self.samples})'

from typing import Optional

import numpy as np


class ViewMatrices(object):
    def __init__(self, a: np.ndarray, b: np.ndarray, c: np.ndarray, d: Optional[np.ndarray] = None):
        """
        Условные средние трёх видов при данном среднем скрытом состоянии.

        :param a: прошлое, n^ell x r
        :param b: настоящее, n x r
        :param c: будущее, n^ell x r
        :param d: удлинённое будущее, n^{ell+1} x r
        """
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.d = None if d is None else np.asarray(d, dtype=float)

    @property
    def r(self) -> int:
        return self.b.shape[1]

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def __repr__(self) -> str:
        return f'ViewMatrices(A={self.a.shape}, B={self.b.shape}, C={self.c.shape}, ' \
               f'D={None if self.d is None else self.d.shape})'

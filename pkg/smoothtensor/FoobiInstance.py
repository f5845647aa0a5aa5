from typing import Optional

import numpy as np

from smoothtensor.DenseTensor import DenseTensor


class FoobiInstance(object):
    def __init__(self, a: np.ndarray, ell: int, t: DenseTensor, err_norm: float,
                 kappa_u: Optional[float] = None, kappa_m: Optional[float] = None):
        """
        Экземпляр разложения тензора порядка 2 ell: T = sum_i A_i^{(x) 2 ell} + Err.

        :param a: истинные множители n x R
        :param ell: половина порядка тензора
        :param t: тензор
        :param err_norm: норма Фробениуса аддитивной ошибки
        :param kappa_u: число обусловленности U = A^{(.) ell}
        :param kappa_m: число обусловленности M_Phi
        """
        self.a = np.asarray(a, dtype=float)
        self.ell = ell
        self.t = t
        self.err_norm = err_norm
        self.kappa_u = kappa_u
        self.kappa_m = kappa_m

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def R(self) -> int:
        return self.a.shape[1]

    def __repr__(self) -> str:
        return f'FoobiInstance(n={self.n}, ell={self.ell}, R={self.R}, err_norm={self.err_norm})'

from typing import Optional

import numpy as np

from smoothtensor.utils.assertion import check_matrix, check_non_negative
from smoothtensor.utils.errors import DimensionMismatchError

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
NEGATIVE_TOL = 1e-9


class HmmModel(object):
    def __init__(self, p: np.ndarray, o_tilde: np.ndarray, w: np.ndarray, sigma_obs: float = 0.1,
                 d: Optional[int] = None):
        """
        Скрытая марковская модель с непрерывными наблюдениями: X_t = O~_{Z_t} + N(0, sigma_obs^2 / n)^n.

        :param p: строчно-стохастическая матрица переходов r x r, P[i, j] = Pr(j | i)
        :param o_tilde: матрица наблюдений n x r (возмущённые средние по столбцам)
        :param w: стационарное распределение
        :param sigma_obs: масштаб шума наблюдений
        :param d: разреженность P (не больше d ненулевых в строке и столбце); None - без проверки
        :raise ValueError: когда нарушены стохастичность, стационарность или разреженность
        """
        p = np.array(p, dtype=float)
        o_tilde = np.array(o_tilde, dtype=float)
        w = np.array(w, dtype=float).ravel()
        check_matrix(p, 'transition matrix')
        check_matrix(o_tilde, 'observation matrix')
        check_non_negative(sigma_obs, 'observation noise')
        r = p.shape[0]
        if p.shape != (r, r) or o_tilde.shape[1] != r or w.size != r:
            raise DimensionMismatchError(f'inconsistent shapes: P {p.shape}, O {o_tilde.shape}, w {w.shape}')
        if p.min() < -NEGATIVE_TOL:
            raise ValueError("transition matrix has negative entries")
        if np.abs(p.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("transition matrix rows must sum to one")
        if np.abs(w @ p - w).max() > STATIONARY_TOL or w.min() <= 0:
            raise ValueError("w must be a positive stationary distribution of P")
        if d is not None:
            support = p > 0
            if support.sum(axis=1).max() > d or support.sum(axis=0).max() > d:
                raise ValueError(f"transition matrix is not {d}-sparse")
        for array in (p, o_tilde, w):
            array.flags.writeable = False
        self._p = p
        self._o = o_tilde
        self._w = w
        self.sigma_obs = float(sigma_obs)
        self.d = d

    @property
    def p(self) -> np.ndarray:
        return self._p

    @property
    def o_tilde(self) -> np.ndarray:
        return self._o

    @property
    def w(self) -> np.ndarray:
        return self._w

    @property
    def r(self) -> int:
        return self._p.shape[0]

    @property
    def n(self) -> int:
        return self._o.shape[0]

    @property
    def forward(self) -> np.ndarray:
        """
        :return: K = P^T, столбец i - распределение следующего состояния
        """
        return self._p.T

    @property
    def backward(self) -> np.ndarray:
        """
        :return: K' = diag(w) P diag(w)^{-1}, столбец i - распределение предыдущего состояния
        """
        return self._w[:, None] * self._p / self._w[None, :]

    def to_json(self):
        return {
            'P': self._p.tolist(),
            'O': self._o.tolist(),
            'w': self._w.tolist(),
            'sigma_obs': self.sigma_obs,
            'd': self.d,
        }

    @classmethod
    def from_json(cls, data) -> 'HmmModel':
        return HmmModel(p=data['P'], o_tilde=data['O'], w=data['w'], sigma_obs=data['sigma_obs'], d=data.get('d'))

    def __repr__(self) -> str:
        return f'HmmModel(r={self.r}, n={self.n}, d={self.d}, sigma_obs={self.sigma_obs})'

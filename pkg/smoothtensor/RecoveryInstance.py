import numpy as np

from smoothtensor.Subspace import Subspace


class RecoveryInstance(object):
    def __init__(self, points: np.ndarray, labels: np.ndarray, t: Subspace, rho: float, eps0: float,
                 alpha: float, base: np.ndarray, clean: np.ndarray):
        """
        Облако точек задачи восстановления подпространства вместе с истинной разметкой.

        :param points: наблюдаемые точки по строкам, m x n
        :param labels: True для инлаеров
        :param t: скрытое подпространство
        :param rho: величина возмущения
        :param eps0: норма Фробениуса шума противника
        :param alpha: заявленная доля инлаеров
        :param base: базовые точки противника до возмущения
        :param clean: возмущённые точки до шума противника
        """
        self.points = np.asarray(points, dtype=float)
        self.labels = np.asarray(labels, dtype=bool)
        self.t = t
        self.rho = rho
        self.eps0 = eps0
        self.alpha = alpha
        self.base = base
        self.clean = clean

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def d(self) -> int:
        return self.t.dim

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def inlier_count(self) -> int:
        return int(self.labels.sum())

    def __repr__(self) -> str:
        return f'RecoveryInstance(n={self.n}, d={self.d}, m={self.m}, inliers={self.inlier_count}, ' \
               f'rho={self.rho}, eps0={self.eps0})'

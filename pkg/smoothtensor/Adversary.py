import numpy as np

from smoothtensor.Subspace import Subspace


def _random_lengths(count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.5, 1.0, size=count)


def _random_directions(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


class Adversary(object):
    """
    Противник модели восстановления подпространства: выбирает базовые точки и добавляет шум E
    с ||E||_F <= eps0. Базовые точки имеют длины в [1/2, 1].
    """

    def inliers(self, count: int, t: Subspace, rng: np.random.Generator) -> np.ndarray:
        directions = _random_directions(count, t.dim, rng) @ t.basis.T
        return directions * _random_lengths(count, rng)[:, None]

    def outliers(self, count: int, n: int, rng: np.random.Generator) -> np.ndarray:
        return _random_directions(count, n, rng) * _random_lengths(count, rng)[:, None]

    def corruption(self, points: np.ndarray, labels: np.ndarray, t: Subspace, eps0: float,
                   rng: np.random.Generator) -> np.ndarray:
        """
        :return: матрица шума той же формы, что points, с нормой Фробениуса не больше eps0
        """
        raise NotImplementedError


class NullAdversary(Adversary):
    def corruption(self, points, labels, t, eps0, rng):
        return np.zeros_like(points)


class AlignedAdversary(Adversary):
    """
    Сдвигает все инлаеры вдоль одного случайного направления из T^perp, так что ||E||_F = eps0.
    """

    def corruption(self, points, labels, t, eps0, rng):
        e = np.zeros_like(points)
        inliers = np.flatnonzero(labels)
        if eps0 == 0 or inliers.size == 0 or t.dim == t.ambient:
            return e
        direction = t.complement().basis @ _random_directions(1, t.ambient - t.dim, rng)[0]
        e[inliers] = direction * (eps0 / np.sqrt(inliers.size))
        return e

import numpy as np

from smoothtensor.utils.assertion import check_dimension, check_non_negative
from smoothtensor.utils.seeding import make_rng, Seed


class PerturbationModel(object):
    def __init__(self, rho: float, n: int, seed: Seed = None):
        """
        rho-возмущение: к каждой координате добавляется независимый шум N(0, rho^2 / n).

        :param rho: величина возмущения
        :param n: размерность
        :param seed: сид генератора или готовый генератор
        """
        check_non_negative(rho, 'rho')
        check_dimension(n)
        self.rho = float(rho)
        self.n = n
        self.seed = seed

    @property
    def variance(self) -> float:
        return self.rho ** 2 / self.n

    def rng(self) -> np.random.Generator:
        return make_rng(self.seed)

    def noise(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """
        :return: матрица count x n независимого гауссова шума
        """
        return rng.normal(0.0, np.sqrt(self.variance), size=(count, self.n))

    def to_json(self):
        return {
            'rho': self.rho,
            'n': self.n,
            'seed': self.seed if isinstance(self.seed, int) else None,
        }

    @classmethod
    def from_json(cls, data) -> 'PerturbationModel':
        return PerturbationModel(rho=data['rho'], n=data['n'], seed=data.get('seed'))

    def __repr__(self) -> str:
        return f'PerturbationModel(rho={self.rho}, n={self.n}, seed={self.seed})'

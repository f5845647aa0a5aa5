from math import floor

from smoothtensor.utils.assertion import check_order, check_positive, check_non_negative
from smoothtensor.utils.multiindex import sym_dim

DEFAULT_DELTA = 0.3


def default_batch_size(n: int, ell: int, delta: float = DEFAULT_DELTA) -> int:
    return int(floor((1.0 - delta / 3.0) * sym_dim(n, ell)))


def default_threshold(n: int, ell: int, rho: float) -> float:
    return rho ** ell / (10.0 * n ** ell)


class RecoveryParams(object):
    def __init__(self, ell: int, delta: float, tau: float, b: int):
        """
        Параметры робастного восстановления подпространства.

        :param ell: порядок тензорной степени
        :param delta: запас по доле инлаеров
        :param tau: порог обнаружения; точка выбирается при невязке <= tau / 2
        :param b: размер пакета
        """
        check_order(ell)
        check_non_negative(delta, 'delta')
        check_non_negative(tau, 'tau')
        check_positive(b, 'batch size')
        self.ell = ell
        self.delta = delta
        self.tau = tau
        self.b = b

    @classmethod
    def default(cls, n: int, ell: int, rho: float, delta: float = DEFAULT_DELTA) -> 'RecoveryParams':
        """
        b = floor((1 - delta / 3) C(n + ell - 1, ell)), tau = rho^ell / (10 n^ell).
        """
        return RecoveryParams(ell, delta, default_threshold(n, ell, rho), default_batch_size(n, ell, delta))

    def to_json(self):
        return {
            'ell': self.ell,
            'delta': self.delta,
            'tau': self.tau,
            'b': self.b,
        }

    @classmethod
    def from_json(cls, data) -> 'RecoveryParams':
        return RecoveryParams(ell=data['ell'], delta=data['delta'], tau=data['tau'], b=data['b'])

    def __repr__(self) -> str:
        return f'RecoveryParams(ell={self.ell}, delta={self.delta}, tau={self.tau:.3e}, b={self.b})'

    def __eq__(self, other) -> bool:
        if not isinstance(other, RecoveryParams):
            return False
        return self.to_json() == other.to_json()

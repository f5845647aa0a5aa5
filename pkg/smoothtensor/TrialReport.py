from typing import Dict, Optional, Any

from smoothtensor.utils.collections import remove_none_values


class TrialReport(object):
    def __init__(self, trial_id: int, seed: Optional[int], params: Dict[str, Any], metric: str,
                 value: float, threshold: float, extras: Optional[Dict[str, Any]] = None):
        """
        Результат одного испытания: наблюдаемое значение и порог, с которым оно сравнивается.

        :param trial_id: номер испытания
        :param seed: сид испытания
        :param params: описание экземпляра (n, ell, k или R, delta, rho ...)
        :param metric: имя измеряемой величины
        :param value: наблюдаемое значение
        :param threshold: порог
        :param extras: дополнительные величины (профиль перекрытий, счётчики ...)
        """
        self.trial_id = trial_id
        self.seed = seed
        self.params = dict(params)
        self.metric = metric
        self.value = float(value)
        self.threshold = float(threshold)
        self.extras = dict(extras or {})

    @property
    def sigma_observed(self) -> float:
        return self.value

    @property
    def passed(self) -> bool:
        return self.value >= self.threshold

    def to_json(self):
        return remove_none_values({
            'trial_id': self.trial_id,
            'seed': self.seed,
            'params': self.params,
            'metric': self.metric,
            'value': self.value,
            'threshold': self.threshold,
            'passed': self.passed,
            'extras': self.extras or None,
        })

    def __repr__(self) -> str:
        return f'TrialReport(trial_id={self.trial_id}, metric={self.metric}, value={self.value:.3e}, ' \
               f'threshold={self.threshold:.3e}, passed={self.passed})'

from typing import Dict, Any, List, Tuple

from smoothtensor.TrialReport import TrialReport

FIELDS = ['kind', 'trial_id', 'seed', 'params', 'metric', 'value', 'threshold', 'passed', 'wall_time']


def _number(value: float) -> str:
    return repr(float(value))


class ResultRow(object):
    def __init__(self, kind: str, trial_id: int, seed: int, params: Dict[str, Any], metric: str, value: float,
                 threshold: float, passed: bool, wall_time: float = 0.0):
        """
        Строка результатов: одна на пару (испытание, метрика).
        """
        self.kind = kind
        self.trial_id = trial_id
        self.seed = seed
        self.params = dict(params)
        self.metric = metric
        self.value = float(value)
        self.threshold = float(threshold)
        self.passed = bool(passed)
        self.wall_time = float(wall_time)

    @classmethod
    def from_report(cls, kind: str, report: TrialReport, wall_time: float = 0.0) -> 'ResultRow':
        return ResultRow(kind, report.trial_id, report.seed, report.params, report.metric, report.value,
                         report.threshold, report.passed, wall_time)

    @property
    def sort_key(self) -> Tuple[str, int, str]:
        return self.kind, self.trial_id, self.metric

    def to_csv(self) -> List[str]:
        """
        Значения в порядке FIELDS; params - пары key=value через ";" в порядке ключей.
        """
        params = ';'.join(f'{key}={self.params[key]}' for key in sorted(self.params))
        return [self.kind, str(self.trial_id), str(self.seed), params, self.metric, _number(self.value),
                _number(self.threshold), 'true' if self.passed else 'false', '%.6f' % self.wall_time]

    def __repr__(self) -> str:
        return f'ResultRow(kind={self.kind}, trial_id={self.trial_id}, metric={self.metric}, value={self.value}, ' \
               f'passed={self.passed})'

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultRow):
            return False
        return self.to_csv() == other.to_csv()

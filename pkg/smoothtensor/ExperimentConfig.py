from typing import Dict, Any, Tuple, Optional

from smoothtensor.utils.collections import remove_none_values
from smoothtensor.utils.errors import ConfigError

SHARED = {
    'kind': (str, 'ensemble'),
    'seed': (int, 0),
    'trials': (int, 10),
    'jobs': (int, 0),
    'out': (str, 'results'),
    'timing': (bool, False),
    'min_pass_fraction': (float, 0.9),
}


class ExperimentConfig(object):
    SCHEMAS: Dict[str, Dict[str, Tuple[type, Any]]] = {
        'ensemble': {
            'experiment': (str, 'column_poly'),
            'n': (int, 8),
            'ell': (int, 2),
            'k': (int, 30),
            'r': (int, 2),
            'rho': (float, 0.1),
            'c': (float, 0.1),
            'delta': (float, 0.1),
            'dim_fraction': (float, 0.5),
            'eps_grid': (list, [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1]),
            'eta': (float, 8.0),
            'samples': (int, 10000),
            'slope_tolerance': (float, 0.3),
        },
        'subspace': {
            'n': (int, 8),
            'd': (int, 4),
            'm': (int, 600),
            'alpha': (float, 0.35),
            'rho': (float, 0.1),
            'eps0': (float, 0.0),
            'ell': (int, 2),
            'delta': (float, 0.3),
            'tau': (float, 0.0),
            'max_sin_theta': (float, 1e-6),
            'points_file': (str, ''),
        },
        'foobi': {
            'n': (int, 4),
            'ell': (int, 2),
            'R': (int, 5),
            'err_norm': (float, 0.0),
            'retries': (int, 20),
            'gap_floor': (float, 1.0),
            'max_error': (float, 1e-6),
            'tensor_file': (str, ''),
        },
        'hmm': {
            'r': (int, 4),
            'n': (int, 5),
            'd': (int, 2),
            'ell': (int, 1),
            'rho': (float, 0.1),
            'sigma_obs': (float, 0.1),
            'gamma': (float, 0.05),
            'samples': (int, 0),
            'max_error': (float, 1e-6),
            'model_file': (str, ''),
            'samples_file': (str, ''),
        },
        'selftest': {},
    }

    def __init__(self, kind: str, values: Optional[Dict[str, Any]] = None):
        """
        Плоская типизированная конфигурация эксперимента.

        :param kind: вид эксперимента
        :param values: значения ключей; отсутствующие берутся по умолчанию
        :raise ConfigError: когда вид или ключ неизвестен, либо значение не приводится к типу
        """
        if kind not in self.SCHEMAS:
            raise ConfigError(f'unknown experiment kind: {kind!r}')
        self.kind = kind
        self._values = {key: default for key, (_, default) in self.schema().items()}
        self._values['kind'] = kind
        for key, value in (values or {}).items():
            self[key] = value

    def schema(self) -> Dict[str, Tuple[type, Any]]:
        return {**SHARED, **self.SCHEMAS[self.kind]}

    def __getitem__(self, key: str) -> Any:
        return self._values[key]

    def __setitem__(self, key: str, value: Any):
        schema = self.schema()
        if key not in schema:
            raise ConfigError(f'unknown key {key!r} for experiment kind {self.kind!r}')
        if key == 'kind' and value != self.kind:
            raise ConfigError(f'kind {value!r} does not match {self.kind!r}')
        self._values[key] = _convert(key, value, schema[key][0])

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        out = ExperimentConfig(self.kind, self._values)
        for key, value in remove_none_values(overrides).items():
            out[key] = value
        return out

    @classmethod
    def parse(cls, text: str) -> 'ExperimentConfig':
        """
        Разбор текста вида "key = value" по строке; "#" начинает комментарий.
        """
        values = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(f'line {number}: expected "key = value", got {raw!r}')
            key, value = (part.strip() for part in line.split('=', 1))
            values[key] = value
        if 'kind' not in values:
            raise ConfigError('missing required key "kind"')
        return ExperimentConfig(values.pop('kind'), values)

    @classmethod
    def load(cls, path: str) -> 'ExperimentConfig':
        try:
            with open(path) as f:
                return cls.parse(f.read())
        except OSError as e:
            raise ConfigError(f'cannot read config {path}: {e}')

    def dumps(self) -> str:
        return ''.join(f'{key} = {_format(self._values[key])}\n' for key in sorted(self._values))

    def dump(self, path: str):
        with open(path, 'w') as f:
            f.write(self.dumps())

    def to_json(self):
        return dict(self._values)

    def __repr__(self) -> str:
        return f'ExperimentConfig(kind={self.kind}, seed={self["seed"]}, trials={self["trials"]})'

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExperimentConfig):
            return False
        return self._values == other.to_json()


def _convert(key: str, value: Any, type_: type) -> Any:
    try:
        if type_ is bool:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text not in ('true', 'false', '1', '0', 'yes', 'no'):
                raise ValueError(text)
            return text in ('true', '1', 'yes')
        if type_ is list:
            if isinstance(value, str):
                return [float(v) for v in value.split(',') if v.strip()]
            return [float(v) for v in value]
        if type_ is int and isinstance(value, str):
            return int(value.strip())
        return type_(value)
    except (TypeError, ValueError):
        raise ConfigError(f'invalid value for {key!r}: {value!r}')


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ', '.join(repr(float(v)) for v in value)
    return str(value)

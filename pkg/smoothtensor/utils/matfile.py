from typing import List

import numpy as np

from smoothtensor.DenseTensor import DenseTensor
from smoothtensor.utils.errors import MalformedFileError


def _format(value: float) -> str:
    return '%.17g' % value


def _read_lines(path: str) -> List[str]:
    with open(path) as f:
        return [line.strip() for line in f.read().splitlines()]


def _parse_ints(line: str, what: str) -> List[int]:
    try:
        values = [int(v) for v in line.split()]
    except ValueError:
        raise MalformedFileError(f'malformed {what} header: {line!r}')
    if any(v < 0 for v in values):
        raise MalformedFileError(f'negative size in {what} header: {line!r}')
    return values


def write_matrix(path: str, m: np.ndarray):
    """
    Запись матрицы в текстовом формате: заголовок "rows cols", затем по строке на каждую строку матрицы.
    Значения пишутся с 17 значащими цифрами, чтение восстанавливает их побитово.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    with open(path, 'w') as f:
        f.write(f'{m.shape[0]} {m.shape[1]}\n')
        for row in m:
            f.write(' '.join(_format(v) for v in row) + '\n')


def read_matrix(path: str) -> np.ndarray:
    """
    Чтение матрицы, записанной write_matrix.

    :raise MalformedFileError: когда заголовок повреждён или длина строки не совпадает с заголовком
    """
    lines = _read_lines(path)
    if len(lines) == 0 or lines[0] == '':
        raise MalformedFileError('malformed matrix header: empty file')
    header = _parse_ints(lines[0], 'matrix')
    if len(header) != 2:
        raise MalformedFileError(f'matrix header must be "rows cols", got {lines[0]!r}')
    rows, cols = header
    body = lines[1:1 + rows]
    if len(body) != rows:
        raise MalformedFileError(f'expected {rows} rows, found {len(body)}')
    m = np.empty((rows, cols))
    for i, line in enumerate(body):
        values = line.split()
        if len(values) != cols:
            raise MalformedFileError(f'row {i} has {len(values)} values, expected {cols}')
        try:
            m[i] = [float(v) for v in values]
        except ValueError as e:
            raise MalformedFileError(f'row {i}: {e}')
    return m


def write_tensor(path: str, t: DenseTensor):
    """
    Запись тензора: заголовок "order d1 ... dk", затем значения в row-major порядке, по одному на строку.
    """
    with open(path, 'w') as f:
        f.write(' '.join(str(v) for v in [t.order] + list(t.shape)) + '\n')
        for v in t.data:
            f.write(_format(v) + '\n')


def read_tensor(path: str) -> DenseTensor:
    """
    Чтение тензора, записанного write_tensor.

    :raise MalformedFileError: когда заголовок повреждён или число значений не совпадает с размерами
    """
    lines = [line for line in _read_lines(path) if line != '']
    if len(lines) == 0:
        raise MalformedFileError('malformed tensor header: empty file')
    header = _parse_ints(lines[0], 'tensor')
    if len(header) < 2 or header[0] != len(header) - 1:
        raise MalformedFileError(f'tensor header must be "order d1 ... dk", got {lines[0]!r}')
    shape = header[1:]
    size = int(np.prod(shape))
    if len(lines) - 1 != size:
        raise MalformedFileError(f'expected {size} values, found {len(lines) - 1}')
    try:
        data = np.array([float(v) for v in lines[1:]])
    except ValueError as e:
        raise MalformedFileError(str(e))
    return DenseTensor(shape, data)

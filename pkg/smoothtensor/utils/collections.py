from typing import TypeVar, Dict, Optional, Iterable, Tuple

K = TypeVar('K')
V = TypeVar('V')


def remove_none_values(c: Dict[K, Optional[V]]) -> Dict[K, V]:
    return {k: v for k, v in c.items() if v is not None}


def pairs(r: int, diagonal: bool = False) -> Iterable[Tuple[int, int]]:
    """
    Пары индексов (i, j) в лексикографическом порядке: i < j или i <= j.
    """
    for i in range(r):
        for j in range(i if diagonal else i + 1, r):
            yield i, j

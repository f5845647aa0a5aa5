import asyncio
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar('T')

logger = logging.getLogger(__name__)


def default_jobs(jobs: int = 0) -> int:
    return jobs if jobs > 0 else (os.cpu_count() or 1)


async def gather_trials(fn: Callable[[int], T], trial_ids: Iterable[int], jobs: int = 0) -> List[T]:
    """
    Запуск независимых испытаний в пуле потоков.
    Результаты возвращаются в порядке номеров испытаний, независимо от порядка завершения.

    :param fn: функция испытания, принимает номер испытания
    :param trial_ids: номера испытаний
    :param jobs: число потоков; 0 - по числу ядер
    :return: результаты, отсортированные по номеру испытания
    """
    loop = asyncio.get_event_loop()
    ids = sorted(trial_ids)
    with ThreadPoolExecutor(max_workers=default_jobs(jobs)) as executor:
        futures = [loop.run_in_executor(executor, fn, trial_id) for trial_id in ids]
        results = await asyncio.gather(*futures)
    logger.debug('completed %d trials', len(ids))
    return list(results)


def run_trials(fn: Callable[[int], T], trial_ids: Iterable[int], jobs: int = 0) -> List[T]:
    """
    Синхронная обёртка над gather_trials для кода вне event-loop.
    """
    ids = list(trial_ids)
    if default_jobs(jobs) == 1:
        return [fn(trial_id) for trial_id in sorted(ids)]
    loop = asyncio.new_event_loop()
    try:
        return loop.run_until_complete(gather_trials(fn, ids, jobs))
    finally:
        loop.close()

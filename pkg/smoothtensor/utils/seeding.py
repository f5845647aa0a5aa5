from typing import List, Optional, Union

import numpy as np

Seed = Union[int, np.random.Generator, None]


def trial_seed(master_seed: int, trial_id: int) -> int:
    """
    Сид испытания, выведенный из главного сида и номера испытания.
    Не зависит от порядка выполнения испытаний.
    """
    state = np.random.SeedSequence([int(master_seed), int(trial_id)]).generate_state(1, np.uint64)
    return int(state[0])


def make_rng(seed: Seed = None) -> np.random.Generator:
    """
    Генератор на основе счётчика (Philox). Готовый генератор возвращается как есть.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def trial_rng(master_seed: int, trial_id: int) -> np.random.Generator:
    return make_rng(trial_seed(master_seed, trial_id))


def child_rngs(seed: Optional[int], count: int) -> List[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]

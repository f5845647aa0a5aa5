import math
from typing import Sequence, Tuple, Optional

import numpy as np
from scipy.stats import norm


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Двусторонний интервал Уилсона для доли успехов.

    :param successes: число успехов
    :param trials: число испытаний
    :param confidence: уровень доверия
    :return: (нижняя граница, верхняя граница)
    """
    if trials <= 0:
        return 0.0, 1.0
    successes = max(0, min(int(successes), int(trials)))
    z = float(norm.ppf(0.5 + confidence / 2.0))
    z2 = z * z
    phat = successes / trials
    denom = 1.0 + z2 / trials
    center = phat + z2 / (2.0 * trials)
    margin = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    return max(0.0, (center - margin) / denom), min(1.0, (center + margin) / denom)


def intervals_overlap(a: Tuple[float, float], b: Tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def median(values: Sequence[float]) -> float:
    if len(values) == 0:
        return float('nan')
    return float(np.median(np.asarray(values, dtype=float)))


def loglog_slope(xs: Sequence[float], ys: Sequence[float], weights: Optional[Sequence[float]] = None) -> float:
    """
    Наклон прямой log(y) ~ log(x), взвешенный МНК. Точки с y <= 0 отбрасываются.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    w = np.ones_like(xs) if weights is None else np.asarray(weights, dtype=float)
    keep = (ys > 0) & (w > 0)
    if keep.sum() < 2:
        raise ValueError("at least two positive points are required for a slope")
    lx, ly, w = np.log(xs[keep]), np.log(ys[keep]), w[keep]
    mx = np.sum(w * lx) / np.sum(w)
    my = np.sum(w * ly) / np.sum(w)
    return float(np.sum(w * (lx - mx) * (ly - my)) / np.sum(w * (lx - mx) ** 2))

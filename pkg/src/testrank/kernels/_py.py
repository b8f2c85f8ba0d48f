"""Pure-numpy fallback for the GA hot kernels."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def fitness_batch(population: np.ndarray, scores: np.ndarray, gamma: float) -> np.ndarray:
    """Discounted-sum fitness of each genome row: sum_r gamma^r * score[order[r]]."""
    n = population.shape[1]
    discounts = gamma ** np.arange(n, dtype=np.float64)
    return (scores[population] * discounts).sum(axis=1)


def ox1_batch(p1: np.ndarray, p2: np.ndarray,
              lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Order crossover (OX1) for each parent pair.

    Child i keeps p1[i, lo[i]:hi[i]+1] in place; remaining positions are
    filled from p2[i] in order starting after hi[i] (wrapping), skipping
    values already taken from the segment.
    """
    k, n = p1.shape
    children = np.empty_like(p1)
    for i in range(k):
        a, b = int(lo[i]), int(hi[i])
        seg = p1[i, a:b + 1]
        rolled = np.roll(p2[i], -(b + 1))
        fill = rolled[~np.isin(rolled, seg)]
        children[i, a:b + 1] = seg
        positions = np.arange(b + 1, b + 1 + n - seg.size) % n
        children[i, positions] = fill
    return children

"""Sparse-table range-minimum queries over a static integer array."""
from __future__ import annotations

from array import array
from typing import List, Sequence

import numpy as np


class SparseTable:
    """O(n log n) preprocessing, O(1) ``query(lo, hi)`` with ``hi`` inclusive.

    Levels are kept as ``array('i')`` so that single-element reads from
    Python stay cheap.
    """

    __slots__ = ("n", "levels")

    def __init__(self, data: Sequence[int]):
        base = np.asarray(data, dtype=np.int32)
        self.n = len(base)
        self.levels: List[array] = []
        if self.n == 0:
            return
        cur = base
        self.levels.append(array("i", cur.tobytes()))
        width = 1
        while 2 * width <= self.n:
            cur = np.minimum(cur[:-width], cur[width:])
            self.levels.append(array("i", cur.tobytes()))
            width *= 2

    def query(self, lo: int, hi: int) -> int:
        if lo < 0 or hi >= self.n or lo > hi:
            raise IndexError(f"bad range [{lo}, {hi}] for length {self.n}")
        k = (hi - lo + 1).bit_length() - 1
        row = self.levels[k]
        a = row[lo]
        b = row[hi - (1 << k) + 1]
        return a if a <= b else b

    def __len__(self) -> int:
        return self.n

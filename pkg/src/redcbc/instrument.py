"""Optional arithmetic-operation counters.

Counting is off unless a :func:`count_operations` block is active.  FFTs are
charged with the usual ``5 L log2 L`` real-flop model for length ``L``.
"""
from __future__ import annotations

import contextlib
import math
from collections import defaultdict

_active = None


class OpCounter:
    def __init__(self):
        self.by_category = defaultdict(float)

    @property
    def total(self) -> float:
        return float(sum(self.by_category.values()))

    def add(self, category: str, ops: float):
        self.by_category[category] += ops

    def __repr__(self):
        return f"OpCounter(total={self.total:.0f})"


@contextlib.contextmanager
def count_operations():
    global _active
    prev, _active = _active, OpCounter()
    try:
        yield _active
    finally:
        _active = prev


def tally(category: str, ops: float):
    if _active is not None:
        _active.add(category, ops)


def fft_cost(length: int) -> float:
    return 5.0 * length * math.log2(length) if length > 1 else 0.0


def counting() -> bool:
    return _active is not None

"""Utility functions shared by the processors.

Small numeric and iteration helpers used across the pipeline.
"""

import math
from typing import Iterator, List, Optional, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def batch_items(items: Sequence[T], batch_size: int) -> Iterator[Sequence[T]]:
    """Split a sequence into batches of specified size.

    Args:
        items: Sequence to batch
        batch_size: Size of each batch

    Yields:
        Batches of the sequence

    Example:
        >>> list(batch_items([1, 2, 3, 4, 5], 2))
        [[1, 2], [3, 4], [5]]
    """
    for i in range(0, len(items), batch_size):
        yield items[i:i + batch_size]


def safe_divide(numerator: float, denominator: float, default: float = 0.0) -> float:
    """Safely divide two numbers, returning default if denominator is zero.

    Examples:
        >>> safe_divide(10, 2)
        5.0
        >>> safe_divide(10, 0)
        0.0
    """
    if denominator == 0:
        return default

    return numerator / denominator


def safe_log(value: float) -> float:
    """Natural log with ``log(0) = 0``."""
    if value <= 0:
        return 0.0
    return math.log(value)


def harmonic_mean(a: float, b: float) -> float:
    """F1-style harmonic mean, 0 when both are 0."""
    return safe_divide(2 * a * b, a + b)


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """Numpy generator for a seed (fresh entropy when None)."""
    return np.random.default_rng(seed)


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Derive ``count`` independent child seeds from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def tokens_contain(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    """Whether ``needle`` occurs as a contiguous token run inside ``haystack``.

    Examples:
        >>> tokens_contain(["Barack", "Obama"], ["Obama"])
        True
        >>> tokens_contain(["Obama"], ["Bama"])
        False
    """
    size = len(needle)
    if size == 0 or size > len(haystack):
        return False
    first = needle[0]
    for start in range(len(haystack) - size + 1):
        if haystack[start] == first and list(haystack[start:start + size]) == list(needle):
            return True
    return False

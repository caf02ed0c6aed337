"""String similarity measures for candidate generation."""

from typing import FrozenSet

from rapidfuzz.distance import JaroWinkler, Levenshtein

from ..config.constants import TRIGRAM_END, TRIGRAM_START


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance."""
    return int(Levenshtein.distance(a, b))


def jaro_winkler_distance(a: str, b: str) -> float:
    """``1 − Jaro-Winkler similarity`` (prefix scale 0.1, prefix up to 4)."""
    return float(JaroWinkler.normalized_distance(a, b, prefix_weight=0.1))


def trigrams(text: str) -> FrozenSet[str]:
    """Distinct character trigrams of the lowercased text padded on both sides.

    Examples:
        >>> sorted(trigrams("Ab"))
        ['\\x02ab', 'ab\\x03']
    """
    padded = f"{TRIGRAM_START}{text.lower()}{TRIGRAM_END}"
    return frozenset(padded[i:i + 3] for i in range(len(padded) - 2))


def trigram_overlap(query: str, surface: str) -> float:
    """Share of the query's trigrams found in the surface (0 for an empty query)."""
    query_grams = trigrams(query)
    if not query_grams:
        return 0.0
    return len(query_grams & trigrams(surface)) / len(query_grams)


def word_diff(a: str, b: str) -> int:
    """Number of distinct words of ``a`` missing from ``b``."""
    return len(set(a.split()) - set(b.split()))

import numpy as np
import pytest

from src.processors.string_metrics import (
    jaro_winkler_distance,
    levenshtein,
    trigram_overlap,
    trigrams,
    word_diff,
)


def recursive_levenshtein(a: str, b: str) -> int:
    """Exhaustive recursion with memoization, independent of any library."""
    memo = {}

    def go(i: int, j: int) -> int:
        if (i, j) in memo:
            return memo[(i, j)]
        if i == 0:
            result = j
        elif j == 0:
            result = i
        else:
            result = min(
                go(i - 1, j) + 1,
                go(i, j - 1) + 1,
                go(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
            )
        memo[(i, j)] = result
        return result

    return go(len(a), len(b))


def test_levenshtein_matches_recursive_oracle():
    rng = np.random.default_rng(7)
    alphabet = list("abcd ")
    for _ in range(1000):
        a = "".join(rng.choice(alphabet, size=int(rng.integers(0, 13))))
        b = "".join(rng.choice(alphabet, size=int(rng.integers(0, 13))))
        assert levenshtein(a, b) == recursive_levenshtein(a, b)


def test_jaro_winkler_identity_and_symmetry():
    rng = np.random.default_rng(11)
    alphabet = list("abcdefg")
    for _ in range(300):
        a = "".join(rng.choice(alphabet, size=int(rng.integers(1, 10))))
        b = "".join(rng.choice(alphabet, size=int(rng.integers(1, 10))))
        assert jaro_winkler_distance(a, a) == 0.0
        assert jaro_winkler_distance(a, b) == pytest.approx(jaro_winkler_distance(b, a), abs=1e-12)
        assert 0.0 <= jaro_winkler_distance(a, b) <= 1.0


def test_trigrams_are_padded_and_lowercased():
    assert trigrams("ab") == trigrams("AB")
    assert len(trigrams("Paris")) == 5
    assert trigrams("") == frozenset()


def test_trigram_overlap_is_query_relative():
    # "is\x03" is the only query trigram missing from the longer surface
    assert trigram_overlap("Paris", "Paris Hilton") == pytest.approx(0.8)
    assert trigram_overlap("", "anything") == 0.0


def test_word_diff_counts_missing_words_of_first_argument():
    assert word_diff("Paris Hilton", "Paris") == 1
    assert word_diff("Paris", "Paris Hilton") == 0

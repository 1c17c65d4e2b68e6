"""
Module util collects the small helpers the numerical modules share: naming the caller for log lines, encoding words as
integers and log-space reductions over groups of words.

Words are rows of a numpy integer array, symbols are alphabet indices. A word of fixed length n over an alphabet of size
b is encoded as its base-b integer, so lexicographic order of words is numeric order of codes.
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import inspect
import math
import sys

import numpy as np
import fire
import box
import pytest
from scipy.special import logsumexp

from gibbsmap.checker import BudgetError


def caller():
    """
    Return the name of the function that calls `caller()`, e.g. `def my_calling(): return caller(); my_calling()` returns `my_calling`.
    :return: str
    """
    return inspect.currentframe().f_back.f_code.co_name


def encode(words: np.ndarray, base: int) -> np.ndarray:
    """
    Base-`base` integer codes of the rows of `words`.
    :param words: 2d integer array, one word per row
    :param base: alphabet size
    :return: 1d int64 array
    """
    words = np.asarray(words, dtype=np.int64)
    if words.ndim == 1:
        words = words[None, :]
    n = words.shape[1]
    if n == 0:
        return np.zeros(words.shape[0], dtype=np.int64)
    if base > 1 and n * math.log2(base) > 63:
        raise BudgetError(f"codes of length {n} over {base} symbols overflow int64", float(base) ** n)
    powers = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return words @ powers


def group_starts(keys: np.ndarray) -> np.ndarray:
    """
    Start index of each run of equal values in `keys`, which must already be grouped (e.g. sorted).
    """
    keys = np.asarray(keys)
    if keys.size == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])


def group_logsumexp(values: np.ndarray, groups: np.ndarray, n_groups: int) -> np.ndarray:
    """
    log Σ exp(values[i]) over each group; groups without members get -inf.
    :param values: 1d log-values
    :param groups: 1d group index per value, in [0, n_groups)
    :param n_groups: number of groups
    :return: 1d array of length n_groups
    """
    values = np.asarray(values, dtype=float)
    groups = np.asarray(groups, dtype=np.int64)
    peak = np.full(n_groups, -np.inf)
    np.maximum.at(peak, groups, values)
    finite = np.where(np.isfinite(peak), peak, 0.0)
    total = np.zeros(n_groups)
    np.add.at(total, groups, np.exp(values - finite[groups]))
    with np.errstate(divide="ignore"):
        return np.where(total > 0, finite + np.log(total), -np.inf)


def contiguous_logsumexp(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """log-sum-exp over the contiguous segments beginning at `starts`."""
    bounds = np.r_[starts, len(values)]
    return np.array([logsumexp(values[a:b]) for a, b in zip(bounds[:-1], bounds[1:])])


def log_total(values: np.ndarray) -> float:
    """log Σ exp(values), numpy pairwise summation under scipy's logsumexp so the reduction order is fixed."""
    return float(logsumexp(np.asarray(values, dtype=float)))


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return box.Box(
        words=np.array([[0, 0], [0, 1], [1, 0], [2, 2]]),
        values=np.log(np.array([1.0, 2.0, 3.0, 4.0])),
        groups=np.array([0, 0, 2, 2]),
    )


class Tests:
    def test_caller(self, testcases):
        def my_calling():
            return caller()

        assert my_calling() == "my_calling"

    def test_encode_is_lexicographic(self, testcases):
        codes = encode(testcases.words, 3)
        assert codes.tolist() == [0, 1, 3, 8]
        assert np.all(np.diff(codes) > 0)

    def test_encode_empty_words(self, testcases):
        assert encode(np.zeros((3, 0), dtype=int), 2).tolist() == [0, 0, 0]

    def test_encode_overflow(self, testcases):
        assert encode(np.ones((1, 39), dtype=int), 3)[0] == (3**39 - 1) // 2
        with pytest.raises(BudgetError) as e:
            encode(np.zeros((1, 40), dtype=int), 3)
        assert e.value.estimate == 3.0**40
        assert encode(np.zeros((2, 100), dtype=int), 1).tolist() == [0, 0]

    def test_group_starts(self, testcases):
        assert group_starts(np.array([4, 4, 5, 7, 7, 7])).tolist() == [0, 2, 3]

    def test_group_logsumexp(self, testcases):
        result = group_logsumexp(testcases.values, testcases.groups, 3)
        assert np.isclose(result[0], np.log(3.0))
        assert result[1] == -np.inf
        assert np.isclose(result[2], np.log(7.0))

    def test_contiguous_matches_grouped(self, testcases):
        starts = group_starts(testcases.groups)
        assert np.allclose(contiguous_logsumexp(testcases.values, starts), [np.log(3.0), np.log(7.0)])

    def test_log_total(self, testcases):
        assert np.isclose(log_total(testcases.values), np.log(10.0))


def version(*rest: tuple[str]):
    """
    Report the version of this module a.k.a. `__version__` (if it's supplied)
    :param *rest: ignored
    :return: str
    """
    return globals().get("__version__", "unknown")


def about(*rest: tuple[str]):
    """
    Describe this module using the module docstring.
    :param *rest: ignored
    :return:
    """
    print(__doc__)


def pt(*rest: tuple[str]):
    """
    Run all pytests in class Tests in this module.
    :param *rest: additional arguments to pytest.main(), not actually used yet
    :return: 0 if all tests pass, >0 otherwise (whatever pytest.main() returns)
    """
    return pytest.main(["--verbose", *sys.argv[2:], __file__])


def main():
    return fire.Fire()


if __name__ == "__main__":
    main()

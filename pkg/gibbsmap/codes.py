#!/usr/bin/env python
"""
Module `codes` handles one-block factor maps π: X -> Y between subshifts: preimage cylinders of y-words, their counts
φ̃_n(y) = |π^{-1}[y_1...y_n]|, and Condition A (near-multiplicativity of those counts).

cli usage: `python -m gibbsmap.codes ${action}`

python usage:
  from gibbsmap import shift, codes
  X, Y = shift.build_full_shift(3, "abc"), shift.build_full_shift(2, "AB")
  pi = codes.FactorMap.from_pairs(X, Y, [("a", "A"), ("b", "A"), ("c", "B")])
  codes.preimage_cylinders(pi, Y.parse("AB"))  # [(0, 2), (1, 2)], i.e. ac, bc
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import math
import sys
import threading
import typing as t

import numpy as np
import pydantic
import fire
import box
import pytest
from hypothesis import given, settings, strategies as st

from gibbsmap import shift as sh
from gibbsmap import report, util
from gibbsmap.checker import check, DomainError, InvalidAlphabetError


class FactorMap:
    """
    A one-block map given by `symbol_map[x_symbol] = y_symbol`. Construction checks that images of X-words are Y-words and
    that every Y-word up to `verify_length` has a preimage.
    """

    def __init__(self, domain: sh.Subshift, codomain: sh.Subshift, symbol_map: t.Sequence[int], verify_length: int = 8, name: str = "") -> None:
        self.domain = domain
        self.codomain = codomain
        self.symbol_map = tuple(int(s) for s in symbol_map)
        self.lookup = np.array(self.symbol_map, dtype=np.int64)
        self.verify_length = verify_length
        self.name = name or f"{domain.name}->{codomain.name}"
        self._images: dict[int, np.ndarray] = {}
        self._counts: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()
        self.conforms()

    @staticmethod
    def make(domain: sh.Subshift, codomain: sh.Subshift, symbol_map: t.Sequence[int], verify_length: int = 8, name: str = "") -> FactorMap:
        return FactorMap(domain, codomain, symbol_map, verify_length, name)

    @staticmethod
    def from_pairs(domain: sh.Subshift, codomain: sh.Subshift, pairs: t.Iterable[tuple[str, str]], verify_length: int = 8, name: str = "") -> FactorMap:
        """Build from (x-symbol, y-symbol) pairs, each x-symbol exactly once."""
        pairs = list(pairs)
        xs = [x for x, _ in pairs]
        check(len(xs) == len(set(xs)), f"x-symbols mapped twice: {sorted({x for x in xs if xs.count(x) > 1})}", InvalidAlphabetError)
        missing = [x for x in domain.symbols if x not in xs]
        check(not missing, f"symbol_map misses x-symbols {missing}", InvalidAlphabetError)
        unknown = [x for x in xs if x not in domain.symbols] + [y for _, y in pairs if y not in codomain.symbols]
        check(not unknown, f"symbol_map names unknown symbols {unknown}", InvalidAlphabetError)
        table = dict(pairs)
        return FactorMap(domain, codomain, [codomain.symbols.index(table[x]) for x in domain.symbols], verify_length, name)

    def conforms(self) -> FactorMap:
        X, Y = self.domain, self.codomain
        check(len(self.symbol_map) == X.alphabet_size, f"symbol_map has {len(self.symbol_map)} entries for {X.alphabet_size} symbols", InvalidAlphabetError)
        check(all(0 <= s < Y.alphabet_size for s in self.symbol_map), f"symbol_map values outside {Y.symbols}", InvalidAlphabetError)
        # stay within a few million words while verifying
        length = max(1, min(self.verify_length, int(math.log(2e6) / math.log(max(2, X.alphabet_size)))))
        images = np.unique(util.encode(self.lookup[X.words_array(length)], Y.alphabet_size))
        codes = Y.codes(length)
        check(np.isin(images, codes).all(), f"{self.name}: some image of B_{length}({X.name}) is not in B_{length}({Y.name})", DomainError)
        check(len(images) == len(codes), f"{self.name}: not onto B_{length}({Y.name}), {len(codes) - len(images)} words without preimage", DomainError)
        logger.debug("%s verified onto up to length %d", self.name, length)
        return self

    def image(self, word: t.Sequence[int]) -> sh.Word:
        return tuple(self.symbol_map[a] for a in word)

    def fiber(self, y_symbol: int) -> tuple[int, ...]:
        """x-symbols mapping to y_symbol, increasing."""
        return tuple(a for a, b in enumerate(self.symbol_map) if b == y_symbol)

    @property
    def fiber_sizes(self) -> tuple[int, ...]:
        return tuple(len(self.fiber(b)) for b in range(self.codomain.alphabet_size))

    def image_index(self, n: int) -> np.ndarray:
        """For each word of B_n(X), the row of its image in B_n(Y)."""
        with self._lock:
            if n not in self._images:
                images = self.lookup[self.domain.words_array(n)]
                self._images[n] = np.searchsorted(self.codomain.codes(n), util.encode(images, self.codomain.alphabet_size))
            return self._images[n]

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r}, symbol_map={self.symbol_map})"


def _preimage_rows(pi: FactorMap, y_word: t.Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Preimage x-words of y_word with their automaton states, lexicographic."""
    y_word = pi.codomain.require(y_word)
    automaton = pi.domain.automaton
    rows, states = np.zeros((1, 0), dtype=np.int16), np.zeros(1, dtype=np.int64)
    for b in y_word:
        fiber = np.array(pi.fiber(b), dtype=np.int64)
        successors = automaton.delta[np.ix_(states, fiber)]
        r, c = np.nonzero(successors >= 0)
        rows = np.hstack([rows[r], fiber[c][:, None].astype(np.int16)])
        states = successors[r, c]
    return rows, states


def preimage_cylinders(pi: FactorMap, y_word: t.Sequence[int]) -> list[sh.Word]:
    """All admissible x-words whose symbol-wise image is y_word, lexicographic."""
    rows, _ = _preimage_rows(pi, y_word)
    return [tuple(int(a) for a in row) for row in rows]


def preimage_count(pi: FactorMap, y_word: t.Sequence[int]) -> int:
    """φ̃_n(y): exact count by dynamic programming over the subset automaton."""
    y_word = pi.codomain.require(y_word)
    automaton = pi.domain.automaton
    counts = {0: 1}
    for b in y_word:
        following: dict[int, int] = {}
        for state, c in counts.items():
            for a in pi.fiber(b):
                s = int(automaton.delta[state, a])
                if s >= 0:
                    following[s] = following.get(s, 0) + c
        counts = following
    return sum(counts.values())


def preimage_counts(pi: FactorMap, n: int) -> np.ndarray:
    """φ̃_n for every word of B_n(Y), aligned with codomain.words_array(n)."""
    with pi._lock:
        cached = pi._counts.get(n)
    if cached is None:
        cached = np.bincount(pi.image_index(n), minlength=pi.codomain.count(n)).astype(np.int64)
        with pi._lock:
            pi._counts[n] = cached
    return cached


class ConditionA(pydantic.BaseModel):
    """Finite check of Condition A. `trend` lists (L, D_L), the minimum ratio over words of length L."""

    model_config = pydantic.ConfigDict(frozen=True)

    holds_up_to_n_max: bool
    best_D: float
    n_max: int
    trend: list[tuple[int, float]]
    decaying: bool
    witness: str | None = None


def _split_ratios(pi: FactorMap, n_max: int) -> t.Iterator[tuple[int, int, np.ndarray]]:
    """(L, n, ratio) for 2 <= L <= n_max and 1 <= n < L, ratio[i] = count(y) / (count(y_1..y_n) count(y_n+1..y_L)), y the i-th word of B_L(Y)."""
    Y = pi.codomain
    base = Y.alphabet_size
    counts = {L: preimage_counts(pi, L).astype(float) for L in range(1, n_max + 1)}
    codes = {L: Y.codes(L) for L in range(1, n_max + 1)}
    for L in range(2, n_max + 1):
        for n in range(1, L):
            scale = base ** (L - n)
            prefix = np.searchsorted(codes[n], codes[L] // scale)
            suffix = np.searchsorted(codes[L - n], codes[L] % scale)
            yield L, n, counts[L] / (counts[n][prefix] * counts[L - n][suffix])


def submultiplicativity_defect(pi: FactorMap, n_max: int) -> tuple[float, str | None]:
    """Largest split ratio up to n_max and where it occurs. Preimage counts are submultiplicative, so it never exceeds 1."""
    Y = pi.codomain
    worst, witness = 0.0, None
    for L, n, ratio in _split_ratios(pi, n_max):
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst, witness = float(ratio[i]), f"{Y.format(Y.words_array(L)[i])} split at {n}"
    return worst, witness


def condition_report(pi: FactorMap, n_max: int, floor: float = 0.0) -> report.Report:
    """
    Condition A as a report: series "trend" [L, D_L], the floor check per length and the submultiplicativity check.
    Finite evidence only, so the verdict is a trend verdict.
    """
    result = check_condition_A(pi, n_max, floor)
    r = report.Report(name=pi.name, operation="condition-a")
    series = r.add_series("trend", ["L", "D_L"])
    for L, d in result.trend:
        series.append(L, d)
        r.add_check(f"D_L > {floor}", L, d, floor, d > floor, None if d > floor else result.witness)
    r.add_check("ratio does not decay", n_max, result.trend[-1][1], result.best_D, not result.decaying)
    worst, witness = submultiplicativity_defect(pi, n_max)
    r.add_check("count(y) <= count(u) count(v)", n_max, worst, 1.0, worst <= 1.0 + 1e-12, None if worst <= 1.0 + 1e-12 else witness)
    r.constants.update(best_D=result.best_D, floor=floor)
    r.conclude(trend=True)
    return r


def check_condition_A(pi: FactorMap, n_max: int, floor: float = 0.0) -> ConditionA:
    """
    best_D = min over y of length L <= n_max and splits L = n + m of count(y) / (count(y_1..y_n) count(y_n+1..y_L)).
    :param floor: D must stay above this for the condition to hold
    :return: ConditionA
    """
    check(n_max >= 2, f"n_max {n_max} < 2", DomainError)
    Y = pi.codomain
    trend: list[tuple[int, float]] = []
    best, witness = 1.0, None
    level_min, level_witness = np.inf, None
    for L, n, ratio in _split_ratios(pi, n_max):
        i = int(np.argmin(ratio))
        if ratio[i] < level_min:
            level_min, level_witness = float(ratio[i]), f"{Y.format(Y.words_array(L)[i])} split at {n}"
        if n < L - 1:
            continue
        trend.append((L, min(1.0, level_min)))
        if level_min < best:
            best, witness = level_min, level_witness
        level_min, level_witness = np.inf, None
    best = min(1.0, best)
    half = trend[max(0, len(trend) // 2 - 1)][1]
    decaying = len(trend) >= 3 and trend[-1][1] < half * (1 - 1e-9) and all(b[1] <= a[1] + 1e-12 for a, b in zip(trend, trend[1:]))
    holds = best > floor
    if decaying:
        logger.warning("%s: Condition A ratio decays with length, D_%d = %.4g", pi.name, n_max, trend[-1][1])
    return ConditionA(holds_up_to_n_max=holds, best_D=best, n_max=n_max, trend=trend, decaying=decaying, witness=witness)


def fiber_words(pi: FactorMap, y: sh.Point, n: int) -> np.ndarray:
    """
    x-words of length n whose cylinder meets π^{-1}(y) for an eventually periodic y, lexicographic. A word qualifies when
    the rest of y can be followed forever from the automaton state it leads to.
    """
    X = pi.domain
    automaton = X.automaton
    prefix, cycle = y.prefix, y.cycle
    states = range(len(automaton))

    def can_follow(state: int, b: int, allowed: set[int]) -> bool:
        return any(automaton.delta[state, a] in allowed for a in pi.fiber(b))

    # greatest fixed point over the cycle phases
    viable = [set(states) for _ in cycle]
    changed = True
    while changed:
        changed = False
        for j, b in enumerate(cycle):
            keep = {s for s in viable[j] if can_follow(s, b, viable[(j + 1) % len(cycle)])}
            if keep != viable[j]:
                viable[j], changed = keep, True
    ahead = [set() for _ in prefix] + [viable[0]]
    for i in range(len(prefix) - 1, -1, -1):
        ahead[i] = {s for s in states if can_follow(s, prefix[i], ahead[i + 1])}

    def viable_at(position: int) -> set[int]:
        return ahead[position] if position <= len(prefix) else viable[(position - len(prefix)) % len(cycle)]

    check(0 in viable_at(0), f"{y} has no preimage under {pi.name}", DomainError)
    rows, row_states = _preimage_rows(pi, y.take(n))
    keep = np.array([int(s) in viable_at(n) for s in row_states], dtype=bool)
    check(bool(keep.any()), f"empty fiber over {y} at level {n}", DomainError)
    return rows[keep]


def _reference_maps() -> list[FactorMap]:
    full3 = sh.build_full_shift(3, "abc")
    golden = sh.build_sft([[1, 1], [1, 0]])
    return [
        FactorMap(full3, sh.build_full_shift(2, "AB"), (0, 0, 1)),
        FactorMap(golden, sh.build_full_shift(1, "A"), (0, 0)),
        FactorMap(sh.build_sft([[1, 1, 0], [0, 1, 1], [1, 1, 1]], "abc"), sh.build_full_shift(2), (0, 0, 1)),
    ]


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    result = box.Box(maps=_reference_maps())
    result.f1, result.golden_constant, result.decaying = result.maps
    result.X, result.Y = result.f1.domain, result.f1.codomain
    return result


class Tests:
    def test_from_pairs(self, testcases):
        pi = FactorMap.from_pairs(testcases.X, testcases.Y, [("a", "A"), ("b", "A"), ("c", "B")])
        assert pi.symbol_map == (0, 0, 1)
        with pytest.raises(InvalidAlphabetError):
            FactorMap.from_pairs(testcases.X, testcases.Y, [("a", "A"), ("b", "A")])

    def test_not_onto(self, testcases):
        with pytest.raises(DomainError):
            FactorMap(testcases.X, testcases.Y, (0, 0, 0))

    def test_preimage_cylinders(self, testcases):
        f1, X, Y = testcases.f1, testcases.X, testcases.Y
        assert [X.format(w) for w in preimage_cylinders(f1, Y.parse("AB"))] == ["ac", "bc"]
        assert [X.format(w) for w in preimage_cylinders(f1, Y.parse("BB"))] == ["cc"]
        assert len(preimage_cylinders(testcases.golden_constant, (0, 0, 0))) == 5

    def test_inadmissible_y(self, testcases):
        with pytest.raises(DomainError):
            preimage_cylinders(testcases.f1, (0, 2))

    def test_preimage_count(self, testcases):
        f1, Y = testcases.f1, testcases.Y
        assert preimage_count(f1, Y.parse("AAB")) == 4
        for n in range(1, 13):
            assert preimage_count(f1, (1,) * n) == 1

    def test_full_shift_count_is_product(self, testcases):
        f1, Y = testcases.f1, testcases.Y
        r = f1.fiber_sizes
        for n in range(1, 11):
            words = Y.words_array(n)
            expected = np.prod(np.array(r)[words], axis=1)
            assert preimage_counts(f1, n).tolist() == expected.tolist()

    def test_counts_agree_with_enumeration(self, testcases):
        for pi in testcases.maps:
            for y in sh.words(pi.codomain, 4):
                assert preimage_count(pi, y) == len(preimage_cylinders(pi, y))

    def test_counts_partition_language(self, testcases):
        for pi in testcases.maps:
            for n in range(1, 9):
                assert int(preimage_counts(pi, n).sum()) == pi.domain.count(n)

    @given(data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_counts_submultiplicative(self, data):
        for pi in _reference_maps():
            n = data.draw(st.integers(1, 6))
            m = data.draw(st.integers(1, 6))
            words = pi.codomain.words_array(n + m)
            y = tuple(int(a) for a in words[data.draw(st.integers(0, len(words) - 1))])
            assert preimage_count(pi, y) <= preimage_count(pi, y[:n]) * preimage_count(pi, y[n:])

    def test_submultiplicative_exhaustive(self, testcases):
        for pi in testcases.maps:
            worst, _ = submultiplicativity_defect(pi, 12 if pi.domain.alphabet_size < 3 else 10)
            assert 0 < worst <= 1.0 + 1e-12

    def test_condition_report(self, testcases):
        r = condition_report(testcases.golden_constant, 8)
        assert r.verdict == "PASS-trend" and r.series["trend"].column("L") == list(range(2, 9))
        decaying = condition_report(testcases.decaying, 10)
        assert decaying.verdict == "FAIL-trend"
        assert [f.check for f in decaying.failures] == ["ratio does not decay"]

    def test_condition_a(self, testcases):
        assert check_condition_A(testcases.f1, 8).best_D == 1.0
        golden = check_condition_A(testcases.golden_constant, 8)
        X = testcases.golden_constant.domain
        expected = min(X.count(n + m) / (X.count(n) * X.count(m)) for n in range(1, 8) for m in range(1, 9 - n))
        assert golden.holds_up_to_n_max and np.isclose(golden.best_D, expected) and 0 < golden.best_D <= 1
        assert not golden.decaying

    def test_condition_a_decay(self, testcases):
        result = check_condition_A(testcases.decaying, 10)
        assert result.holds_up_to_n_max
        assert result.decaying
        assert check_condition_A(testcases.decaying, 10).best_D < check_condition_A(testcases.decaying, 4).best_D

    def test_fiber_words_full(self, testcases):
        y = sh.Point((), (0,))
        assert fiber_words(testcases.f1, y, 3).tolist() == [list(w) for w in preimage_cylinders(testcases.f1, (0, 0, 0))]

    def test_fiber_words_constrained(self, testcases):
        # under the decaying map, the x-word before a 1 must end in b
        pi = testcases.decaying
        y = sh.Point((0, 0), (1,))
        words = fiber_words(pi, y, 2)
        assert [pi.domain.format(w) for w in words] == ["ab", "bb"]
        assert len(preimage_cylinders(pi, (0, 0))) == 3


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
    Run all pytests in class Tests in this module. Keeps implementation and testcases together in a single file.
    :param *rest: additional arguments to pytest.main(), not actually used yet
    :return: 0 if all tests pass, >0 otherwise (whatever pytest.main() returns)
    """
    return pytest.main(["--verbose", *sys.argv[2:], __file__])


def main():
    return fire.Fire()


if __name__ == "__main__":
    main()

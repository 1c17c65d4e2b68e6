#!/usr/bin/env python
"""
Module `shift` represents one-sided subshifts over a finite alphabet: full shifts, one-step shifts of finite type (a 0/1
transition matrix) and sofic shifts (a labeled graph). It enumerates the language B_n(X), finds the specification gap,
picks canonical (lexicographically least, eventually periodic) points inside cylinders and recodes SFTs to higher blocks.

Words are tuples of symbol indices (`Word`); bulk results are numpy arrays with one word per row, always in lexicographic
order. Points are eventually periodic sequences `Point(prefix, cycle)`, read prefix·cycle·cycle·...

cli usage: `python -m gibbsmap.shift ${action}`, e.g. `python -m gibbsmap.shift count 01 sft "[[1,1],[1,0]]" 12`

python usage:
  from gibbsmap import shift
  golden = shift.build_sft([[1, 1], [1, 0]])
  shift.words(golden, 2)  # [(0, 0), (0, 1), (1, 0)]
  shift.canonical_point(golden, (0, 1))  # Point(01·(0)^∞)
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import enum
import string
import sys
import threading
import typing as t

import numpy as np
import networkx as nx
import fire
import box
import pytest
from hypothesis import given, settings, strategies as st

from gibbsmap import graph, util
from gibbsmap.checker import check, DomainError, DeadSymbolError, InvalidAlphabetError, UnsupportedError

type Word = tuple[int, ...]


class Kind(enum.Enum):
    """How the admissibility rule of a Subshift is given."""

    full = "full"
    sft = "sft"
    sofic = "sofic"


class Point:
    """
    An eventually periodic one-sided sequence prefix·cycle^∞. Stored normalized (primitive cycle, shortest prefix) so that
    equal sequences compare equal.
    """

    def __init__(self, prefix: t.Sequence[int], cycle: t.Sequence[int]) -> None:
        prefix, cycle = tuple(int(s) for s in prefix), tuple(int(s) for s in cycle)
        check(len(cycle) > 0, "a point needs a nonempty cycle", DomainError)
        for p in range(1, len(cycle) + 1):
            if len(cycle) % p == 0 and cycle[:p] * (len(cycle) // p) == cycle:
                cycle = cycle[:p]
                break
        while prefix and prefix[-1] == cycle[-1]:
            prefix, cycle = prefix[:-1], (cycle[-1],) + cycle[:-1]
        self.prefix = prefix
        self.cycle = cycle

    @staticmethod
    def make(prefix: t.Sequence[int] = (), cycle: t.Sequence[int] = (0,)) -> Point:
        return Point(prefix, cycle)

    def take(self, n: int) -> Word:
        """The first n symbols."""
        if n <= len(self.prefix):
            return self.prefix[:n]
        rest = n - len(self.prefix)
        repeats = -(-rest // len(self.cycle))
        return self.prefix + (self.cycle * repeats)[:rest]

    def shifted(self, k: int = 1) -> Point:
        """σ^k of this point."""
        if k <= len(self.prefix):
            return Point(self.prefix[k:], self.cycle)
        r = (k - len(self.prefix)) % len(self.cycle)
        return Point((), self.cycle[r:] + self.cycle[:r])

    def mapped(self, symbol_map: t.Sequence[int]) -> Point:
        """Symbol-wise image under a one-block map."""
        return Point(tuple(symbol_map[s] for s in self.prefix), tuple(symbol_map[s] for s in self.cycle))

    def format(self, shift: Subshift) -> str:
        """'A(B)' for A·B^∞, in the symbols of shift."""
        return f"{shift.format(self.prefix)}({shift.format(self.cycle)})"

    def __eq__(self, other):
        return isinstance(other, Point) and self.prefix == other.prefix and self.cycle == other.cycle

    def __hash__(self):
        return hash((self.prefix, self.cycle))

    def __repr__(self):
        return f"{self.__class__.__name__}({''.join(map(str, self.prefix))}·({''.join(map(str, self.cycle))})^∞)"


def default_symbols(k: int) -> tuple[str, ...]:
    """'0'..'9' for small alphabets, 's10', 's11', ... beyond that."""
    return tuple(string.digits[i] if k <= 10 else f"s{i}" for i in range(k))


class Subshift:
    """
    A one-sided subshift given by a labeled graph presentation. `kind` records where the presentation came from,
    `transition` keeps the 0/1 matrix of an SFT (all ones for a full shift).

    Instances are immutable; `language(n)` caches (words, automaton states) per level under a lock.
    """

    def __init__(
        self,
        symbols: t.Sequence[str],
        kind: Kind,
        presentation: nx.MultiDiGraph,
        transition: np.ndarray | None = None,
        name: str = "",
    ) -> None:
        self.symbols = tuple(str(s) for s in symbols)
        self.kind = kind
        self.presentation = presentation
        self.transition = None if transition is None else np.asarray(transition, dtype=np.int64)
        self.name = name or kind.value
        self.automaton = graph.SubsetAutomaton(presentation, len(self.symbols))
        self._levels: dict[int, tuple[np.ndarray, np.ndarray]] = {0: (np.zeros((1, 0), dtype=np.int16), np.zeros(1, dtype=np.int64))}
        self._lock = threading.Lock()
        self.conforms()

    @staticmethod
    def make(symbols: t.Sequence[str], kind: Kind, presentation: nx.MultiDiGraph, transition=None, name: str = "") -> Subshift:
        return Subshift(symbols, kind, presentation, transition, name)

    def conforms(self) -> Subshift:
        check(len(self.symbols) >= 1, "empty alphabet", InvalidAlphabetError)
        check(len(set(self.symbols)) == len(self.symbols), f"repeated symbols in {self.symbols}", InvalidAlphabetError)
        used = graph.labels(self.presentation)
        missing = [self.symbols[a] for a in range(len(self.symbols)) if a not in used]
        check(not missing, f"symbols {missing} label no edge of the presentation", DeadSymbolError)
        check(used <= set(range(len(self.symbols))), f"labels {sorted(used)} outside the alphabet", InvalidAlphabetError)
        return self

    @property
    def alphabet_size(self) -> int:
        return len(self.symbols)

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def language(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """
        B_n(X) as (words, states): words is an (|B_n|, n) array in lexicographic order, states the subset-automaton state
        each word leads to.
        """
        check(n >= 0, f"level {n} < 0", DomainError)
        with self._lock:
            if n not in self._levels:
                have = max(m for m in self._levels if m < n)
                words, states = self._levels[have]
                for m in range(have + 1, n + 1):
                    successors = self.automaton.delta[states]
                    rows, symbols = np.nonzero(successors >= 0)
                    words = np.hstack([words[rows], symbols[:, None].astype(np.int16)])
                    states = successors[rows, symbols]
                    self._levels[m] = (words, states)
                logger.debug("%s: |B_%d| = %d", self.name, n, len(words))
            return self._levels[n]

    def words_array(self, n: int) -> np.ndarray:
        return self.language(n)[0]

    def count(self, n: int) -> int:
        return int(len(self.language(n)[0]))

    def codes(self, n: int) -> np.ndarray:
        """Integer codes of B_n(X), increasing."""
        return util.encode(self.words_array(n), self.alphabet_size)

    def index(self, words: np.ndarray) -> np.ndarray:
        """Row positions of `words` inside words_array(n); every row must be admissible."""
        words = np.atleast_2d(np.asarray(words))
        n = words.shape[1]
        codes = self.codes(n)
        wanted = util.encode(words, self.alphabet_size)
        position = np.searchsorted(codes, wanted)
        check(bool(np.all(position < len(codes))) and bool(np.all(codes[np.minimum(position, len(codes) - 1)] == wanted)), "inadmissible word in lookup", DomainError)
        return position

    def is_admissible(self, word: t.Sequence[int]) -> bool:
        return all(0 <= a < self.alphabet_size for a in word) and self.automaton.walk(word) >= 0

    def require(self, word: t.Sequence[int]) -> Word:
        word = tuple(int(a) for a in word)
        check(self.is_admissible(word), f"{self.format(word)} is not in the language of {self.name}", DomainError)
        return word

    def extensions(self, word: t.Sequence[int], m: int) -> np.ndarray:
        """All continuations c of length m with word·c admissible, lexicographic, as an (N, m) array."""
        state = self.automaton.walk(word)
        check(state >= 0, f"{self.format(word)} is not in the language of {self.name}", DomainError)
        rows, states = np.zeros((1, 0), dtype=np.int16), np.array([state], dtype=np.int64)
        for _ in range(m):
            successors = self.automaton.delta[states]
            r, symbols = np.nonzero(successors >= 0)
            rows = np.hstack([rows[r], symbols[:, None].astype(np.int16)])
            states = successors[r, symbols]
        return rows

    def parse(self, text: str) -> Word:
        """'01' or 'a c' -> symbol indices."""
        tokens = list(text) if self.single_char and " " not in text else text.split()
        lookup = {s: i for i, s in enumerate(self.symbols)}
        missing = [tok for tok in tokens if tok not in lookup]
        check(not missing, f"unknown symbols {missing} for alphabet {self.symbols}", DomainError)
        return tuple(lookup[tok] for tok in tokens)

    def format(self, word: t.Iterable[int]) -> str:
        glue = "" if self.single_char else " "
        return glue.join(self.symbols[int(a)] for a in word)

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r}, kind={self.kind.value}, symbols={self.symbols})"


def build_full_shift(k: int, symbols: t.Sequence[str] | None = None, name: str = "") -> Subshift:
    """The full shift on k symbols."""
    check(k >= 1, f"alphabet size {k} < 1", InvalidAlphabetError)
    symbols = tuple(symbols) if symbols else default_symbols(k)
    check(len(symbols) == k, f"{len(symbols)} symbols for alphabet size {k}", InvalidAlphabetError)
    return Subshift(symbols, Kind.full, graph.full(k), np.ones((k, k), dtype=np.int64), name or f"full{k}")


def build_sft(transition: t.Sequence[t.Sequence[int]] | np.ndarray, symbols: t.Sequence[str] | None = None, name: str = "") -> Subshift:
    """The one-step SFT of a square 0/1 matrix without zero rows or columns."""
    T = np.asarray(transition, dtype=np.int64)
    presentation = graph.from_transition(T)
    symbols = tuple(symbols) if symbols else default_symbols(T.shape[0])
    check(len(symbols) == T.shape[0], f"{len(symbols)} symbols for a {T.shape[0]}x{T.shape[0]} matrix", InvalidAlphabetError)
    return Subshift(symbols, Kind.sft, presentation, T, name or "sft")


def build_sofic(
    symbols: t.Sequence[str], states: t.Sequence[t.Hashable], edges: t.Iterable[tuple[t.Hashable, t.Hashable, int | str]], name: str = ""
) -> Subshift:
    """
    The sofic shift presented by a labeled graph.
    :param symbols: alphabet
    :param states: graph vertices
    :param edges: (source, target, label) with label a symbol or its index
    """
    lookup = {s: i for i, s in enumerate(symbols)}
    indexed = []
    for source, target, label in edges:
        if isinstance(label, str):
            check(label in lookup, f"edge label {label!r} not in alphabet {tuple(symbols)}", InvalidAlphabetError)
            label = lookup[label]
        indexed.append((source, target, int(label)))
    return Subshift(symbols, Kind.sofic, graph.from_edges(states, indexed), None, name or "sofic")


def words(shift: Subshift, n: int) -> list[Word]:
    """B_n(X) in lexicographic order."""
    check(n >= 1, f"level {n} < 1", DomainError)
    return [tuple(int(a) for a in row) for row in shift.words_array(n)]


def count_by_matrix_power(shift: Subshift, n: int) -> int:
    """Σ of the entries of T^(n-1); only meaningful for full shifts and SFTs."""
    check(shift.transition is not None, f"{shift.name} has no transition matrix", UnsupportedError)
    return int(np.linalg.matrix_power(shift.transition.astype(object), n - 1).sum())


def specification_gap(shift: Subshift, max_gap: int, word_length: int = 4) -> int | None:
    """
    Least p <= max_gap such that every ordered pair u, v of words of length `word_length` has a bridge w of length p with
    uwv admissible. Shorter words are covered since every word is a suffix (and a prefix) of a word of full length.
    :return: p, or None when no p <= max_gap works
    """
    check(max_gap >= 0, f"max_gap {max_gap} < 0", DomainError)
    automaton = shift.automaton
    v_words = shift.words_array(word_length)
    u_states = np.unique(shift.language(word_length)[1])

    def readable(state: int) -> np.ndarray:
        states = np.full(len(v_words), state, dtype=np.int64)
        for column in range(word_length):
            states = automaton.step(states, v_words[:, column])
        return states >= 0

    cache: dict[int, np.ndarray] = {}
    for p in range(max_gap + 1):
        bridged = True
        for s in u_states:
            reach = np.zeros(len(v_words), dtype=bool)
            for r in automaton.reachable(int(s), p):
                if r not in cache:
                    cache[r] = readable(r)
                reach |= cache[r]
            if not reach.all():
                bridged = False
                break
        if bridged:
            logger.debug("%s: specification gap %d", shift.name, p)
            return p
    return None


def canonical_tail(shift: Subshift, word: t.Sequence[int]) -> Point:
    """The lexicographically least admissible continuation of `word`, as an eventually periodic point."""
    state = shift.automaton.walk(shift.require(word))
    seen: dict[int, int] = {}
    symbols: list[int] = []
    while state not in seen:
        seen[state] = len(symbols)
        a = int(shift.automaton.least[state])
        symbols.append(a)
        state = int(shift.automaton.delta[state, a])
    start = seen[state]
    return Point(symbols[:start], symbols[start:])


def canonical_point(shift: Subshift, word: t.Sequence[int]) -> Point:
    """The canonical representative of the cylinder [word]: word followed by its canonical tail."""
    tail = canonical_tail(shift, word)
    return Point(tuple(word) + tail.prefix, tail.cycle)


def canonical_points(shift: Subshift, n: int, extra: int) -> np.ndarray:
    """Every word of B_n followed by the first `extra` symbols of its canonical tail, shape (|B_n|, n + extra)."""
    words_n, states = shift.language(n)
    columns = [words_n.astype(np.int64)]
    for _ in range(extra):
        a = shift.automaton.least[states]
        columns.append(a[:, None])
        states = shift.automaton.delta[states, a]
    return np.hstack(columns)


def is_irreducible(shift: Subshift) -> bool:
    """Strong connectivity of the presentation: exact for SFTs, sufficient for sofic shifts."""
    return graph.is_irreducible(shift.presentation)


def is_aperiodic(shift: Subshift) -> bool:
    return graph.is_aperiodic(shift.presentation)


def higher_block(shift: Subshift, k: int) -> tuple[Subshift, tuple[int, ...]]:
    """
    Recode a full shift or one-step SFT to its k-block presentation.
    :return: (the SFT on B_k(X), first-symbol map from blocks back to X's alphabet)
    """
    check(shift.transition is not None, f"{shift.name}: higher-block recoding needs a one-step SFT", UnsupportedError)
    check(k >= 1, f"block length {k} < 1", DomainError)
    blocks = shift.words_array(k)
    longer = shift.words_array(k + 1)
    T = np.zeros((len(blocks), len(blocks)), dtype=np.int64)
    T[shift.index(longer[:, :k]), shift.index(longer[:, 1:])] = 1
    glue = "" if shift.single_char else "."
    symbols = tuple(glue.join(shift.symbols[a] for a in block) for block in blocks)
    recoded = Subshift(symbols, Kind.sft, graph.from_transition(T), T, f"{shift.name}[{k}]")
    return recoded, tuple(int(a) for a in blocks[:, 0])


def _reference_shifts() -> list[Subshift]:
    return [
        build_full_shift(3),
        build_sft([[1, 1], [1, 0]]),
        build_sft([[1, 1, 0], [0, 0, 1], [1, 0, 1]]),
        build_sofic(("0", "1"), ("p", "q"), [("p", "p", "0"), ("p", "q", "1"), ("q", "p", "1")], name="even"),
    ]


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return box.Box(
        full3=build_full_shift(3, "abc"),
        full2=build_full_shift(2),
        golden=build_sft([[1, 1], [1, 0]]),
        identity=build_sft([[1, 0], [0, 1]]),
        ones3=build_sft(np.ones((3, 3), dtype=int)),
        even=build_sofic(("0", "1"), ("p", "q"), [("p", "p", "0"), ("p", "q", "1"), ("q", "p", "1")], name="even"),
        reference=_reference_shifts(),
    )


class Tests:
    def test_full_shift_counts(self, testcases):
        assert build_full_shift(3).count(2) == 9
        assert build_full_shift(1).count(5) == 1
        assert build_full_shift(2).count(10) == 1024

    def test_invalid_alphabet(self, testcases):
        with pytest.raises(InvalidAlphabetError):
            build_full_shift(0)

    def test_sft_counts(self, testcases):
        assert testcases.golden.count(4) == 8
        assert testcases.identity.count(3) == 2
        assert testcases.ones3.count(2) == 9

    def test_dead_symbol(self, testcases):
        with pytest.raises(DeadSymbolError):
            build_sft([[1, 1], [0, 0]])
        with pytest.raises(DeadSymbolError):
            build_sft([[1, 0], [1, 0]])

    def test_words(self, testcases):
        assert [testcases.full3.format(w) for w in words(testcases.full3, 1)] == ["a", "b", "c"]
        assert words(testcases.golden, 2) == [(0, 0), (0, 1), (1, 0)]
        assert len(words(testcases.golden, 3)) == 5

    def test_words_sorted_unique(self, testcases):
        for shift in testcases.reference:
            codes = shift.codes(7)
            assert np.all(np.diff(codes) > 0)
            assert all(shift.is_admissible(w) for w in shift.words_array(7)[:50])

    def test_matrix_power_counts(self, testcases):
        for shift in testcases.reference[:3]:
            for n in range(1, 11):
                assert shift.count(n) == count_by_matrix_power(shift, n)

    @given(n=st.integers(1, 6), m=st.integers(1, 6))
    @settings(max_examples=25, deadline=None)
    def test_submultiplicative(self, n, m):
        for shift in _reference_shifts():
            assert shift.count(n + m) <= shift.count(n) * shift.count(m)

    def test_first_level_is_alphabet(self, testcases):
        for shift in testcases.reference:
            assert shift.count(1) == shift.alphabet_size

    def test_specification_gap(self, testcases):
        assert specification_gap(testcases.full3, 3) == 0
        assert specification_gap(testcases.golden, 3) == 1
        assert specification_gap(testcases.identity, 6) is None
        assert specification_gap(testcases.even, 4) is not None

    def test_gap_implies_irreducible(self, testcases):
        for shift in testcases.reference + [testcases.identity]:
            if specification_gap(shift, 4) is not None:
                assert is_irreducible(shift)

    def test_canonical_tail(self, testcases):
        assert canonical_tail(testcases.full2, (1,)) == Point((), (0,))
        assert canonical_point(testcases.golden, (0, 1)) == Point((0, 1), (0,))
        assert canonical_point(testcases.golden, (1,)) == Point((1,), (0,))
        assert canonical_tail(testcases.identity, (1, 1)) == Point((), (1,))

    def test_canonical_points_agree(self, testcases):
        rows = canonical_points(testcases.golden, 3, 4)
        for row, word in zip(rows, words(testcases.golden, 3)):
            assert tuple(row) == canonical_point(testcases.golden, word).take(7)

    def test_point_normalizes(self, testcases):
        assert Point((0, 1, 0), (1, 0)) == Point((0,), (1, 0))
        assert Point((), (0, 0)) == Point((), (0,))
        assert Point((1,), (0,)).shifted(1) == Point((), (0,))
        assert Point((), (0, 1)).shifted(3) == Point((), (1, 0))
        assert Point((2,), (0, 1)).take(6) == (2, 0, 1, 0, 1, 0)
        assert Point((0, 2), (1,)).mapped((0, 0, 1)) == Point((0, 1), (0,))

    def test_inadmissible(self, testcases):
        with pytest.raises(DomainError):
            canonical_tail(testcases.golden, (1, 1))

    def test_parse_format(self, testcases):
        assert testcases.full3.parse("abc") == (0, 1, 2)
        assert testcases.full3.format((2, 0)) == "ca"
        with pytest.raises(DomainError):
            testcases.full3.parse("abz")

    def test_sofic_even_shift(self, testcases):
        even = testcases.even
        assert even.is_admissible((0, 1, 1, 0)) and not even.is_admissible((0, 1, 0))
        assert [even.count(n) for n in range(1, 6)] == [2, 4, 7, 12, 20]

    def test_higher_block(self, testcases):
        recoded, first = higher_block(testcases.golden, 2)
        assert recoded.symbols == ("00", "01", "10")
        assert first == (0, 0, 1)
        for n in range(1, 8):
            assert recoded.count(n) == testcases.golden.count(n + 1)

    def test_higher_block_needs_sft(self, testcases):
        with pytest.raises(UnsupportedError):
            higher_block(testcases.even, 2)

    def test_extensions(self, testcases):
        assert testcases.golden.extensions((1,), 2).tolist() == [[0, 0], [0, 1]]


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


def count(symbols: str, kind: str = "full", transition: list | None = None, n: int = 8) -> int:
    """
    |B_n| of a full shift or SFT from the command line.
    :param symbols: alphabet as a string of single-character symbols
    :param kind: full or sft
    :param transition: 0/1 matrix for kind sft
    :param n: level
    :return: int
    """
    subshift = build_full_shift(len(symbols), symbols) if kind == "full" else build_sft(transition, symbols)
    return subshift.count(n)


def main():
    return fire.Fire()


if __name__ == "__main__":
    main()

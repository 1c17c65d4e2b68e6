"""
Module `graph` does the discrete math under every subshift: labeled graph presentations and the deterministic subset
automaton that decides admissibility.

A presentation is a networkx.MultiDiGraph whose edges carry a `label` attribute, the index of an alphabet symbol. A word is
admissible when some path spells it. Full shifts are one vertex with a loop per symbol; a one-step SFT with transition matrix
T is the graph on the symbols with an edge i -> j labeled j whenever T[i, j] = 1; sofic shifts bring their own graph. The
subset automaton tracks the set of vertices a word can end in, so its states are deterministic even when the presentation
is not right-resolving.

Presentations must be essential (no stranded vertex), otherwise words would exist that cannot be continued.

cli usage: `python -m gibbsmap.graph ${action}`

python usage:
  from gibbsmap import graph
  G = graph.from_transition([[1, 1], [1, 0]])
  automaton = graph.SubsetAutomaton(G, 2)
  automaton.walk((0, 1, 0))  # a state id >= 0, or -1 when the word is forbidden
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import sys
import collections
import typing as t

import numpy as np
import networkx as nx
import pytest
import box
import fire

from gibbsmap.checker import check, DeadSymbolError, InvalidAlphabetError


def full(k: int) -> nx.MultiDiGraph:
    """One vertex, one loop per symbol."""
    check(k >= 1, f"alphabet size {k} < 1", InvalidAlphabetError)
    G = nx.MultiDiGraph()
    G.add_node(0)
    for a in range(k):
        G.add_edge(0, 0, label=a)
    return G


def from_transition(transition: t.Sequence[t.Sequence[int]] | np.ndarray) -> nx.MultiDiGraph:
    """
    The vertex-shift presentation of a one-step SFT: vertices are symbols, i -> j labeled j when transition[i][j] == 1.
    :param transition: square 0/1 matrix
    :return: MultiDiGraph
    """
    T = np.asarray(transition)
    check(T.ndim == 2 and T.shape[0] == T.shape[1] and T.shape[0] >= 1, f"transition matrix shape {T.shape} is not square", InvalidAlphabetError)
    check(np.isin(T, (0, 1)).all(), "transition matrix entries must be 0 or 1", InvalidAlphabetError)
    dead_rows = np.flatnonzero(T.sum(axis=1) == 0).tolist()
    dead_columns = np.flatnonzero(T.sum(axis=0) == 0).tolist()
    check(not dead_rows and not dead_columns, f"dead symbols: rows {dead_rows} columns {dead_columns}", DeadSymbolError)
    G = nx.MultiDiGraph()
    G.add_nodes_from(range(T.shape[0]))
    for i, j in zip(*np.nonzero(T)):
        G.add_edge(int(i), int(j), label=int(j))
    return G


def from_edges(states: t.Iterable[t.Hashable], edges: t.Iterable[tuple[t.Hashable, t.Hashable, int]]) -> nx.MultiDiGraph:
    """A labeled graph from (source, target, symbol index) triples."""
    G = nx.MultiDiGraph()
    G.add_nodes_from(states)
    for source, target, label in edges:
        check(source in G and target in G, f"edge {source}->{target} names an unknown state", DeadSymbolError)
        G.add_edge(source, target, label=int(label))
    return G


def labels(G: nx.MultiDiGraph) -> set[int]:
    return {label for (_, _, label) in G.edges(data="label")}


def stranded(G: nx.MultiDiGraph) -> list[t.Hashable]:
    """Vertices without an incoming or without an outgoing edge."""
    return [q for q in G if G.in_degree(q) == 0 or G.out_degree(q) == 0]


def is_essential(G: nx.MultiDiGraph) -> bool:
    return not stranded(G)


def is_right_resolving(G: nx.MultiDiGraph) -> bool:
    """At most one outgoing edge per label at every vertex."""
    for q in G:
        out = [label for (_, _, label) in G.out_edges(q, data="label")]
        if len(out) != len(set(out)):
            return False
    return True


def is_irreducible(G: nx.MultiDiGraph) -> bool:
    return nx.is_strongly_connected(G)


def is_aperiodic(G: nx.MultiDiGraph) -> bool:
    return is_irreducible(G) and nx.is_aperiodic(nx.DiGraph(G))


class SubsetAutomaton:
    """
    The subset construction of a labeled graph restricted to the states reachable from "all vertices".
    State 0 is the start (the empty word); `delta[s, a]` is the successor state or -1.
    """

    def __init__(self, G: nx.MultiDiGraph, alphabet_size: int) -> None:
        check(is_essential(G), f"stranded presentation states {stranded(G)}", DeadSymbolError)
        self.alphabet_size = alphabet_size
        start = frozenset(G.nodes)
        self.states: list[frozenset] = [start]
        index = {start: 0}
        rows: list[list[int]] = []
        queue = collections.deque([start])
        while queue:
            current = queue.popleft()
            row = []
            for a in range(alphabet_size):
                follower = frozenset(v for (_, v, label) in G.out_edges(current, data="label") if label == a)
                if not follower:
                    row.append(-1)
                    continue
                if follower not in index:
                    index[follower] = len(self.states)
                    self.states.append(follower)
                    queue.append(follower)
                row.append(index[follower])
            rows.append(row)
        self.delta = np.array(rows, dtype=np.int64).reshape(len(self.states), alphabet_size)
        # every nonempty vertex set of an essential graph has a successor
        self.least = np.array([int(np.flatnonzero(row >= 0)[0]) for row in self.delta], dtype=np.int64)
        logger.debug("subset automaton: %d states over %d symbols", len(self.states), alphabet_size)

    def walk(self, word: t.Iterable[int], state: int = 0) -> int:
        """State reached by reading `word` from `state`, -1 when the word is forbidden there."""
        for a in word:
            if state < 0:
                return -1
            state = int(self.delta[state, a])
        return state

    def step(self, states: np.ndarray, symbols: np.ndarray) -> np.ndarray:
        """Vectorized delta, -1 stays -1."""
        states = np.asarray(states)
        result = np.full(states.shape, -1, dtype=np.int64)
        alive = states >= 0
        result[alive] = self.delta[states[alive], np.asarray(symbols)[alive]]
        return result

    def reachable(self, state: int, steps: int) -> set[int]:
        """States reachable from `state` by exactly `steps` symbols."""
        frontier = {state}
        for _ in range(steps):
            frontier = {int(s) for q in frontier for s in self.delta[q] if s >= 0}
        return frontier

    def graph(self) -> nx.MultiDiGraph:
        """The deterministic (subset) presentation as a networkx graph on state ids."""
        S = nx.MultiDiGraph()
        S.add_nodes_from(range(len(self.states)))
        for s, row in enumerate(self.delta):
            for a, target in enumerate(row):
                if target >= 0:
                    S.add_edge(s, int(target), label=a)
        return S

    def __len__(self) -> int:
        return len(self.states)

    def __repr__(self):
        return f"{self.__class__.__name__}(states={len(self.states)}, alphabet_size={self.alphabet_size})"


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    result = box.Box(
        golden=from_transition([[1, 1], [1, 0]]),
        identity=from_transition([[1, 0], [0, 1]]),
        full3=full(3),
        # even shift: even runs of 1 between 0s, not right-resolving on purpose
        even=from_edges(["p", "q", "r"], [("p", "p", 0), ("p", "q", 1), ("q", "p", 1), ("p", "r", 1), ("r", "p", 1)]),
    )
    return result


class Tests:
    def test_full_shift_automaton(self, testcases):
        automaton = SubsetAutomaton(testcases.full3, 3)
        assert len(automaton) == 1
        assert automaton.walk((2, 1, 0, 0)) == 0

    def test_golden_mean_forbids_11(self, testcases):
        automaton = SubsetAutomaton(testcases.golden, 2)
        assert automaton.walk((0, 1, 0)) >= 0
        assert automaton.walk((0, 1, 1)) == -1
        assert automaton.least[automaton.walk((1,))] == 0

    def test_dead_symbol(self, testcases):
        with pytest.raises(DeadSymbolError):
            from_transition([[1, 0], [0, 0]])

    def test_not_square(self, testcases):
        with pytest.raises(InvalidAlphabetError):
            from_transition([[1, 1]])

    def test_irreducible_aperiodic(self, testcases):
        assert is_irreducible(testcases.golden) and is_aperiodic(testcases.golden)
        assert not is_irreducible(testcases.identity)
        flip = from_transition([[0, 1], [1, 0]])
        assert is_irreducible(flip) and not is_aperiodic(flip)

    def test_subset_construction_resolves(self, testcases):
        assert not is_right_resolving(testcases.even)
        automaton = SubsetAutomaton(testcases.even, 2)
        assert is_right_resolving(automaton.graph())
        assert automaton.walk((0, 1, 1, 0)) >= 0
        assert automaton.walk((0, 1, 0)) == -1

    def test_stranded(self, testcases):
        G = from_edges([0, 1], [(0, 0, 0), (0, 1, 1)])
        assert stranded(G) == [1]
        with pytest.raises(DeadSymbolError):
            SubsetAutomaton(G, 2)

    def test_reachable(self, testcases):
        automaton = SubsetAutomaton(testcases.golden, 2)
        after_one = automaton.walk((1,))
        assert automaton.reachable(after_one, 0) == {after_one}
        assert automaton.reachable(after_one, 1) == {automaton.walk((0,))}


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

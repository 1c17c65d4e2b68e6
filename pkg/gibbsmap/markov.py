#!/usr/bin/env python
"""
Module `markov` holds stationary Markov measures on subshifts and the weighted transfer matrices of additive potentials.

A `MarkovMeasure` walks a finite chain whose states carry a label, the symbol the state emits. Order-q Markov measures on
an SFT use the words of B_q as states and emit their first symbol, so paths and sequences correspond one to one. Pushing a
measure through a one-block factor map only relabels the states, which gives a hidden Markov measure of the same type.
Cylinder probabilities use the scaled forward recursion, accumulated in log-space.

python usage:
  from gibbsmap import shift, markov
  X = shift.build_full_shift(3, "abc")
  mu = markov.MarkovMeasure.bernoulli(X, [1/6, 2/6, 3/6])
  mu.log_prob((1, 2))  # log(1/6)
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import math
import sys
import typing as t

import numpy as np
import scipy.linalg
import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap import codes, potential
from gibbsmap.checker import check, DomainError, UnsupportedError


def transfer_matrix(shift: sh.Subshift, form: potential.SingleFunction, order: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """
    The weighted transition matrix of an additive potential on states B_q, q = max(order, window - 1, 1).
    :return: (states as an (S, q) word array, log-weights with -inf on forbidden transitions)
    """
    check(shift.kind is not sh.Kind.sofic, f"{shift.name}: transfer matrices need a one-step SFT", UnsupportedError)
    q = max(order, form.window - 1, 1)
    states = shift.words_array(q)
    longer = shift.words_array(q + 1).astype(np.int64)
    log_weights = np.full((len(states), len(states)), -np.inf)
    log_weights[shift.index(longer[:, :q]), shift.index(longer[:, 1:])] = form.window_values(longer, 0)
    return states, log_weights


def perron(log_weights: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """
    Perron data of exp(log_weights) by scipy.linalg.eig.
    :return: (log λ, left vector, right vector), vectors positive with l·r = 1
    """
    shift_by = float(np.max(log_weights[np.isfinite(log_weights)]))
    L = np.exp(log_weights - shift_by)
    values, left, right = scipy.linalg.eig(L, left=True, right=True)
    i = int(np.argmax(values.real))
    lam = float(values[i].real)
    check(lam > 0, "no positive Perron eigenvalue", UnsupportedError)
    l, r = np.abs(left[:, i].real), np.abs(right[:, i].real)
    r = r / r.sum()
    l = l / (l @ r)
    return math.log(lam) + shift_by, l, r


def power_iteration(log_weights: np.ndarray, steps: int = 2000, seed: int = 0, tolerance: float = 1e-14) -> tuple[float, np.ndarray]:
    """log λ and the right vector by power iteration from a seeded random positive start."""
    shift_by = float(np.max(log_weights[np.isfinite(log_weights)]))
    L = np.exp(log_weights - shift_by)
    r = np.random.default_rng(seed).uniform(0.5, 1.5, len(L))
    growth = 0.0
    for _ in range(steps):
        following = L @ r
        growth = float(following.sum() / r.sum())
        following /= following.sum()
        if np.max(np.abs(following - r)) < tolerance:
            r = following
            break
        r = following
    return math.log(growth) + shift_by, r


class MarkovMeasure:
    """
    A stationary Markov chain with labeled states, seen as a measure on sequences over `shift`'s alphabet.
    `hidden` is set when several state paths may emit the same word (images under factor maps).
    """

    def __init__(
        self,
        shift: sh.Subshift,
        states: t.Sequence[str],
        labels: t.Sequence[int],
        initial: np.ndarray,
        transition: np.ndarray,
        order: int = 1,
        hidden: bool = False,
    ) -> None:
        self.shift = shift
        self.states = tuple(states)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.initial = np.asarray(initial, dtype=float)
        self.transition = np.asarray(transition, dtype=float)
        self.order = order
        self.hidden = hidden
        self._emit = (self.labels[:, None] == np.arange(shift.alphabet_size)[None, :]).astype(float)
        self.conforms()

    def conforms(self, tolerance: float = 1e-9) -> MarkovMeasure:
        S = len(self.states)
        check(self.transition.shape == (S, S) and self.initial.shape == (S,), f"chain shapes {self.transition.shape}, {self.initial.shape} for {S} states", DomainError)
        check(bool(np.all(self.transition >= 0)) and np.allclose(self.transition.sum(axis=1), 1, atol=tolerance), "rows must be probability vectors", DomainError)
        check(abs(self.initial.sum() - 1) <= tolerance, "initial distribution must sum to 1", DomainError)
        check(np.allclose(self.initial @ self.transition, self.initial, atol=tolerance), "initial distribution is not stationary", DomainError)
        return self

    @staticmethod
    def make(shift: sh.Subshift, states, labels, initial, transition, order: int = 1, hidden: bool = False) -> MarkovMeasure:
        return MarkovMeasure(shift, states, labels, initial, transition, order, hidden)

    @staticmethod
    def stationary(transition: np.ndarray) -> np.ndarray:
        """The left fixed vector of an irreducible stochastic matrix."""
        values, vectors = scipy.linalg.eig(transition.T)
        v = np.abs(vectors[:, int(np.argmin(np.abs(values - 1)))].real)
        return v / v.sum()

    @staticmethod
    def bernoulli(shift: sh.Subshift, weights: t.Sequence[float]) -> MarkovMeasure:
        """Product measure on a full shift, weights normalized."""
        check(shift.kind is sh.Kind.full, f"{shift.name}: Bernoulli measures live on full shifts", UnsupportedError)
        q = np.asarray(weights, dtype=float)
        check(q.shape == (shift.alphabet_size,) and bool(np.all(q >= 0)) and q.sum() > 0, f"bad Bernoulli weights {weights}", DomainError)
        q = q / q.sum()
        return MarkovMeasure(shift, shift.symbols, range(shift.alphabet_size), q, np.tile(q, (len(q), 1)), order=0)

    @staticmethod
    def from_eigendata(shift: sh.Subshift, states: np.ndarray, log_weights: np.ndarray, log_lambda: float, left: np.ndarray, right: np.ndarray, order: int = 1) -> MarkovMeasure:
        """P_ij = L_ij r_j / (λ r_i), stationary vector ∝ l ⊙ r."""
        with np.errstate(under="ignore"):
            P = np.exp(log_weights - log_lambda) * right[None, :] / right[:, None]
        P = P / P.sum(axis=1, keepdims=True)
        initial = left * right / (left @ right)
        names = [shift.format(s) for s in states]
        return MarkovMeasure(shift, names, np.asarray(states)[:, 0], initial, P, order)

    def log_probs(self, words: np.ndarray) -> np.ndarray:
        """log μ[w] for every row of `words`; -inf where the word has measure zero."""
        words = np.atleast_2d(np.asarray(words, dtype=np.int64))
        alpha = np.tile(self.initial, (len(words), 1))
        total = np.zeros(len(words))
        for column in range(words.shape[1]):
            if column > 0:
                alpha = alpha @ self.transition
            alpha = alpha * self._emit[:, words[:, column]].T
            scale = alpha.sum(axis=1)
            alive = scale > 0
            with np.errstate(divide="ignore"):
                total += np.log(scale)
            alpha[alive] /= scale[alive, None]
        return total

    def log_prob(self, word: t.Sequence[int]) -> float:
        return float(self.log_probs(np.array([tuple(word)]))[0]) if len(word) else 0.0

    def log_joint(self, u: t.Sequence[int], v: t.Sequence[int], t_shift: int) -> float:
        """log μ([u] ∩ σ^{-t}[v]) for t >= |u| >= 1, without enumerating the gap."""
        check(len(u) >= 1 and len(v) >= 1 and t_shift >= len(u), f"t = {t_shift} overlaps u of length {len(u)}", DomainError)
        alpha = self.initial * self._emit[:, u[0]]
        total = 0.0
        steps = [(1, a) for a in u[1:]] + [(t_shift - len(u) + 1, v[0])] + [(1, a) for a in v[1:]]
        for power, a in steps:
            scale = alpha.sum()
            if scale <= 0:
                return -math.inf
            total += math.log(scale)
            alpha = (alpha / scale) @ np.linalg.matrix_power(self.transition, power) * self._emit[:, a]
        scale = alpha.sum()
        return total + math.log(scale) if scale > 0 else -math.inf

    def distribution(self, n: int) -> np.ndarray:
        """μ[w] for w in shift.words_array(n)."""
        return np.exp(self.log_probs(self.shift.words_array(n)))

    def image(self, factor: codes.FactorMap) -> MarkovMeasure:
        """The pushforward under a one-block map: same chain, relabeled states."""
        check(factor.domain is self.shift, f"{factor.name} does not start at {self.shift.name}", DomainError)
        return MarkovMeasure(factor.codomain, self.states, factor.lookup[self.labels], self.initial, self.transition, self.order, hidden=True)

    def __repr__(self):
        return f"{self.__class__.__name__}(shift={self.shift.name!r}, states={len(self.states)}, order={self.order}, hidden={self.hidden})"


def block_entropy(measure: MarkovMeasure, n: int) -> float:
    p = measure.distribution(n)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def entropy(measure: MarkovMeasure, n: int = 10) -> float:
    """Entropy rate; exact for visible chains, H_n - H_{n-1} (an upper bound) for hidden ones."""
    if measure.hidden:
        return block_entropy(measure, n) - block_entropy(measure, n - 1)
    P = measure.transition
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(P), 0.0)
    return float(-(measure.initial @ terms.sum(axis=1)))


def energy(measure: MarkovMeasure, form: potential.SingleFunction) -> float:
    """∫ f dμ for a window-k single function, from the cylinder masses of B_k."""
    check(form.shift is measure.shift, f"{form.name} and the measure live on different shifts", DomainError)
    return float(measure.distribution(form.window) @ form.values)


def free_energy(measure: MarkovMeasure, form: potential.SingleFunction) -> float:
    return entropy(measure) + energy(measure, form)


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    result = box.Box()
    result.X = sh.build_full_shift(3, "abc")
    result.golden = sh.build_sft([[1, 1], [1, 0]])
    result.F2 = potential.from_weights(result.X, [1, 2, 3])
    result.zero_golden = potential.zero(result.golden)
    result.bernoulli = MarkovMeasure.bernoulli(result.X, [1, 2, 3])
    return result


class Tests:
    def test_bernoulli_cylinders(self, testcases):
        mu = testcases.bernoulli
        assert np.isclose(mu.log_prob((1, 2)), math.log(1 / 6))
        assert np.isclose(mu.distribution(3).sum(), 1.0)

    def test_perron_rank_one(self, testcases):
        states, log_weights = transfer_matrix(testcases.X, testcases.F2)
        log_lambda, left, right = perron(log_weights)
        assert np.isclose(log_lambda, math.log(6))
        mu = MarkovMeasure.from_eigendata(testcases.X, states, log_weights, log_lambda, left, right)
        assert np.allclose(mu.distribution(1), [1 / 6, 2 / 6, 3 / 6])

    def test_power_iteration_agrees(self, testcases):
        _, log_weights = transfer_matrix(testcases.golden, testcases.zero_golden)
        log_lambda, _ = power_iteration(log_weights)
        assert abs(log_lambda - math.log((1 + math.sqrt(5)) / 2)) < 1e-12

    def test_parry(self, testcases):
        states, log_weights = transfer_matrix(testcases.golden, testcases.zero_golden)
        mu = MarkovMeasure.from_eigendata(testcases.golden, states, log_weights, *perron(log_weights))
        golden_ratio = (1 + math.sqrt(5)) / 2
        assert mu.log_prob((1, 1)) == -np.inf
        assert np.isclose(entropy(mu), math.log(golden_ratio))
        assert np.isclose(mu.distribution(1)[0], golden_ratio**2 / (1 + golden_ratio**2))

    def test_free_energy_is_pressure(self, testcases):
        states, log_weights = transfer_matrix(testcases.X, testcases.F2)
        mu = MarkovMeasure.from_eigendata(testcases.X, states, log_weights, *perron(log_weights))
        assert np.isclose(free_energy(mu, testcases.F2), math.log(6))

    def test_hidden_image(self, testcases):
        factor = codes.FactorMap(testcases.X, sh.build_full_shift(2, "AB"), (0, 0, 1))
        image = testcases.bernoulli.image(factor)
        assert image.hidden
        assert np.allclose(image.distribution(2), [0.25, 0.25, 0.25, 0.25])
        assert np.isclose(entropy(image, 6), math.log(2))

    def test_joint_matches_enumeration(self, testcases):
        states, log_weights = transfer_matrix(testcases.golden, testcases.zero_golden)
        mu = MarkovMeasure.from_eigendata(testcases.golden, states, log_weights, *perron(log_weights))
        words = testcases.golden.words_array(6)
        hits = (words[:, 0] == 0) & (words[:, 4] == 1) & (words[:, 5] == 0)
        assert np.isclose(math.exp(mu.log_joint((0,), (1, 0), 4)), mu.distribution(6)[hits].sum())
        assert mu.log_joint((1,), (1,), 1) == -math.inf

    def test_long_words_do_not_underflow(self, testcases):
        word = (0,) * 60
        assert np.isclose(testcases.bernoulli.log_prob(word), 60 * math.log(1 / 6))

    def test_not_stationary(self, testcases):
        with pytest.raises(DomainError):
            MarkovMeasure(testcases.golden, ("0", "1"), (0, 1), np.array([0.5, 0.5]), np.array([[0.5, 0.5], [1.0, 0.0]]))


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

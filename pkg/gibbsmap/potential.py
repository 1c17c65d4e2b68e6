#!/usr/bin/env python
"""
Module `potential` represents potential sequences {log f_n} on a subshift and evaluates them on cylinders as log-space
envelopes [inf, sup] of log f_n over the cylinder.

Kinds of potential (`Potential` subclasses, mirroring how each one is derived):
  SingleFunction  additive, log f_n(x) = Σ_{i<n} f(x_i ... x_{i+k-1}) for a window-k table f on B_k(X)
  Composition     Ψ∘π, a potential on Y pulled back through a factor map π: X -> Y
  Quotient        log f_n(π x) - log φ̃_n(π x), the composition divided by the preimage counts
  Tilt            log f_n + n·c

Each potential carries a `Flavor` and its constants C (almost additivity) and M (bounded variation) when they are known
structurally or were supplied by the user; `constants()` fills the rest from finite scans and says which is which.

cli usage: `python -m gibbsmap.potential ${action}`

python usage:
  from gibbsmap import shift, potential
  X = shift.build_full_shift(3, "abc")
  F = potential.from_weights(X, [1, 2, 3])
  potential.eval_log_envelope(F, X.parse("bc"))  # LogEnvelope(lo=log 6, hi=log 6)
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import copy
import enum
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
from gibbsmap import codes, util
from gibbsmap.checker import check, DomainError


class Flavor(enum.Enum):
    additive = "additive"
    almost_additive = "almost_additive"
    subadditive = "subadditive"
    asymptotically_subadditive = "asymptotically_subadditive"

    @property
    def almost_additive_like(self) -> bool:
        return self in (Flavor.additive, Flavor.almost_additive)


class LogEnvelope(t.NamedTuple):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


class Constants(pydantic.BaseModel):
    """C and M with their provenance: `certified` means structural or user supplied, otherwise scan estimates."""

    model_config = pydantic.ConfigDict(frozen=True)

    C: float
    M: float
    certified: bool
    n_max: int
    C_source: str
    M_source: str


class Potential:
    """
    Base of all potentials. Subclasses implement `_level(n)`, the envelopes of every word of B_n, and `point_values`, the
    value of log f_n at sequences given as rows of symbols.
    """

    def __init__(self, shift: sh.Subshift, flavor: Flavor, C: float | None = None, M: float | None = None, name: str = "") -> None:
        self.shift = shift
        self.flavor = flavor
        self.C = C
        self.M = M
        self.C_certified = C is not None
        self.M_certified = M is not None
        self.name = name or self.__class__.__name__.lower()
        self._levels: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()

    lookahead: int = 0

    def _level(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def point_values(self, rows: np.ndarray, n: int) -> np.ndarray:
        """log f_n at each row; rows need n + lookahead symbols."""
        raise NotImplementedError

    def additive_form(self) -> SingleFunction | None:
        return None

    def level(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(lo, hi) of log f_n on every cylinder of B_n, aligned with shift.words_array(n)."""
        check(n >= 1, f"level {n} < 1", DomainError)
        with self._lock:
            cached = self._levels.get(n)
        if cached is None:
            cached = self._level(n)
            with self._lock:
                self._levels[n] = cached
            logger.debug("%s: level %d, max width %.3g", self.name, n, float(np.max(cached[1] - cached[0])))
        return cached

    def envelope(self, word: t.Sequence[int]) -> LogEnvelope:
        word = self.shift.require(word)
        lo, hi = self.level(len(word))
        i = int(self.shift.index(np.array([word]))[0])
        return LogEnvelope(float(lo[i]), float(hi[i]))

    def overridden(self, C: float | None = None, M: float | None = None) -> Potential:
        """A copy with user supplied constants, marked certified."""
        result = copy.copy(self)
        if C is not None:
            check(C >= 0, f"C = {C} < 0", DomainError)
            result.C, result.C_certified = float(C), True
        if M is not None:
            check(M >= 1, f"M = {M} < 1", DomainError)
            result.M, result.M_certified = float(M), True
        return result

    def __repr__(self):
        return f"{self.__class__.__name__}(name={self.name!r}, shift={self.shift.name!r}, flavor={self.flavor.value}, C={self.C}, M={self.M})"


class SingleFunction(Potential):
    """Birkhoff sums of a window-k function given by its log-values on B_k(X), aligned with shift.words_array(k)."""

    def __init__(self, shift: sh.Subshift, window: int, values: np.ndarray, name: str = "") -> None:
        super().__init__(shift, Flavor.additive, C=0.0, name=name or f"f{window}")
        self.window = window
        self.values = np.asarray(values, dtype=float)
        self._codes = shift.codes(window)
        self.lookahead = window - 1
        if window == 1:
            self.M, self.M_certified = 1.0, True
        elif shift.transition is not None:
            # for a one-step SFT the width only depends on the last window - 1 symbols
            widths = [np.max(np.subtract(*self.level(n)[::-1])) for n in range(1, window)]
            self.M, self.M_certified = float(math.exp(max(widths))), True

    def window_values(self, rows: np.ndarray, start: int) -> np.ndarray:
        """f at the window rows[:, start:start+k]."""
        block = util.encode(rows[:, start : start + self.window], self.shift.alphabet_size)
        return self.values[np.searchsorted(self._codes, block)]

    def point_values(self, rows: np.ndarray, n: int) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        total = np.zeros(len(rows))
        for i in range(n):
            total += self.window_values(rows, i)
        return total

    def _level(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        longer = self.shift.words_array(n + self.window - 1).astype(np.int64)
        sums = self.point_values(longer, n)
        if self.window == 1:
            return sums, sums
        starts = util.group_starts(util.encode(longer[:, :n], self.shift.alphabet_size))
        check(len(starts) == self.shift.count(n), f"{self.shift.name}: some word of length {n} has no continuation", DomainError)
        return np.minimum.reduceat(sums, starts), np.maximum.reduceat(sums, starts)

    def additive_form(self) -> SingleFunction:
        return self


class Composition(Potential):
    """Ψ∘π: envelopes are those of Ψ on the image word, constants are inherited."""

    def __init__(self, base: Potential, factor: codes.FactorMap, name: str = "") -> None:
        super().__init__(factor.domain, base.flavor, base.C, base.M, name or f"{base.name}∘π")
        self.C_certified, self.M_certified = base.C_certified, base.M_certified
        self.base = base
        self.factor = factor
        self.lookahead = base.lookahead

    def _level(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base.level(n)
        image = self.factor.image_index(n)
        return lo[image], hi[image]

    def point_values(self, rows: np.ndarray, n: int) -> np.ndarray:
        return self.base.point_values(self.factor.lookup[np.asarray(rows, dtype=np.int64)], n)

    def additive_form(self) -> SingleFunction | None:
        source = self.base.additive_form()
        if source is None:
            return None
        blocks = self.shift.words_array(source.window)
        images = self.factor.lookup[blocks.astype(np.int64)]
        values = source.values[np.searchsorted(source._codes, util.encode(images, source.shift.alphabet_size))]
        return SingleFunction(self.shift, source.window, values, name=f"{self.name}[additive]")


class Quotient(Potential):
    """log f_n(π x) - log φ̃_n(π x) for a composition f_n∘π."""

    def __init__(self, composition: Composition, flavor: Flavor, C: float | None, C_certified: bool, name: str = "") -> None:
        super().__init__(composition.shift, flavor, C, composition.M, name or f"{composition.name}/φ̃")
        self.C_certified = C_certified and C is not None
        self.M_certified = composition.M_certified
        self.composition = composition
        self.factor = composition.factor
        self.lookahead = composition.lookahead

    def _log_counts(self, n: int) -> np.ndarray:
        return np.log(codes.preimage_counts(self.factor, n).astype(float))

    def _level(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.composition.level(n)
        counts = self._log_counts(n)[self.factor.image_index(n)]
        return lo - counts, hi - counts

    def point_values(self, rows: np.ndarray, n: int) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        Y = self.factor.codomain
        image = Y.index(self.factor.lookup[rows[:, :n]])
        return self.composition.point_values(rows, n) - self._log_counts(n)[image]

    def additive_form(self) -> SingleFunction | None:
        """Exists between full shifts, where φ̃_n(y) = Π r_{y_i}."""
        source = self.composition.additive_form()
        if source is None or self.factor.domain.kind is not sh.Kind.full or self.factor.codomain.kind is not sh.Kind.full:
            return None
        blocks = self.shift.words_array(source.window).astype(np.int64)
        log_r = np.log(np.array(self.factor.fiber_sizes, dtype=float))
        values = source.values - log_r[self.factor.lookup[blocks[:, 0]]]
        return SingleFunction(self.shift, source.window, values, name=f"{self.name}[additive]")


class Tilt(Potential):
    """log f_n + n·c."""

    def __init__(self, base: Potential, per_step_log: float, name: str = "") -> None:
        super().__init__(base.shift, base.flavor, base.C, base.M, name or f"{base.name}{per_step_log:+.4g}n")
        self.C_certified, self.M_certified = base.C_certified, base.M_certified
        self.base = base
        self.per_step_log = float(per_step_log)
        self.lookahead = base.lookahead

    def _level(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base.level(n)
        return lo + n * self.per_step_log, hi + n * self.per_step_log

    def point_values(self, rows: np.ndarray, n: int) -> np.ndarray:
        return self.base.point_values(rows, n) + n * self.per_step_log

    def additive_form(self) -> SingleFunction | None:
        source = self.base.additive_form()
        if source is None:
            return None
        return SingleFunction(self.shift, source.window, source.values + self.per_step_log, name=f"{self.name}[additive]")


def from_single_function(shift: sh.Subshift, window: int, table: t.Mapping[t.Any, float] | t.Sequence[float] | np.ndarray, name: str = "") -> SingleFunction:
    """
    An additive potential from a window-k function.
    :param table: log-values, either a mapping keyed by words (tuples of indices or formatted strings) or a sequence
        aligned with the lexicographic order of B_k
    """
    check(window >= 1, f"window {window} < 1", DomainError)
    blocks = shift.words_array(window)
    if isinstance(table, t.Mapping):
        lookup = {(shift.parse(key) if isinstance(key, str) else tuple(int(a) for a in key)): float(v) for key, v in table.items()}
        missing = [shift.format(w) for w in blocks if tuple(int(a) for a in w) not in lookup]
        check(not missing, f"log_values table misses {missing[:8]}", DomainError)
        extra = [shift.format(w) for w in lookup if len(w) != window or not shift.is_admissible(w)]
        check(not extra, f"log_values table has inadmissible or mis-sized words {extra[:8]}", DomainError)
        values = np.array([lookup[tuple(int(a) for a in w)] for w in blocks])
    else:
        values = np.asarray(table, dtype=float)
        check(values.shape == (len(blocks),), f"{values.shape[0] if values.ndim else 0} log-values for |B_{window}| = {len(blocks)}", DomainError)
    check(bool(np.all(np.isfinite(values))), "log-values must be finite", DomainError)
    return SingleFunction(shift, window, values, name)


def from_weights(shift: sh.Subshift, weights: t.Sequence[float], name: str = "") -> SingleFunction:
    """Window-1 potential f(a) = log weights[a]."""
    weights = np.asarray(weights, dtype=float)
    check(bool(np.all(weights > 0)), "weights must be positive", DomainError)
    return from_single_function(shift, 1, np.log(weights), name)


def zero(shift: sh.Subshift) -> SingleFunction:
    return from_single_function(shift, 1, np.zeros(shift.alphabet_size), name="zero")


def eval_log_envelope(p: Potential, word: t.Sequence[int]) -> LogEnvelope:
    return p.envelope(word)


def estimate_almost_additivity(p: Potential, n_max: int) -> float:
    """
    max over n + m <= n_max and canonical points x of the level-(n + m) cylinders of
    |log f_{n+m}(x) - log f_n(x) - log f_m(σ^n x)|. A lower bound for the true C.
    """
    check(n_max >= 2, f"n_max {n_max} < 2", DomainError)
    worst = 0.0
    for L in range(2, n_max + 1):
        rows = sh.canonical_points(p.shift, L, p.lookahead)
        whole = p.point_values(rows, L)
        for n in range(1, L):
            defect = np.abs(whole - p.point_values(rows, n) - p.point_values(rows[:, n:], L - n))
            worst = max(worst, float(defect.max()))
    return worst


def estimate_bounded_variation(p: Potential, n_max: int) -> float:
    """exp of the widest envelope over levels 1..n_max."""
    check(n_max >= 1, f"n_max {n_max} < 1", DomainError)
    widest = max(float(np.max(hi - lo)) for lo, hi in (p.level(n) for n in range(1, n_max + 1)))
    return math.exp(max(0.0, widest))


def compose_with_factor(p: Potential, factor: codes.FactorMap) -> Composition:
    check(p.shift is factor.codomain, f"{p.name} lives on {p.shift.name}, not on the codomain {factor.codomain.name}", DomainError)
    return Composition(p, factor)


def quotient_by_count(p: Composition, factor: codes.FactorMap, n_max: int = 8) -> Quotient:
    """
    Φ₁ = {log f_n∘π - log φ̃_n∘π}. Almost additive with C = C_Ψ + log(1/D) when Condition A holds up to n_max, otherwise
    degraded to subadditive with a warning.
    """
    check(isinstance(p, Composition) and p.factor is factor, f"{p.name} is not a composition through {factor.name}", DomainError)
    condition = codes.check_condition_A(factor, n_max)
    holds = check(
        condition.holds_up_to_n_max and not condition.decaying,
        f"{factor.name}: Condition A fails up to n = {n_max} (D_L trend {condition.trend[-3:]}), quotient treated as subadditive",
        warn=True,
    )
    if not holds:
        return Quotient(p, Flavor.subadditive, None, False)
    base_C = p.C if p.C is not None else estimate_almost_additivity(p.base, n_max)
    exact = condition.best_D == 1.0 and factor.domain.kind is sh.Kind.full and factor.codomain.kind is sh.Kind.full
    flavor = Flavor.additive if exact and p.flavor is Flavor.additive else Flavor.almost_additive
    return Quotient(p, flavor, base_C + math.log(1.0 / condition.best_D), exact and p.C_certified)


def tilt(p: Potential, per_step_log: float) -> Tilt:
    return Tilt(p, per_step_log)


def additive_form(p: Potential) -> SingleFunction | None:
    return p.additive_form()


def constants(p: Potential, n_max: int = 8) -> Constants:
    """Known constants where they exist, scan estimates otherwise."""
    if p.C is not None:
        C, C_source = p.C, "certified" if p.C_certified else "derived"
    else:
        C, C_source = estimate_almost_additivity(p, n_max), "scan"
    if p.M is not None:
        M, M_source = p.M, "certified" if p.M_certified else "derived"
    else:
        M, M_source = estimate_bounded_variation(p, n_max), "scan"
    return Constants(C=C, M=M, certified=p.C_certified and p.M_certified, n_max=n_max, C_source=C_source, M_source=M_source)


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    result = box.Box()
    result.X = sh.build_full_shift(3, "abc")
    result.Y = sh.build_full_shift(2, "AB")
    result.full2 = sh.build_full_shift(2)
    result.golden = sh.build_sft([[1, 1], [1, 0]])
    result.f1 = codes.FactorMap(result.X, result.Y, (0, 0, 1))
    result.F2 = from_weights(result.X, [1, 2, 3])
    result.window2 = from_single_function(result.full2, 2, {"00": 0.0, "01": math.log(2), "10": 0.0, "11": math.log(3)})
    result.golden_window2 = from_single_function(result.golden, 2, [0.5, -0.25, 1.0])
    return result


class Tests:
    def test_window1_exact(self, testcases):
        envelope = eval_log_envelope(testcases.F2, testcases.X.parse("bc"))
        assert np.isclose(envelope.lo, math.log(6)) and envelope.width == 0
        assert np.isclose(eval_log_envelope(testcases.F2, testcases.X.parse("abc")).hi, math.log(6))

    def test_zero(self, testcases):
        Z = zero(testcases.golden)
        assert eval_log_envelope(Z, (0, 1, 0)) == LogEnvelope(0.0, 0.0)
        assert estimate_bounded_variation(Z, 6) == 1.0

    def test_window2_envelopes(self, testcases):
        W = testcases.window2
        envelope = eval_log_envelope(W, (0, 1))
        assert np.isclose(envelope.lo, math.log(2)) and np.isclose(envelope.hi, math.log(6))
        envelope = eval_log_envelope(W, (0,))
        assert np.isclose(envelope.lo, 0.0) and np.isclose(envelope.hi, math.log(2))

    def test_missing_entry(self, testcases):
        with pytest.raises(DomainError):
            from_single_function(testcases.full2, 2, {"00": 0.0, "01": 1.0})
        with pytest.raises(DomainError):
            from_single_function(testcases.full2, 1, [0.0, -np.inf])

    def test_additive_defect_zero(self, testcases):
        for p in (testcases.F2, testcases.window2, testcases.golden_window2):
            assert estimate_almost_additivity(p, 8) < 1e-12

    def test_bounded_variation(self, testcases):
        assert estimate_bounded_variation(testcases.F2, 8) == 1.0
        assert np.isclose(estimate_bounded_variation(testcases.window2, 1), 3.0)
        assert np.isclose(estimate_bounded_variation(testcases.window2, 8), 3.0)
        assert np.isclose(testcases.window2.M, 3.0) and testcases.window2.M_certified

    def test_bounded_variation_nondecreasing(self, testcases):
        values = [estimate_bounded_variation(testcases.golden_window2, n) for n in range(1, 9)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_composition(self, testcases):
        one = zero(testcases.Y)
        composed = compose_with_factor(one, testcases.f1)
        for n in range(1, 5):
            lo, hi = composed.level(n)
            assert np.all(lo == 0) and np.all(hi == 0)
        psi = from_single_function(testcases.Y, 2, [0.0, 0.3, -0.2, 0.7])
        lifted = compose_with_factor(psi, testcases.f1)
        for n in range(1, 7):
            lo, hi = lifted.level(n)
            ylo, yhi = psi.level(n)
            image = testcases.f1.image_index(n)
            assert np.all(hi - lo <= yhi[image] - ylo[image] + 1e-12)

    def test_compose_wrong_shift(self, testcases):
        with pytest.raises(DomainError):
            compose_with_factor(testcases.F2, testcases.f1)

    def test_quotient_values(self, testcases):
        X, f1 = testcases.X, testcases.f1
        phi1 = quotient_by_count(compose_with_factor(zero(testcases.Y), f1), f1)
        assert np.isclose(eval_log_envelope(phi1, X.parse("a")).hi, -math.log(2))
        assert np.isclose(eval_log_envelope(phi1, X.parse("c")).hi, 0.0)
        assert np.isclose(eval_log_envelope(phi1, X.parse("ac")).lo, -math.log(2))
        assert phi1.flavor.almost_additive_like
        assert estimate_almost_additivity(phi1, 8) <= phi1.C + 1e-12

    def test_quotient_variation(self, testcases):
        psi = from_single_function(testcases.Y, 2, [0.0, 0.3, -0.2, 0.7])
        composed = compose_with_factor(psi, testcases.f1)
        phi1 = quotient_by_count(composed, testcases.f1)
        assert estimate_bounded_variation(phi1, 8) <= estimate_bounded_variation(psi, 8) + 1e-12

    def test_quotient_additive_form(self, testcases):
        phi1 = quotient_by_count(compose_with_factor(from_weights(testcases.Y, [2, 5]), testcases.f1), testcases.f1)
        form = additive_form(phi1)
        assert form is not None and form.window == 1
        assert np.allclose(form.values, [math.log(2 / 2), math.log(2 / 2), math.log(5)])
        for n in range(1, 6):
            assert np.allclose(form.level(n)[1], phi1.level(n)[1])

    def test_quotient_degrades(self, testcases):
        X = sh.build_sft([[1, 1, 0], [0, 1, 1], [1, 1, 1]], "abc")
        factor = codes.FactorMap(X, testcases.full2, (0, 0, 1))
        with pytest.warns(UserWarning, match="Condition A"):
            phi1 = quotient_by_count(compose_with_factor(zero(testcases.full2), factor), factor, n_max=10)
        assert phi1.flavor is Flavor.subadditive
        assert constants(phi1, 6).C_source == "scan"

    def test_tilt(self, testcases):
        p = testcases.window2
        assert np.allclose(tilt(p, 0.0).level(5)[0], p.level(5)[0])
        twice = tilt(tilt(p, 0.5), -0.2)
        assert np.allclose(twice.level(4)[1], p.level(4)[1] + 4 * 0.3)

    @given(c=st.floats(-3, 3), n=st.integers(1, 6))
    @settings(max_examples=30, deadline=None)
    def test_tilt_invariance(self, c, n):
        full2 = sh.build_full_shift(2)
        p = from_single_function(full2, 2, [0.0, math.log(2), 0.0, math.log(3)])
        lo, hi = p.level(n)
        tlo, thi = tilt(p, c).level(n)
        assert np.allclose(thi - tlo, hi - lo)
        assert abs(estimate_almost_additivity(tilt(p, c), 4) - estimate_almost_additivity(p, 4)) < 1e-9

    @given(n=st.integers(1, 5), extra=st.integers(1, 3))
    @settings(max_examples=25, deadline=None)
    def test_envelope_contains_subcylinder_points(self, n, extra):
        golden = sh.build_sft([[1, 1], [1, 0]])
        p = from_single_function(golden, 2, [0.5, -0.25, 1.0])
        lo, hi = p.level(n)
        rows = sh.canonical_points(golden, n + extra, p.lookahead)
        values = p.point_values(rows, n)
        position = golden.index(rows[:, :n])
        assert np.all(lo[position] <= values + 1e-12) and np.all(values <= hi[position] + 1e-12)

    def test_constants(self, testcases):
        record = constants(testcases.F2)
        assert record.C == 0 and record.M == 1 and record.certified
        overridden = zero(testcases.golden).overridden(C=0.5, M=2.0)
        assert constants(overridden).C == 0.5 and constants(overridden).M_source == "certified"


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

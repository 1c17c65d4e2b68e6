#!/usr/bin/env python
"""
Module `pressure` estimates topological pressure P(Φ) = lim (1/n) log S_n, S_n = Σ_{w ∈ B_n} sup_{[w]} f_n, with brackets
that contain the limit whenever the constants fed to them are valid, relative pressure along the fiber over an
eventually periodic y, and variational lower bounds h(μ) + ∫ f dμ over Markov measures.

Bracket: {log(e^C S_n)} is subadditive, so P <= (log S_n + C)/n. With a specification gap k, concatenating through a
bridge shows {log(C'' S_n)} is superadditive, so P >= (log S_n + log C'')/n, where
  k = 0:  C'' = e^{-C} / M²
  k >= 1: C'' = min(C', e^{-3C} m / (M³ S_k)),  m = min over B_k of inf f_k,  C' = min S_{n+l}/(S_n S_l) over n + l <= 2k + 2.

cli usage: `python -m gibbsmap.pressure ${action}`

python usage:
  from gibbsmap import shift, potential, pressure
  golden = shift.build_sft([[1, 1], [1, 0]])
  pressure.pressure_bracket(golden, potential.zero(golden), 16)  # lo ~ 0.448, hi ~ 0.491
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
import pydantic
import scipy.optimize
import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap import codes, markov, potential as pot, report, util
from gibbsmap.checker import check, DomainError, UnsupportedError


class PressureBracket(pydantic.BaseModel):
    """lo is None when no lower side could be derived (no specification gap within the bound)."""

    model_config = pydantic.ConfigDict(frozen=True)

    n: int
    lo: float | None
    hi: float
    s_n_log: float
    has_lower: bool
    certified: bool
    C: float
    M: float
    gap: int | None
    log_C2: float | None

    def contains(self, value: float, tolerance: float = 1e-12) -> bool:
        return (self.lo is None or self.lo - tolerance <= value) and value <= self.hi + tolerance


class RelativePressureTerm(pydantic.BaseModel):
    n: int
    term: float
    running_max: float


def _require_on(shift: sh.Subshift, p: pot.Potential) -> None:
    check(p.shift is shift, f"{p.name} lives on {p.shift.name}, not {shift.name}", DomainError)


def log_partition(shift: sh.Subshift, p: pot.Potential, n: int, envelope: str = "hi") -> float:
    """log S_n with the hi (sup) or lo (inf) envelope."""
    _require_on(shift, p)
    lo, hi = p.level(n)
    return util.log_total(hi if envelope == "hi" else lo)


def pressure_estimate(shift: sh.Subshift, p: pot.Potential, n: int) -> float:
    check(n >= 1, f"level {n} < 1", DomainError)
    return log_partition(shift, p, n) / n


def pressure_bracket(
    shift: sh.Subshift, p: pot.Potential, n: int, C: float | None = None, M: float | None = None, gap_bound: int = 6, n_scan: int = 8
) -> PressureBracket:
    """
    [lo, hi] around the pressure from level n.
    :param C: almost-additivity constant, overrides the potential's own or the scan estimate
    :param M: bounded-variation constant, likewise
    :param gap_bound: largest specification gap searched
    :param n_scan: scan depth for estimated constants
    """
    check(n >= 1, f"level {n} < 1", DomainError)
    given = p.overridden(C, M)
    constants = pot.constants(given, min(n_scan, max(2, n)))
    C_used = constants.C if p.flavor.almost_additive_like else 0.0
    s_n_log = log_partition(shift, p, n)
    hi = (s_n_log + C_used) / n
    certified = constants.certified and shift.kind is not sh.Kind.sofic
    if not p.flavor.almost_additive_like:
        check(False, f"{p.name} is {p.flavor.value}: pressure bracket has no lower side", warn=True)
        return PressureBracket(n=n, lo=None, hi=hi, s_n_log=s_n_log, has_lower=False, certified=False, C=C_used, M=constants.M, gap=None, log_C2=None)
    k = sh.specification_gap(shift, gap_bound)
    if k is None:
        check(False, f"{shift.name}: no specification gap <= {gap_bound}, bracket without lower side", warn=True)
        return PressureBracket(n=n, lo=None, hi=hi, s_n_log=s_n_log, has_lower=False, certified=certified, C=C_used, M=constants.M, gap=None, log_C2=None)
    log_M = math.log(constants.M)
    if k == 0:
        log_C2 = -C_used - 2 * log_M
    else:
        S = {j: log_partition(shift, p, j) for j in range(1, 2 * k + 3)}
        log_C1 = min(S[a + b] - S[a] - S[b] for a in range(1, 2 * k + 2) for b in range(1, 2 * k + 3 - a))
        log_m = float(np.min(p.level(k)[0]))
        log_C2 = min(log_C1, -3 * C_used + log_m - 3 * log_M - S[k])
    lo = (s_n_log + log_C2) / n
    check(lo <= hi + 1e-12, f"{p.name} on {shift.name}: lower side {lo:.6g} above {hi:.6g} at n={n}, constants too small", warn=True)
    logger.debug("%s on %s: n=%d bracket [%.6g, %.6g], gap %d", p.name, shift.name, n, lo, hi, k)
    return PressureBracket(n=n, lo=min(lo, hi), hi=hi, s_n_log=s_n_log, has_lower=True, certified=certified, C=C_used, M=constants.M, gap=k, log_C2=log_C2)


def relative_pressure_estimate(factor: codes.FactorMap, p: pot.Potential, y: sh.Point, n: int, envelope: str = "hi") -> float:
    """(1/n) log Σ_{x ∈ D_n(y)} f_n(x), one cylinder per x-word whose cylinder meets π^{-1}(y), valued by its envelope."""
    _require_on(factor.domain, p)
    check(envelope in ("hi", "lo"), f"envelope {envelope!r} is neither hi nor lo", DomainError)
    fiber = codes.fiber_words(factor, y, n)
    lo, hi = p.level(n)
    values = (hi if envelope == "hi" else lo)[factor.domain.index(fiber)]
    return util.log_total(values) / n


def relative_pressure_series(factor: codes.FactorMap, p: pot.Potential, y: sh.Point, n_max: int, envelope: str = "hi") -> list[RelativePressureTerm]:
    """Terms of the limsup with their running max."""
    terms: list[RelativePressureTerm] = []
    best = -math.inf
    for n in range(1, n_max + 1):
        term = relative_pressure_estimate(factor, p, y, n, envelope)
        best = max(best, term)
        terms.append(RelativePressureTerm(n=n, term=term, running_max=best))
    return terms


def _chain_value(P: np.ndarray, edge_log: np.ndarray) -> float:
    """h + ∫ f for the stationary chain P whose transitions carry log-weights edge_log."""
    pi = markov.MarkovMeasure.stationary(P)
    with np.errstate(divide="ignore", invalid="ignore"):
        entropy = -np.where(P > 0, P * np.log(P), 0.0).sum(axis=1)
        energy = np.where(P > 0, P * np.where(np.isfinite(edge_log), edge_log, 0.0), 0.0).sum(axis=1)
    return float(pi @ (entropy + energy))


def markov_lower_bound(
    shift: sh.Subshift,
    p: pot.Potential,
    order: int = 1,
    steps: int = 500,
    seed: int = 0,
    restarts: int = 4,
    method: str = "fixed-point",
) -> box.Box:
    """
    max of h(μ) + ∫ f dμ over stationary Markov measures of the given order, by fixed-point (power) iteration or by
    gradient ascent on transition logits. Order 0 means Bernoulli measures and needs a full shift.
    :return: box with value, order, method, measure (a MarkovMeasure), restarts
    """
    _require_on(shift, p)
    form = p.additive_form()
    check(form is not None, f"{p.name} is {p.flavor.value}; the energy of a Markov measure needs an additive potential", UnsupportedError)
    check(shift.kind is not sh.Kind.sofic, f"{shift.name}: Markov measures are parameterized on one-step SFTs", UnsupportedError)
    check(form.window <= order + 1, f"window {form.window} needs order >= {form.window - 1}", UnsupportedError)
    check(order >= 1 or shift.kind is sh.Kind.full, "order 0 (Bernoulli) needs a full shift", UnsupportedError)
    check(method in ("fixed-point", "gradient"), f"unknown method {method!r}", DomainError)
    states, log_weights = markov.transfer_matrix(shift, form, max(order, 1))
    allowed = np.isfinite(log_weights)
    rng = np.random.default_rng(seed)
    best_value, best_P = -math.inf, None
    for restart in range(restarts):
        if method == "fixed-point":
            log_lambda, r = markov.power_iteration(log_weights, steps=steps, seed=int(rng.integers(2**31)))
            with np.errstate(under="ignore"):
                P = np.where(allowed, np.exp(np.where(allowed, log_weights, 0.0) - log_lambda), 0.0) * r[None, :] / r[:, None]
            P = P / P.sum(axis=1, keepdims=True)
        elif order == 0:
            logits0 = rng.normal(size=shift.alphabet_size)

            def negative(z: np.ndarray) -> float:
                q = np.exp(z - z.max())
                return -_chain_value(np.tile(q / q.sum(), (len(q), 1)), log_weights)

            result = scipy.optimize.minimize(negative, logits0, method="L-BFGS-B", options={"maxiter": steps})
            q = np.exp(result.x - result.x.max())
            P = np.tile(q / q.sum(), (len(q), 1))
        else:
            logits0 = rng.normal(size=int(allowed.sum()))

            def stochastic(z: np.ndarray) -> np.ndarray:
                Z = np.full(log_weights.shape, -np.inf)
                Z[allowed] = z
                Z = np.exp(Z - Z.max(axis=1, keepdims=True))
                return Z / Z.sum(axis=1, keepdims=True)

            result = scipy.optimize.minimize(lambda z: -_chain_value(stochastic(z), log_weights), logits0, method="L-BFGS-B", options={"maxiter": steps})
            P = stochastic(result.x)
        value = _chain_value(P, log_weights)
        logger.debug("markov bound restart %d (%s): %.12g", restart, method, value)
        if value > best_value + 1e-15:
            best_value, best_P = value, P
    labels = states[:, 0]
    measure = markov.MarkovMeasure(shift, [shift.format(s) for s in states], labels, markov.MarkovMeasure.stationary(best_P), best_P, order=order)
    return box.Box(value=best_value, order=order, method=method, measure=measure, restarts=restarts)


def relative_pressure_report(factor: codes.FactorMap, p: pot.Potential, y: sh.Point, n_max: int) -> report.Report:
    """Series "relative" [n, term, running_max] of the relative pressure limsup at y. There is nothing to check."""
    r = report.Report(name=f"relative.{p.name}", operation="relative-pressure")
    series = r.add_series("relative", ["n", "term", "running_max"])
    terms = relative_pressure_series(factor, p, y, n_max)
    for term in terms:
        series.append(term.n, term.term, term.running_max)
    r.constants.update(y=y.format(factor.codomain), estimate=terms[-1].running_max)
    r.notes.append("the running max stands in for the limsup")
    r.conclude()
    return r


def pressure_report(
    shift: sh.Subshift,
    p: pot.Potential,
    n_max: int,
    n_min: int = 1,
    C: float | None = None,
    M: float | None = None,
    markov_order: int | None = None,
    seed: int = 0,
    steps: int = 500,
    method: str = "fixed-point",
) -> report.Report:
    """
    The series {n, estimate, lo, hi}, the bracket intersection check and the divisibility-chain check
    (log S_{jn} + C)/(jn) <= (log S_n + C)/n. With `markov_order` the variational lower bound over Markov measures of
    that order is added and checked against every upper bracket end.
    """
    r = report.Report(name=f"pressure.{p.name}", operation="pressure")
    series = r.add_series("pressure", ["n", "estimate", "lo", "hi"])
    brackets = {n: pressure_bracket(shift, p, n, C, M) for n in range(n_min, n_max + 1)}
    for n, b in brackets.items():
        series.append(n, b.s_n_log / n, b.lo, b.hi)
    lower = max((b.lo for b in brackets.values() if b.lo is not None), default=None)
    upper = min(b.hi for b in brackets.values())
    if lower is not None:
        r.add_check("brackets intersect", None, lower, upper, lower <= upper + 1e-12)
    for n, b in brackets.items():
        for multiple in range(2 * n, n_max + 1, n):
            if multiple in brackets:
                r.add_check("subadditive along divisibility chain", multiple, brackets[multiple].hi, b.hi, brackets[multiple].hi <= b.hi + 1e-12, witness=f"{n} | {multiple}")
    if markov_order is not None:
        bound = markov_lower_bound(shift, p, order=markov_order, steps=steps, seed=seed, method=method)
        r.add_check("Markov lower bound <= bracket hi", markov_order, bound.value, upper, bound.value <= upper + 1e-12)
        r.constants.update(markov_bound=bound.value, markov_order=markov_order, markov_method=method)
    last = brackets[n_max]
    r.constants.update(C=last.C, M=last.M, certified=last.certified, gap=last.gap)
    if not last.certified:
        r.notes.append("constants are scan estimates; brackets hold if the true constants do not exceed them")
    r.conclude()
    return r


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
    result.F2 = pot.from_weights(result.X, [1, 2, 3])
    result.window2 = pot.from_single_function(result.full2, 2, [0.0, math.log(2), 0.0, math.log(3)])
    result.golden_log = math.log((1 + math.sqrt(5)) / 2)
    return result


class Tests:
    def test_window1_exact(self, testcases):
        for n in range(1, 13):
            assert abs(pressure_estimate(testcases.X, testcases.F2, n) - math.log(6)) <= 1e-12

    def test_zero_potential(self, testcases):
        assert abs(pressure_estimate(testcases.golden, pot.zero(testcases.golden), 12) - testcases.golden_log) < 0.05
        assert np.isclose(pressure_estimate(testcases.full2, pot.zero(testcases.full2), 7), math.log(2))

    def test_bracket_exact(self, testcases):
        b = pressure_bracket(testcases.X, testcases.F2, 5)
        assert np.isclose(b.lo, math.log(6)) and np.isclose(b.hi, math.log(6)) and b.certified and b.gap == 0

    def test_bracket_golden(self, testcases):
        b = pressure_bracket(testcases.golden, pot.zero(testcases.golden), 16)
        assert b.contains(testcases.golden_log)
        assert b.hi - b.lo <= 0.06
        assert b.gap == 1

    def test_brackets_intersect(self, testcases):
        a = pressure_bracket(testcases.full2, testcases.window2, 12)
        b = pressure_bracket(testcases.full2, testcases.window2, 14)
        assert max(a.lo, b.lo) <= min(a.hi, b.hi)

    def test_no_gap(self, testcases):
        identity = sh.build_sft([[1, 0], [0, 1]])
        with pytest.warns(UserWarning, match="specification gap"):
            b = pressure_bracket(identity, pot.zero(identity), 6)
        assert not b.has_lower and b.lo is None

    def test_relative_pressure(self, testcases):
        one = pot.zero(testcases.X)
        A, B = sh.Point((), (0,)), sh.Point((), (1,))
        assert np.isclose(relative_pressure_estimate(testcases.f1, one, A, 6), math.log(2))
        assert np.isclose(relative_pressure_estimate(testcases.f1, one, B, 6), 0.0)
        assert np.isclose(relative_pressure_estimate(testcases.f1, testcases.F2, A, 6), math.log(3))

    def test_relative_below_full(self, testcases):
        for y in (sh.Point((), (0,)), sh.Point((1,), (0, 1))):
            for n in range(1, 8):
                assert relative_pressure_estimate(testcases.f1, testcases.F2, y, n) <= pressure_estimate(testcases.X, testcases.F2, n) + 1e-12

    def test_partition_identity(self, testcases):
        n = 5
        Y = testcases.Y
        terms = [n * relative_pressure_estimate(testcases.f1, testcases.F2, sh.Point(tuple(int(a) for a in w), (0,)), n) for w in Y.words_array(n)]
        assert np.isclose(util.log_total(np.array(terms)), n * pressure_estimate(testcases.X, testcases.F2, n))

    def test_relative_series_running_max(self, testcases):
        terms = relative_pressure_series(testcases.f1, testcases.F2, sh.Point((1,), (0,)), 6)
        assert [t.n for t in terms] == list(range(1, 7))
        assert all(b.running_max >= a.running_max for a, b in zip(terms, terms[1:]))

    def test_markov_bernoulli(self, testcases):
        bound = markov_lower_bound(testcases.X, testcases.F2, order=0)
        assert abs(bound.value - math.log(6)) < 1e-9
        assert np.allclose(bound.measure.initial, [1 / 6, 2 / 6, 3 / 6])
        uniform = markov_lower_bound(testcases.full2, pot.zero(testcases.full2), order=0, method="gradient")
        assert abs(uniform.value - math.log(2)) < 1e-6

    def test_markov_parry(self, testcases):
        bound = markov_lower_bound(testcases.golden, pot.zero(testcases.golden), order=1)
        assert abs(bound.value - testcases.golden_log) < 1e-9
        gradient = markov_lower_bound(testcases.golden, pot.zero(testcases.golden), order=1, method="gradient")
        assert gradient.value <= testcases.golden_log + 1e-12 and gradient.value > testcases.golden_log - 1e-4

    def test_markov_below_bracket(self, testcases):
        cases = [(testcases.X, testcases.F2), (testcases.golden, pot.zero(testcases.golden)), (testcases.full2, testcases.window2)]
        for X, p in cases:
            bound = markov_lower_bound(X, p, order=1)
            assert bound.value <= pressure_bracket(X, p, 12).hi + 1e-12

    def test_markov_unsupported(self, testcases):
        with pytest.raises(UnsupportedError):
            markov_lower_bound(testcases.golden, pot.zero(testcases.golden), order=0)
        with pytest.raises(UnsupportedError):
            markov_lower_bound(testcases.full2, testcases.window2, order=0)

    def test_report(self, testcases):
        r = pressure_report(testcases.golden, pot.zero(testcases.golden), 12)
        assert r.verdict == "PASS"
        assert r.series["pressure"].columns == ["n", "estimate", "lo", "hi"]
        assert len(r.series["pressure"].rows) == 12

    def test_report_markov(self, testcases):
        r = pressure_report(testcases.golden, pot.zero(testcases.golden), 10, markov_order=1)
        assert r.verdict == "PASS"
        assert abs(r.constants["markov_bound"] - testcases.golden_log) < 1e-9

    def test_relative_report(self, testcases):
        r = relative_pressure_report(testcases.f1, testcases.F2, sh.Point((), (0,)), 5)
        assert r.verdict == "INFO" and r.constants["y"] == "(A)"
        assert np.allclose(r.series["relative"].column("term"), math.log(3))


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

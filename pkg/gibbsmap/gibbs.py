#!/usr/bin/env python
"""
Module `gibbs` computes Gibbs measures and checks the Gibbs property. Pieces:
  rpf_oracle            exact Gibbs measure of an additive potential on a mixing SFT (Perron data of the transfer matrix)
  gibbs_approximant     ν_n ∝ sup_{[w]} f_n e^{-nP} on the words of B_n
  cesaro_average        averages of shifted distributions, for invariance
  gibbs_ratio_envelope  min and max of μ[w] / (e^{-nP} f_n) over B_n
  pushforward           image of a cylinder distribution under a one-block map
  mixing_lower_bound_check  ν([u] ∩ σ^{-t}[v]) / (ν[u] ν[v]) over a range of t
  mixing_report         the same ratio minimized over all word pairs of one length, as a report

Finite levels are never turned into limits: a `CylinderDistribution` is one level of one family, and invariance or
consistency across levels is measured (`invariance_defect`, `marginal_consistency_defect`), not assumed.

cli usage: `python -m gibbsmap.gibbs ${action}`

python usage:
  from gibbsmap import shift, potential, gibbs
  X = shift.build_full_shift(3, "abc")
  oracle = gibbs.rpf_oracle(X, potential.from_weights(X, [1, 2, 3]))
  oracle.pressure  # log 6
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
import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap import codes, markov, potential as pot, pressure, report, util
from gibbsmap.checker import check, DomainError, LevelMismatchError, UnsupportedError
from gibbsmap.markov import MarkovMeasure, entropy, energy, free_energy


class CylinderDistribution:
    """Weights on B_level(shift), aligned with shift.words_array(level), summing to 1."""

    def __init__(self, shift: sh.Subshift, level: int, weights: np.ndarray, provenance: str = "") -> None:
        weights = np.asarray(weights, dtype=float)
        check(level >= 1, f"level {level} < 1", LevelMismatchError)
        check(weights.shape == (shift.count(level),), f"{weights.shape} weights for |B_{level}| = {shift.count(level)}", LevelMismatchError)
        check(bool(np.all(weights >= 0)) and weights.sum() > 0, "weights must be nonnegative and not all zero", DomainError)
        self.shift = shift
        self.level = level
        self.weights = weights / weights.sum()
        self.provenance = provenance

    @staticmethod
    def make(shift: sh.Subshift, level: int, weights: np.ndarray, provenance: str = "") -> CylinderDistribution:
        return CylinderDistribution(shift, level, weights, provenance)

    @staticmethod
    def from_measure(measure: MarkovMeasure, level: int, provenance: str = "") -> CylinderDistribution:
        return CylinderDistribution(measure.shift, level, measure.distribution(level), provenance or repr(measure))

    def weight(self, word: t.Sequence[int]) -> float:
        check(len(word) == self.level, f"word of length {len(word)} at level {self.level}", LevelMismatchError)
        return float(self.weights[self.shift.index(np.array([tuple(word)]))[0]])

    def marginalize(self, m: int) -> CylinderDistribution:
        """Masses of the m-prefixes."""
        return self.shifted(0, m)

    def shifted(self, i: int, m: int) -> CylinderDistribution:
        """(σ^i ν) on B_m: mass of the words w with w[i:i+m] = v."""
        check(1 <= m and i >= 0 and i + m <= self.level, f"window {i}..{i + m} outside level {self.level}", LevelMismatchError)
        if i == 0 and m == self.level:
            return self
        windows = self.shift.words_array(self.level)[:, i : i + m]
        index = self.shift.index(windows)
        weights = np.bincount(index, weights=self.weights, minlength=self.shift.count(m))
        return CylinderDistribution(self.shift, m, weights, f"σ^{i} {self.provenance}".strip())

    def total_variation(self, other: CylinderDistribution) -> float:
        check(other.shift is self.shift and other.level == self.level, f"levels {self.level} and {other.level} differ", LevelMismatchError)
        return 0.5 * float(np.abs(self.weights - other.weights).sum())

    def invariance_defect(self, m: int | None = None) -> float:
        """TV distance between the m-marginal and the m-marginal of σν."""
        m = self.level - 1 if m is None else m
        return self.marginalize(m).total_variation(self.shifted(1, m))

    def words(self) -> list[str]:
        return [self.shift.format(w) for w in self.shift.words_array(self.level)]

    def __repr__(self):
        return f"{self.__class__.__name__}(shift={self.shift.name!r}, level={self.level}, provenance={self.provenance!r})"


def marginal_consistency_defect(lower: CylinderDistribution, upper: CylinderDistribution) -> float:
    """TV distance between ν_n and the n-marginal of ν_{n+j}."""
    check(upper.level >= lower.level, f"level {upper.level} below {lower.level}", LevelMismatchError)
    return lower.total_variation(upper.marginalize(lower.level))


class GibbsRatio(pydantic.BaseModel):
    n: int
    min_ratio: float
    max_ratio: float
    min_hi: float
    max_hi: float
    min_lo: float
    max_lo: float
    zero_words: list[str] = []

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio if self.min_ratio > 0 else math.inf


def rpf_oracle(sft: sh.Subshift, p: pot.Potential, check_steps: int = 5000) -> box.Box:
    """
    Pressure and Gibbs measure of an additive potential on an irreducible aperiodic SFT from the Perron data of
    L_ij = exp f(i..j) on states B_q, q = max(1, window - 1). The eigenvalue is cross-checked by power iteration.
    :return: box with pressure, gibbs (MarkovMeasure), power_check (|difference| of the two log eigenvalues), form
    """
    form = p.additive_form()
    check(form is not None, f"{p.name} is {p.flavor.value}; the oracle needs an additive potential", UnsupportedError)
    check(p.shift is sft, f"{p.name} lives on {p.shift.name}, not {sft.name}", DomainError)
    check(sft.kind is not sh.Kind.sofic, f"{sft.name} is sofic; the oracle needs an SFT", UnsupportedError)
    check(sh.is_irreducible(sft) and sh.is_aperiodic(sft), f"{sft.name} is not irreducible and aperiodic", UnsupportedError)
    states, log_weights = markov.transfer_matrix(sft, form, max(1, form.window - 1))
    log_lambda, left, right = markov.perron(log_weights)
    by_power, _ = markov.power_iteration(log_weights, steps=check_steps)
    difference = abs(by_power - log_lambda)
    check(difference < 1e-9, f"power iteration disagrees with eig by {difference:.3g}", warn=True)
    measure = MarkovMeasure.from_eigendata(sft, states, log_weights, log_lambda, left, right, order=states.shape[1])
    logger.info("oracle %s on %s: pressure %.12g", p.name, sft.name, log_lambda)
    return box.Box(pressure=log_lambda, gibbs=measure, power_check=difference, form=form)


def gibbs_approximant(shift: sh.Subshift, p: pot.Potential, n: int, pressure_value: float = 0.0) -> CylinderDistribution:
    """ν_n[w] ∝ exp(sup_{[w]} log f_n - n·P); the pressure cancels in the normalization but keeps the weights near 1."""
    check(p.shift is shift, f"{p.name} lives on {p.shift.name}, not {shift.name}", DomainError)
    _, hi = p.level(n)
    logs = hi - n * pressure_value
    return CylinderDistribution(shift, n, np.exp(logs - util.log_total(logs)), f"approximant {p.name}")


def cesaro_average(dists: t.Sequence[CylinderDistribution], level: int | None = None) -> CylinderDistribution:
    """Arithmetic mean of distributions on one shift after marginalizing them to a common level."""
    check(len(dists) >= 1, "nothing to average", LevelMismatchError)
    shift_ = dists[0].shift
    check(all(d.shift is shift_ for d in dists), "distributions live on different shifts", LevelMismatchError)
    level = min(d.level for d in dists) if level is None else level
    check(all(d.level >= level for d in dists), f"some distribution is below level {level}", LevelMismatchError)
    weights = np.mean([d.marginalize(level).weights for d in dists], axis=0)
    result = CylinderDistribution(shift_, level, weights, f"cesaro({len(dists)})")
    if level >= 2:
        logger.debug("cesaro average of %d: invariance defect %.3g", len(dists), result.invariance_defect())
    return result


def shift_family(dist: CylinderDistribution, count: int) -> list[CylinderDistribution]:
    """σ^i ν for i < count, all at level dist.level - count + 1."""
    m = dist.level - count + 1
    check(m >= 1, f"{count} shifts leave nothing of level {dist.level}", LevelMismatchError)
    return [dist.shifted(i, m) for i in range(count)]


def gibbs_ratio_envelope(dist: CylinderDistribution, p: pot.Potential, pressure_value: float) -> GibbsRatio:
    """μ[w] / exp(log f_n - nP) with both envelopes of log f_n; zero mass on a word gives ratio 0."""
    check(p.shift is dist.shift, f"{p.name} and the distribution live on different shifts", DomainError)
    n = dist.level
    lo, hi = p.level(n)
    with np.errstate(divide="ignore"):
        log_w = np.log(dist.weights)
    ratio_hi = np.exp(log_w - (hi - n * pressure_value))
    ratio_lo = np.exp(log_w - (lo - n * pressure_value))
    zero = [dist.shift.format(w) for w in dist.shift.words_array(n)[dist.weights == 0][:8]]
    if zero:
        logger.warning("%s: zero mass on %s, Gibbs property violated", dist.provenance, zero)
    return GibbsRatio(
        n=n,
        min_ratio=float(min(ratio_hi.min(), ratio_lo.min())),
        max_ratio=float(max(ratio_hi.max(), ratio_lo.max())),
        min_hi=float(ratio_hi.min()),
        max_hi=float(ratio_hi.max()),
        min_lo=float(ratio_lo.min()),
        max_lo=float(ratio_lo.max()),
        zero_words=zero,
    )


def pushforward(dist: CylinderDistribution, factor: codes.FactorMap) -> CylinderDistribution:
    check(dist.shift is factor.domain, f"distribution on {dist.shift.name}, map starts at {factor.domain.name}", DomainError)
    weights = np.bincount(factor.image_index(dist.level), weights=dist.weights, minlength=factor.codomain.count(dist.level))
    return CylinderDistribution(factor.codomain, dist.level, weights, f"π {dist.provenance}")


def mixing_lower_bound_check(
    measure: CylinderDistribution | MarkovMeasure, u: t.Sequence[int], v: t.Sequence[int], t_range: t.Iterable[int], gap: int = 0
) -> box.Box:
    """
    min over t of ν([u] ∩ σ^{-t}[v]) / (ν[u] ν[v]), skipping t <= |u| + 2·gap. Markov measures are evaluated exactly,
    cylinder distributions need level >= t + |v|.
    :return: box with min_C_tilde, ratios [(t, ratio)], skipped [t]
    """
    u, v = tuple(u), tuple(v)
    ratios: list[tuple[int, float]] = []
    skipped = []
    for t_shift in t_range:
        if t_shift <= len(u) + 2 * gap:
            skipped.append(t_shift)
            continue
        if isinstance(measure, MarkovMeasure):
            log_joint = measure.log_joint(u, v, t_shift)
            log_u, log_v = measure.log_prob(u), measure.log_prob(v)
            ratio = math.exp(log_joint - log_u - log_v) if math.isfinite(log_u + log_v) else math.nan
        else:
            check(measure.level >= t_shift + len(v), f"level {measure.level} < t + |v| = {t_shift + len(v)}", LevelMismatchError)
            words = measure.shift.words_array(measure.level)
            at_u = np.all(words[:, : len(u)] == np.array(u), axis=1)
            at_v = np.all(words[:, t_shift : t_shift + len(v)] == np.array(v), axis=1)
            joint = float(measure.weights[at_u & at_v].sum())
            nu_u = float(measure.weights[at_u].sum())
            nu_v = float(measure.weights[np.all(words[:, : len(v)] == np.array(v), axis=1)].sum())
            ratio = joint / (nu_u * nu_v) if nu_u > 0 and nu_v > 0 else math.nan
        ratios.append((t_shift, ratio))
    finite = [r for _, r in ratios if math.isfinite(r)]
    check(bool(finite), "no t beyond the overlap range", LevelMismatchError)
    return box.Box(min_C_tilde=min(finite), ratios=ratios, skipped=skipped)


def mixing_report(
    measure: CylinderDistribution | MarkovMeasure,
    n_words: int,
    t_range: t.Iterable[int],
    gap: int = 0,
    floor: float = 0.0,
    pairs: t.Sequence[tuple[sh.Word, sh.Word]] | None = None,
) -> report.Report:
    """
    Series "mixing" [t, min_ratio], the mixing ratio minimized over all pairs of positive-mass words of length n_words,
    or over `pairs` when given.
    """
    shift = measure.shift
    words = [tuple(int(a) for a in w) for w in shift.words_array(n_words)]
    if isinstance(measure, MarkovMeasure):
        live = [w for w in words if math.isfinite(measure.log_prob(w))]
    else:
        live = [w for w, mass in zip(words, measure.marginalize(n_words).weights) if mass > 0]
    pairs = pairs if pairs is not None else [(u, v) for u in live for v in live]
    t_range = list(t_range)
    per_t: dict[int, float] = {}
    for u, v in pairs:
        for t_shift, ratio in mixing_lower_bound_check(measure, u, v, t_range, gap).ratios:
            per_t[t_shift] = min(per_t.get(t_shift, math.inf), ratio)
    r = report.Report(name=f"mixing.{shift.name}", operation="mixing")
    series = r.add_series("mixing", ["t", "min_ratio"])
    for t_shift, ratio in sorted(per_t.items()):
        series.append(t_shift, ratio)
        r.add_check(f"mixing ratio > {floor}", t_shift, ratio, floor, ratio > floor)
    r.constants.update(n_words=n_words, gap=gap, C_tilde=min(per_t.values(), default=None))
    r.conclude(trend=True)
    return r


def oracle_report(sft: sh.Subshift, p: pot.Potential, n_max: int) -> report.Report:
    """Oracle pressure against the brackets, the free energy of the oracle measure and its Gibbs ratio envelope, per n."""
    oracle = rpf_oracle(sft, p)
    r = report.Report(name=f"oracle.{p.name}", operation="oracle")
    r.constants.update(pressure=oracle.pressure, power_check=oracle.power_check)
    value = free_energy(oracle.gibbs, oracle.form)
    r.add_check("free energy equals pressure", None, value, oracle.pressure, abs(value - oracle.pressure) < 1e-9)
    series = r.add_series("pressure", ["n", "estimate", "lo", "hi", "oracle"])
    envelope = r.add_series("ratio", ["n", "min", "max"])
    for n in range(1, n_max + 1):
        b = pressure.pressure_bracket(sft, p, n)
        series.append(n, b.s_n_log / n, b.lo, b.hi, oracle.pressure)
        r.add_check("bracket contains oracle pressure", n, oracle.pressure, b.hi, b.contains(oracle.pressure, 1e-10))
        ratio = gibbs_ratio_envelope(CylinderDistribution.from_measure(oracle.gibbs, n), p, oracle.pressure)
        envelope.append(n, ratio.min_ratio, ratio.max_ratio)
        r.add_check("Gibbs ratio positive", n, ratio.min_ratio, ratio.max_ratio, ratio.min_ratio > 0)
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
    result.golden_zero = pot.zero(result.golden)
    result.window2 = pot.from_single_function(result.full2, 2, [0.0, math.log(2), 0.0, math.log(3)])
    return result


class Tests:
    def test_oracle_bernoulli(self, testcases):
        oracle = rpf_oracle(testcases.X, testcases.F2)
        assert np.isclose(oracle.pressure, math.log(6))
        assert np.allclose(oracle.gibbs.distribution(1), [1 / 6, 2 / 6, 3 / 6])
        assert oracle.power_check < 1e-12

    def test_oracle_parry(self, testcases):
        oracle = rpf_oracle(testcases.golden, testcases.golden_zero)
        phi = (1 + math.sqrt(5)) / 2
        assert abs(oracle.pressure - math.log(phi)) < 1e-12
        assert np.allclose(oracle.gibbs.distribution(1), [phi**2 / (1 + phi**2), 1 / (1 + phi**2)])
        assert np.isclose(entropy(oracle.gibbs), math.log(phi))

    def test_oracle_uniform(self, testcases):
        oracle = rpf_oracle(testcases.full2, pot.zero(testcases.full2))
        assert np.isclose(oracle.pressure, math.log(2))
        assert np.allclose(oracle.gibbs.distribution(3), 1 / 8)

    def test_oracle_periodic_unsupported(self, testcases):
        flip = sh.build_sft([[0, 1], [1, 0]])
        with pytest.raises(UnsupportedError):
            rpf_oracle(flip, pot.zero(flip))

    def test_oracle_window2_free_energy(self, testcases):
        oracle = rpf_oracle(testcases.full2, testcases.window2)
        assert np.isclose(free_energy(oracle.gibbs, oracle.form), oracle.pressure)
        assert np.isclose(entropy(oracle.gibbs) + energy(oracle.gibbs, testcases.window2), oracle.pressure)

    def test_approximant(self, testcases):
        nu = gibbs_approximant(testcases.X, testcases.F2, 2, math.log(6))
        assert np.isclose(nu.weight(testcases.X.parse("bc")), 1 / 6)
        assert np.allclose(gibbs_approximant(testcases.full2, pot.zero(testcases.full2), 3).weights, 1 / 8)
        assert np.allclose(gibbs_approximant(testcases.golden, testcases.golden_zero, 3).weights, 1 / 5)

    def test_approximant_equals_oracle_window1(self, testcases):
        oracle = rpf_oracle(testcases.X, testcases.F2)
        for n in range(1, 6):
            assert np.allclose(gibbs_approximant(testcases.X, testcases.F2, n).weights, oracle.gibbs.distribution(n))

    def test_ratio_envelope(self, testcases):
        oracle = rpf_oracle(testcases.X, testcases.F2)
        ratio = gibbs_ratio_envelope(CylinderDistribution.from_measure(oracle.gibbs, 6), testcases.F2, oracle.pressure)
        assert np.isclose(ratio.min_ratio, 1) and np.isclose(ratio.max_ratio, 1)
        uniform = CylinderDistribution(testcases.full2, 4, np.ones(16))
        ratio = gibbs_ratio_envelope(uniform, pot.zero(testcases.full2), math.log(2))
        assert np.isclose(ratio.min_ratio, 1) and np.isclose(ratio.max_ratio, 1)

    def test_ratio_bounded_on_sft(self, testcases):
        oracle = rpf_oracle(testcases.golden, testcases.golden_zero)
        spreads = [gibbs_ratio_envelope(CylinderDistribution.from_measure(oracle.gibbs, n), testcases.golden_zero, oracle.pressure).spread for n in range(2, 11)]
        assert max(spreads) < 2 * min(spreads)

    def test_zero_mass(self, testcases):
        weights = np.ones(9)
        weights[0] = 0
        ratio = gibbs_ratio_envelope(CylinderDistribution(testcases.X, 2, weights), testcases.F2, math.log(6))
        assert ratio.min_ratio == 0 and ratio.zero_words == ["aa"]

    def test_pushforward(self, testcases):
        X, f1 = testcases.X, testcases.f1
        uniform = CylinderDistribution.from_measure(MarkovMeasure.bernoulli(X, [1, 1, 1]), 3)
        assert np.allclose(pushforward(uniform, f1).weights, MarkovMeasure.bernoulli(testcases.Y, [2, 1]).distribution(3))
        weighted = CylinderDistribution.from_measure(MarkovMeasure.bernoulli(X, [1, 2, 3]), 4)
        assert np.allclose(pushforward(weighted, f1).weights, 1 / 16)
        point = CylinderDistribution(X, 3, (np.arange(27) == 26).astype(float))
        assert pushforward(point, f1).weight(testcases.Y.parse("BBB")) == 1.0

    def test_pushforward_commutes_with_marginals(self, testcases):
        nu = gibbs_approximant(testcases.X, testcases.F2, 5)
        a = pushforward(nu.marginalize(3), testcases.f1)
        b = pushforward(nu, testcases.f1).marginalize(3)
        assert np.allclose(a.weights, b.weights)

    def test_cesaro(self, testcases):
        bern = CylinderDistribution.from_measure(MarkovMeasure.bernoulli(testcases.X, [1, 2, 3]), 5)
        assert bern.invariance_defect() < 1e-12
        averaged = cesaro_average(shift_family(bern, 3))
        assert np.allclose(averaged.weights, bern.marginalize(3).weights)
        with pytest.raises(LevelMismatchError):
            cesaro_average([bern, CylinderDistribution.from_measure(MarkovMeasure.bernoulli(testcases.Y, [1, 1]), 5)])

    def test_cesaro_reduces_defect(self, testcases):
        nu = gibbs_approximant(testcases.golden, testcases.golden_zero, 8)
        averaged = cesaro_average(shift_family(nu, 4))
        telescoped = nu.shifted(0, 4).total_variation(nu.shifted(4, 4)) / 4
        assert np.isclose(averaged.invariance_defect(), telescoped)

    def test_marginal_consistency(self, testcases):
        oracle = rpf_oracle(testcases.golden, testcases.golden_zero)
        a, b = (CylinderDistribution.from_measure(oracle.gibbs, n) for n in (3, 5))
        assert marginal_consistency_defect(a, b) < 1e-12

    def test_mixing_product(self, testcases):
        bern = MarkovMeasure.bernoulli(testcases.Y, [1, 1])
        result = mixing_lower_bound_check(bern, (0,), (1,), range(1, 8))
        assert np.allclose([r for _, r in result.ratios], 1.0)
        dist = CylinderDistribution.from_measure(bern, 8)
        assert np.isclose(mixing_lower_bound_check(dist, (0, 1), (1,), range(3, 7)).min_C_tilde, 1.0)

    def test_mixing_parry(self, testcases):
        oracle = rpf_oracle(testcases.golden, testcases.golden_zero)
        result = mixing_lower_bound_check(oracle.gibbs, (0,), (0,), range(1, 16), gap=1)
        distances = [abs(r - 1) for _, r in result.ratios]
        assert result.min_C_tilde > 0 and result.skipped == [1, 2, 3]
        assert distances[-1] < distances[0] and distances[-1] < 1e-4

    def test_mixing_parry_word_lengths(self, testcases):
        oracle = rpf_oracle(testcases.golden, testcases.golden_zero)
        for n_words in range(1, 5):
            r = mixing_report(oracle.gibbs, n_words, range(1, 25), gap=1)
            distances = [abs(ratio - 1) for ratio in r.series["mixing"].column("min_ratio")]
            assert r.verdict == "PASS-trend" and r.constants["C_tilde"] > 0, n_words
            assert distances[-1] < distances[0] and distances[-1] < 1e-4, n_words

    def test_mixing_level_too_low(self, testcases):
        dist = CylinderDistribution.from_measure(MarkovMeasure.bernoulli(testcases.Y, [1, 1]), 4)
        with pytest.raises(LevelMismatchError):
            mixing_lower_bound_check(dist, (0,), (1,), [6])

    def test_mixing_report(self, testcases):
        oracle = rpf_oracle(testcases.golden, testcases.golden_zero)
        r = mixing_report(oracle.gibbs, 2, range(1, 10), gap=1)
        assert r.verdict == "PASS-trend"
        assert r.series["mixing"].column("t") == list(range(5, 10))
        assert 0 < r.constants["C_tilde"] <= 1.0
        bern = MarkovMeasure.bernoulli(testcases.Y, [1, 2])
        one_pair = mixing_report(bern, 1, range(2, 6), pairs=[((0,), (1,))])
        assert np.allclose(one_pair.series["mixing"].column("min_ratio"), 1.0)

    def test_oracle_report(self, testcases):
        r = oracle_report(testcases.golden, testcases.golden_zero, 8)
        assert r.verdict == "PASS"


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

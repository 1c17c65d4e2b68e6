#!/usr/bin/env python
"""
Module transfer moves potentials and Gibbs measures across a factor map π: X -> Y.

Image side: g_n(y) sums exp(log f_n) over one point of each x-cylinder of B_n(X) mapping onto y_1..y_n. Both envelopes
are kept, so g_n has a hi table (sup of f_n on each cylinder) and a lo table (inf). g̃_n = g_n e^{-nP_X(F)} is the same
table tilted by -P per step.
  image_potential                       the tables
  verify_pressure_equality              N_n/M <= G_n <= M N_n at every n, with G_n the X partition sum and N_n = Σ g_n
  verify_image_gibbs                    ratio envelope of πμ against g̃_n, certified by the Gibbs constant of μ
  verify_subadditivity                  log g_{n+m} <= log g_n + log g_m∘σ^n + C on every split
  relative_pressure_identity            on full X the fiber sums along y are log g_n on its prefixes
  first_coordinate_multiplicativity_check  g_n = g_1 · g_{n-1}∘σ for window-1 f between full shifts
  kempton_u                             u_{w,n}(y) = g_{n+1}(y, w) / g_n(σy, w) for fixed tails w

Preimage side: Φ₁ = Ψ∘π - log φ̃_n∘π and its Gibbs measure, which must push forward to the Gibbs measure of Ψ.
  preimage_gibbs, compensation_function_full_shift, compensation_check, equality_criterion_ratio, psi_selector,
  bowen_image_potential, relative_equilibrium_check

cli usage: `python -m gibbsmap.transfer ${action}`

python usage:
  from gibbsmap import fixtures, transfer
  s = fixtures.systems()
  transfer.image_potential(s.F1, s.F2, 2).log_hi  # log 9 for every y
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
from scipy.special import logsumexp
import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap import codes, fixtures, gibbs, potential as pot, pressure, report, util
from gibbsmap.checker import check, DomainError, PreconditionError, UnsupportedError
from gibbsmap.gibbs import CylinderDistribution
from gibbsmap.markov import MarkovMeasure, energy, entropy, free_energy
from gibbsmap.potential import LogEnvelope

type Measure = MarkovMeasure | CylinderDistribution


class ImagePotentialTable:
    """log g_n on B_n(Y), aligned with codomain.words_array(level). `tilt` is the per-step offset already applied."""

    def __init__(self, factor: codes.FactorMap, level: int, log_lo: np.ndarray, log_hi: np.ndarray, tilt: float = 0.0, source: str = "") -> None:
        self.factor = factor
        self.level = level
        self.log_lo = np.asarray(log_lo, dtype=float)
        self.log_hi = np.asarray(log_hi, dtype=float)
        self.tilt = tilt
        self.source = source

    @property
    def words(self) -> np.ndarray:
        return self.factor.codomain.words_array(self.level)

    def tilted(self, per_step_log: float) -> ImagePotentialTable:
        shift_by = self.level * per_step_log
        return ImagePotentialTable(self.factor, self.level, self.log_lo + shift_by, self.log_hi + shift_by, self.tilt + per_step_log, self.source)

    def value(self, y_word: t.Sequence[int]) -> LogEnvelope:
        Y = self.factor.codomain
        i = int(Y.index(np.array([Y.require(y_word)]))[0])
        return LogEnvelope(float(self.log_lo[i]), float(self.log_hi[i]))

    def log_total(self, envelope: str = "hi") -> float:
        return util.log_total(self.log_hi if envelope == "hi" else self.log_lo)

    def to_tsv(self) -> str:
        Y = self.factor.codomain
        return report.image_table_tsv([Y.format(w) for w in self.words], self.log_lo, self.log_hi, self.level)

    def __repr__(self):
        return f"{self.__class__.__name__}(factor={self.factor.name!r}, level={self.level}, tilt={self.tilt:.6g}, source={self.source!r})"


def image_potential(factor: codes.FactorMap, p: pot.Potential, n: int, tilt: float = 0.0) -> ImagePotentialTable:
    """log g_n with both envelopes, by log-sum-exp over the preimage cylinders of each y-word; `tilt` gives g̃_n."""
    check(p.shift is factor.domain, f"{p.name} lives on {p.shift.name}, not on {factor.domain.name}", DomainError)
    check(sh.is_irreducible(factor.domain), f"{factor.domain.name} is reducible; image potentials need an irreducible domain", UnsupportedError)
    lo, hi = p.level(n)
    index = factor.image_index(n)
    size = factor.codomain.count(n)
    table = ImagePotentialTable(factor, n, util.group_logsumexp(lo, index, size), util.group_logsumexp(hi, index, size), source=p.name)
    return table.tilted(tilt) if tilt else table


def _require_full(factor: codes.FactorMap, what: str) -> None:
    check(
        factor.domain.kind is sh.Kind.full and factor.codomain.kind is sh.Kind.full,
        f"{what} needs full shifts on both sides of {factor.name}",
        UnsupportedError,
    )


def at_level(measure: Measure, n: int) -> CylinderDistribution:
    if isinstance(measure, MarkovMeasure):
        return CylinderDistribution.from_measure(measure, n)
    return measure.marginalize(n)


def gibbs_measure(shift: sh.Subshift, p: pot.Potential, level: int, exact: bool = True) -> tuple[Measure, float, str]:
    """The oracle measure when the potential and shift allow it, the level-`level` approximant otherwise."""
    if exact:
        try:
            oracle = gibbs.rpf_oracle(shift, p)
            return oracle.gibbs, oracle.pressure, "oracle"
        except UnsupportedError as e:
            logger.info("%s: no oracle (%s), using the approximant at level %d", p.name, e, level)
    value = pressure.pressure_estimate(shift, p, level)
    return gibbs.gibbs_approximant(shift, p, level, value), value, "approximant"


def verify_pressure_equality(factor: codes.FactorMap, p: pot.Potential, n_max: int, M: float | None = None) -> report.Report:
    """
    The sandwich N_n/M <= G_n <= M N_n for both envelopes of N_n, the per-word width of g_n against log M and
    |log G_n - log N_n| / n <= 2 log M / n, at every n <= n_max.
    """
    X, Y = factor.domain, factor.codomain
    constants = pot.constants(p.overridden(M=M), min(n_max, 8))
    log_M = math.log(constants.M)
    r = report.Report(name=f"pressure-equality.{p.name}", operation="pressure-equality")
    r.constants.update(M=constants.M, M_source=constants.M_source)
    series = r.add_series("pressure", ["n", "P_X", "P_Y_lo", "P_Y_hi"])
    for n in range(1, n_max + 1):
        log_G = pressure.log_partition(X, p, n)
        table = image_potential(factor, p, n)
        log_N = {envelope: table.log_total(envelope) for envelope in ("lo", "hi")}
        series.append(n, log_G / n, log_N["lo"] / n, log_N["hi"] / n)
        tolerance = 1e-12 * max(1.0, abs(log_G))
        width = table.log_hi - table.log_lo
        widest = int(np.argmax(width))
        witness = Y.format(table.words[widest])
        for envelope, log_N_n in log_N.items():
            r.add_check(f"N_n/M <= G_n ({envelope})", n, log_N_n - log_M, log_G, log_N_n - log_M <= log_G + tolerance, witness)
            r.add_check(f"G_n <= M N_n ({envelope})", n, log_G, log_N_n + log_M, log_G <= log_N_n + log_M + tolerance, witness)
        r.add_check("g_n envelopes within M", n, float(width[widest]), log_M, width[widest] <= log_M + tolerance, witness)
        difference = max(abs(log_G - v) for v in log_N.values()) / n
        r.add_check("pressure estimates within 2 log M / n", n, difference, 2 * log_M / n, difference <= 2 * log_M / n + tolerance)
    r.conclude()
    return r


def verify_image_gibbs(factor: codes.FactorMap, mu: Measure, p: pot.Potential, n_max: int, pressure_value: float | None = None) -> report.Report:
    """
    Gibbs ratio envelope of πμ against g̃_n. The Gibbs constant C₁ of μ for p (over both envelopes) certifies the image
    envelope: it lies in [1/(C₁M), C₁M] and its spread is at most C₁²M².
    :raise PreconditionError: μ gives zero mass to some cylinder
    """
    X = factor.domain
    check(p.shift is X and mu.shift is X, f"{p.name} and the measure must live on {X.name}", DomainError)
    source = "given"
    if pressure_value is None:
        try:
            pressure_value, source = gibbs.rpf_oracle(X, p).pressure, "oracle"
        except UnsupportedError:
            top = n_max if isinstance(mu, MarkovMeasure) else mu.level
            pressure_value, source = pressure.pressure_estimate(X, p, top), f"estimate at n={top}"
    M = pot.constants(p, min(n_max, 8)).M
    levels = range(1, (n_max if isinstance(mu, MarkovMeasure) else min(n_max, mu.level)) + 1)
    r = report.Report(name=f"image-gibbs.{p.name}", operation="factor-gibbs")
    envelope = r.add_series("ratio", ["n", "min", "max"])
    C1 = 1.0
    for n in levels:
        dist = at_level(mu, n)
        own = gibbs.gibbs_ratio_envelope(dist, p, pressure_value)
        if own.zero_words:
            raise PreconditionError(f"{dist.provenance} is not Gibbs for {p.name}: zero mass at level {n}", witness=own.zero_words[0])
        C1 = max(C1, own.max_ratio, 1 / own.min_ratio)
        image = gibbs.pushforward(dist, factor)
        table = image_potential(factor, p, n, -pressure_value)
        log_nu = np.log(image.weights)
        ratios = np.exp(np.concatenate([log_nu - table.log_hi, log_nu - table.log_lo]))
        low, high = float(ratios.min()), float(ratios.max())
        envelope.append(n, low, high)
        spread_at = int(np.argmax(ratios)) % len(log_nu)
        witness = factor.codomain.format(table.words[spread_at])
        r.add_check("image ratio spread within C1^2 M^2", n, high / low, C1**2 * M**2, high / low <= C1**2 * M**2 * (1 + 1e-12), witness)
        r.add_check("image ratio above 1/(C1 M)", n, low, 1 / (C1 * M), low >= (1 - 1e-12) / (C1 * M))
        r.add_check("image ratio below C1 M", n, high, C1 * M, high <= C1 * M * (1 + 1e-12), witness)
    r.constants.update(C1=C1, M=M, pressure=pressure_value, pressure_source=source)
    r.conclude()
    return r


def verify_subadditivity(factor: codes.FactorMap, p: pot.Potential, n_max: int, C: float | None = None) -> report.Report:
    """log g_{n+m}(y) <= log g_n(y) + log g_m(σ^n y) + C for every y-word of length n + m <= n_max, hi envelopes."""
    Y = factor.codomain
    constants = pot.constants(p.overridden(C=C), min(n_max, 8))
    tables = {n: image_potential(factor, p, n).log_hi for n in range(1, n_max + 1)}
    r = report.Report(name=f"subadditivity.{p.name}", operation="subadditivity")
    r.constants.update(C=constants.C, C_source=constants.C_source)
    for L in range(2, n_max + 1):
        words = Y.words_array(L)
        worst, witness = -math.inf, None
        for n in range(1, L):
            defect = tables[L] - tables[n][Y.index(words[:, :n])] - tables[L - n][Y.index(words[:, n:])]
            i = int(np.argmax(defect))
            if defect[i] > worst:
                worst, witness = float(defect[i]), f"{Y.format(words[i])} split at {n}"
        r.add_check("log g_{n+m} <= log g_n + log g_m∘σ^n + C", L, worst, constants.C, worst <= constants.C + 1e-12 * L, witness)
    r.conclude()
    return r


def relative_pressure_identity(factor: codes.FactorMap, p: pot.Potential, y: sh.Point, n_max: int) -> report.Report:
    """On a full X the fiber sum along y at level n is g_n of the prefix y_1..y_n."""
    check(factor.domain.kind is sh.Kind.full, f"{factor.domain.name} is not a full shift", UnsupportedError)
    Y = factor.codomain
    r = report.Report(name=f"relative-pressure.{p.name}", operation="relative-pressure")
    series = r.add_series("relative_pressure", ["n", "term", "running_max", "log_g_n_over_n"])
    for term in pressure.relative_pressure_series(factor, p, y, n_max):
        prefix = Y.require(y.take(term.n))
        j = int(Y.index(np.array([prefix]))[0])
        expected = float(image_potential(factor, p, term.n).log_hi[j]) / term.n
        series.append(term.n, term.term, term.running_max, expected)
        r.add_check("relative pressure term equals log g_n / n", term.n, term.term, expected, abs(term.term - expected) <= 1e-12, Y.format(prefix))
    r.conclude()
    return r


def first_coordinate_multiplicativity_check(factor: codes.FactorMap, f: pot.Potential, n_max: int) -> report.Report:
    """g_n(y) = g_1(y) g_{n-1}(σy) exactly when f depends on the first coordinate only; relative error <= 1e-12."""
    _require_full(factor, "first coordinate multiplicativity")
    form = f.additive_form()
    if form is None or form.window != 1:
        raise PreconditionError(f"{f.name} does not depend on the first coordinate only", witness=None if form is None else f"window {form.window}")
    Y = factor.codomain
    b = Y.alphabet_size
    tables = {n: image_potential(factor, form, n).log_hi for n in range(1, n_max + 1)}
    r = report.Report(name=f"multiplicativity.{f.name}", operation="multiplicativity")
    series = r.add_series("multiplicativity", ["n", "max_relative_error"])
    for n in range(2, n_max + 1):
        codes_n = np.arange(b**n)
        error = np.abs(np.expm1(tables[n] - tables[1][codes_n // b ** (n - 1)] - tables[n - 1][codes_n % b ** (n - 1)]))
        i = int(np.argmax(error))
        series.append(n, float(error[i]))
        r.add_check("g_n = g_1 g_{n-1}∘σ", n, float(error[i]), 1e-12, error[i] <= 1e-12, Y.format(Y.words_array(n)[i]))
    m = MarkovMeasure.bernoulli(Y, np.ones(b))
    lhs = float(m.distribution(n_max) @ tables[n_max]) / n_max
    rhs = float(m.distribution(1) @ tables[1])
    r.add_check("(1/n) ∫ log g_n dm = ∫ log g_1 dm", n_max, lhs, rhs, abs(lhs - rhs) <= 1e-10)
    r.conclude()
    return r


def _log_g_with_tail(factor: codes.FactorMap, form: pot.SingleFunction, tail: sh.Point, n_top: int) -> list[np.ndarray]:
    """
    log g_n(y, w) for n = 0..n_top and every y in B_n(Y), by prepending one symbol at a time. The state is the next
    window - 1 symbols of x·w, so each step sums exp f over the fiber of the new y-symbol.
    """
    A, B = factor.domain.alphabet_size, factor.codomain.alphabet_size
    k = form.window
    Q = A ** (k - 1)
    values = form.values.reshape(A, Q)
    V = np.full((1, Q), -np.inf)
    V[0, int(util.encode(np.array([tail.take(k - 1)]), A)[0])] = 0.0
    fibers = [factor.fiber(b) for b in range(B)]
    result = [np.zeros(1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(n_top):
            blocks = []
            for fiber in fibers:
                block = np.full(V.shape, -np.inf)
                for a in fiber:
                    terms = V + values[a][None, :]
                    if k == 1:
                        block[:, 0] = np.logaddexp(block[:, 0], terms[:, 0])
                    else:
                        width = Q // A
                        block[:, a * width : (a + 1) * width] = logsumexp(terms.reshape(len(V), width, A), axis=2)
                blocks.append(block)
            V = np.vstack(blocks)
            result.append(logsumexp(V, axis=1))
    return result


def kempton_u(factor: codes.FactorMap, f: pot.Potential, tails: t.Sequence[sh.Point] | None = None, n_max: int = 12) -> box.Box:
    """
    u_{w,n}(y) = g_{n+1}(y, w) / g_n(σy, w) on B_{n+1}(Y) for each tail w, with
      sup_diffs[n]     = max over w, y of |u_{w,n+1}(y) - u_{w,n}(y_1..y_{n+1})|
      w_sensitivity[n] = max over y and pairs of tails of |u_{w,n}(y) - u_{w',n}(y)|
    and the bound 1 < u_{w,n}(y) <= M ḡ₁(y) checked on every value; u = 1 up to 1e-12 in log space fails the strict side.
    :param tails: eventually periodic x-sequences, default (min symbol)^∞ and (max symbol)^∞
    :return: box with u_tables {n: (tails, |B_{n+1}|) array}, sup_diffs, w_sensitivity, geometric_ratio, report
    """
    X, Y = factor.domain, factor.codomain
    _require_full(factor, "the u-iteration")
    form = f.additive_form()
    check(form is not None, f"{f.name} is not given by a single function", UnsupportedError)
    check(n_max >= 2, f"n_max {n_max} < 2", DomainError)
    tails = list(tails) if tails else [sh.Point((), (0,)), sh.Point((), (X.alphabet_size - 1,))]
    B = Y.alphabet_size
    logs = [_log_g_with_tail(factor, form, w, n_max + 1) for w in tails]
    log_g1 = image_potential(factor, form, 1).log_hi
    log_M = math.log(form.M)
    r = report.Report(name=f"u.{f.name}", operation="u-converge")
    series = r.add_series("u", ["n", "sup_diff", "w_sensitivity"])
    u_tables: dict[int, np.ndarray] = {}
    for n in range(1, n_max + 1):
        codes_n = np.arange(B ** (n + 1))
        log_u = np.stack([g[n + 1] - g[n][codes_n % B**n] for g in logs])
        u_tables[n] = np.exp(log_u)
        low = np.unravel_index(int(np.argmin(log_u)), log_u.shape)
        excess = log_u - log_M - log_g1[codes_n // B**n][None, :]
        high = np.unravel_index(int(np.argmax(excess)), excess.shape)
        r.add_check("u > 1", n, float(log_u[low]), 0.0, log_u[low] > 1e-12, Y.format(Y.words_array(n + 1)[low[1]]))
        r.add_check("u <= M g_1", n, float(excess[high]), 0.0, excess[high] <= 1e-12, Y.format(Y.words_array(n + 1)[high[1]]))
    sup_diffs: list[float] = []
    w_sensitivity: list[float] = []
    for n in range(1, n_max + 1):
        w_sensitivity.append(float(np.max(u_tables[n].max(axis=0) - u_tables[n].min(axis=0))))
        if n < n_max:
            parent = np.arange(B ** (n + 2)) // B
            sup_diffs.append(float(np.max(np.abs(u_tables[n + 1] - u_tables[n][:, parent]))))
        series.append(n, sup_diffs[-1] if n < n_max else None, w_sensitivity[-1])
    significant = [(n, d) for n, d in enumerate(sup_diffs, start=1) if d > 1e-12]
    if len(significant) >= 2:
        (n0, d0), (n1, d1) = significant[0], significant[-1]
        geometric_ratio = (d1 / d0) ** (1 / (n1 - n0))
    else:
        geometric_ratio = 0.0
    r.constants.update(geometric_ratio=geometric_ratio, M=form.M, tails=len(tails))
    r.conclude()
    logger.info("u-iteration %s: geometric ratio %.3g, w-sensitivity %.3g at n=%d", f.name, geometric_ratio, w_sensitivity[-1], n_max)
    return box.Box(u_tables=u_tables, sup_diffs=sup_diffs, w_sensitivity=w_sensitivity, geometric_ratio=geometric_ratio, report=r)


def preimage_gibbs(factor: codes.FactorMap, Psi: pot.Potential, n_max: int, n_check: int | None = None, tolerance: float = 1e-10) -> box.Box:
    """
    Φ₁ = Ψ∘π - log φ̃_n∘π and its Gibbs measure μ₁ (exact when Φ₁ has an additive form, the level-n_max approximant
    otherwise), checked against the Gibbs measure of Ψ: πμ₁ must equal it on every cylinder, and the partition sums of
    Φ₁ and Ψ agree at every level.
    :raise PreconditionError: Condition A fails or its ratio decays up to n_max
    :return: box with Phi1, mu1, nu, pushforward_check (largest cylinder difference), condition, report
    """
    X, Y = factor.domain, factor.codomain
    check(Psi.shift is Y, f"{Psi.name} lives on {Psi.shift.name}, not on {Y.name}", DomainError)
    condition = codes.check_condition_A(factor, n_max)
    if not condition.holds_up_to_n_max or condition.decaying:
        raise PreconditionError(f"{factor.name}: Condition A fails up to n = {n_max}, D_L trend {condition.trend[-3:]}", witness=condition.witness)
    Phi1 = pot.quotient_by_count(pot.compose_with_factor(Psi, factor), factor, n_max)
    mu1, P1, source1 = gibbs_measure(X, Phi1, n_max)
    nu, P2, source2 = gibbs_measure(Y, Psi, n_max, exact=source1 == "oracle")
    if source2 != source1:
        mu1, P1, source1 = gibbs_measure(X, Phi1, n_max, exact=False)
    n_check = min(n_check or n_max, n_max)
    r = report.Report(name=f"preimage.{Psi.name}", operation="preimage")
    series = r.add_series("pushforward", ["n", "max_abs_difference"])
    worst = 0.0
    for n in range(1, n_check + 1):
        image, target = gibbs.pushforward(at_level(mu1, n), factor), at_level(nu, n)
        difference = np.abs(image.weights - target.weights)
        i = int(np.argmax(difference))
        worst = max(worst, float(difference[i]))
        series.append(n, float(difference[i]))
        r.add_check("pushforward equals the Gibbs measure of Psi", n, float(image.weights[i]), float(target.weights[i]), difference[i] <= tolerance, Y.format(Y.words_array(n)[i]))
        lhs, rhs = pressure.pressure_estimate(X, Phi1, n), pressure.pressure_estimate(Y, Psi, n)
        r.add_check("partition sums of Phi1 and Psi agree", n, lhs, rhs, abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs)))
    if source1 == "oracle":
        r.add_check("P_X(Phi1) = P_Y(Psi)", None, P1, P2, abs(P1 - P2) <= 1e-9)
    r.constants.update(D=condition.best_D, C=Phi1.C, flavor=Phi1.flavor.value, pressure=P2, measure=source1)
    r.conclude()
    return box.Box(Phi1=Phi1, mu1=mu1, nu=nu, pushforward_check=worst, condition=condition, report=r)


def compensation_function_full_shift(factor: codes.FactorMap) -> pot.SingleFunction:
    """g(y) = log r_{y_1}, r_i the number of x-symbols over i."""
    _require_full(factor, "the closed-form compensation function")
    return pot.from_single_function(factor.codomain, 1, np.log(np.array(factor.fiber_sizes, dtype=float)), name=f"compensation[{factor.name}]")


def compensation_check(factor: codes.FactorMap, measure: MarkovMeasure, n_max: int) -> report.Report:
    """(1/n) Σ_y m[y] log φ̃_n(y) against ∫ g dm for an invariant m on Y."""
    g = compensation_function_full_shift(factor)
    check(measure.shift is factor.codomain, f"the measure lives on {measure.shift.name}, not on {factor.codomain.name}", DomainError)
    rhs = energy(measure, g)
    r = report.Report(name=f"compensation.{factor.name}", operation="compensation")
    series = r.add_series("compensation", ["n", "lhs", "rhs"])
    for n in range(1, n_max + 1):
        lhs = float(measure.distribution(n) @ np.log(codes.preimage_counts(factor, n).astype(float))) / n
        series.append(n, lhs, rhs)
        r.add_check("(1/n) ∫ log φ̃_n dm = ∫ g dm", n, lhs, rhs, abs(lhs - rhs) <= 1e-12)
    r.constants.update({f"g[{s}]": float(v) for s, v in zip(factor.codomain.symbols, g.values)})
    r.conclude()
    return r


def _criterion_level(factor: codes.FactorMap, p: pot.Potential, n: int) -> tuple[float, str]:
    """log of max(ratio, 1/ratio) for g_n(y) / (|π^{-1}[y]| f_n(x)) over x-words, with the witnessing pair."""
    X, Y = factor.domain, factor.codomain
    lo, hi = p.level(n)
    table = image_potential(factor, p, n)
    index = factor.image_index(n)
    log_counts = np.log(codes.preimage_counts(factor, n).astype(float))[index]
    worst = np.maximum(table.log_hi[index] - log_counts - lo, hi + log_counts - table.log_lo[index])
    i = int(np.argmax(worst))
    return float(worst[i]), f"{X.format(X.words_array(n)[i])} over {Y.format(Y.words_array(n)[index[i]])}"


def equality_criterion_ratio(factor: codes.FactorMap, p: pot.Potential, n_max: int, n_ref: int | None = None, growth_limit: float = 1.2) -> report.Report:
    """
    A_n = max over x of max(ratio, 1/ratio), ratio = g_n(πx) / (|π^{-1}[πx]| f_n(x)). A finite-n observation: the verdict
    is PASS-trend when A_n grows by less than `growth_limit` from n_ref to n_max, FAIL-trend otherwise.
    """
    n_ref = n_ref or max(1, n_max - 6)
    check(1 <= n_ref < n_max, f"reference level {n_ref} outside 1..{n_max - 1}", DomainError)
    r = report.Report(name=f"ratio-criterion.{p.name}", operation="ratio-criterion")
    series = r.add_series("criterion", ["n", "A_n", "A_hat"])
    log_A, A_hat, witness = {}, 1.0, None
    for n in range(1, n_max + 1):
        log_A[n], level_witness = _criterion_level(factor, p, n)
        if math.exp(log_A[n]) >= A_hat:
            A_hat, witness = math.exp(log_A[n]), level_witness
        series.append(n, math.exp(log_A[n]), A_hat)
    growth = math.exp(log_A[n_max] - log_A[n_ref])
    r.add_check("A_n stabilizes", n_max, growth, growth_limit, growth < growth_limit, witness)
    r.constants.update(A_hat=A_hat, growth=growth, n_ref=n_ref)
    r.conclude(trend=True)
    return r


def psi_selector(factor: codes.FactorMap, y_word: t.Sequence[int]) -> sh.Word:
    """The symbol-wise least preimage of a y-word."""
    _require_full(factor, "the least-preimage selector")
    return tuple(factor.fiber(b)[0] for b in factor.codomain.require(y_word))


def bowen_image_potential(
    factor: codes.FactorMap, f: pot.Potential, n_max: int = 8, n_check: int = 6, growth_limit: float = 1.2, tolerance: float = 1e-10
) -> box.Box:
    """
    The window-k potential y ↦ log r_{y_1} + f(ψ(y_1..y_k)) on Y when the ratio criterion stabilizes, with its Gibbs
    measure compared to the image of the Gibbs measure of f.
    :raise PreconditionError: the ratio criterion grows, witness is the worst cylinder
    :return: box with potential, criterion (report), report
    """
    X, Y = factor.domain, factor.codomain
    _require_full(factor, "the selector image potential")
    form = f.additive_form()
    check(form is not None, f"{f.name} is not given by a single function", UnsupportedError)
    criterion = equality_criterion_ratio(factor, form, n_max, growth_limit=growth_limit)
    if criterion.failed:
        raise PreconditionError(f"{factor.name}: ratio criterion for {f.name} grows by {criterion.constants['growth']:.4g}", witness=criterion.records[-1].witness)
    blocks = Y.words_array(form.window)
    selected = np.array([psi_selector(factor, w) for w in blocks])
    log_r = np.log(np.array(factor.fiber_sizes, dtype=float))
    values = log_r[blocks[:, 0].astype(np.int64)] + form.values[X.index(selected)]
    image_potential_ = pot.from_single_function(Y, form.window, values, name=f"g+{f.name}∘ψ")
    source = gibbs.rpf_oracle(X, form).gibbs
    target = gibbs.rpf_oracle(Y, image_potential_).gibbs
    r = report.Report(name=f"selector-image.{f.name}", operation="selector-image")
    for n in range(1, n_check + 1):
        image = gibbs.pushforward(CylinderDistribution.from_measure(source, n), factor)
        difference = np.abs(image.weights - target.distribution(n))
        i = int(np.argmax(difference))
        r.add_check("image measure is Gibbs for the selector potential", n, float(image.weights[i]), float(target.distribution(n)[i]), difference[i] <= tolerance, Y.format(Y.words_array(n)[i]))
    r.conclude()
    return box.Box(potential=image_potential_, criterion=criterion, report=r)


def relative_equilibrium_check(factor: codes.FactorMap, f: pot.Potential, trials: int = 4, seed: int = 0) -> report.Report:
    """
    For window-1 f between full shifts: h(μ_f) + ∫ f dμ_f = h(πμ_f) + ∫ log ḡ₁ dπμ_f = P_X(f), and
    h(m) + ∫ log ḡ₁ dm <= P_X(f) for seeded Bernoulli measures m on Y.
    """
    _require_full(factor, "the relative equilibrium check")
    form = f.additive_form()
    if form is None or form.window != 1:
        raise PreconditionError(f"{f.name} does not depend on the first coordinate only")
    X, Y = factor.domain, factor.codomain
    oracle = gibbs.rpf_oracle(X, form)
    P = oracle.pressure
    r = report.Report(name=f"relative-equilibrium.{f.name}", operation="relative-equilibrium")
    value = free_energy(oracle.gibbs, form)
    r.add_check("h(mu) + ∫ f dmu = P_X", None, value, P, abs(value - P) <= 1e-10)
    log_g1 = pot.from_single_function(Y, 1, image_potential(factor, form, 1).log_hi, name="log g1")
    image = MarkovMeasure.bernoulli(Y, np.bincount(factor.lookup, weights=oracle.gibbs.distribution(1), minlength=Y.alphabet_size))
    value = entropy(image) + energy(image, log_g1)
    r.add_check("h(pi mu) + ∫ log g1 d(pi mu) = P_X", None, value, P, abs(value - P) <= 1e-10)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        weights = rng.uniform(0.05, 1.0, Y.alphabet_size)
        m = MarkovMeasure.bernoulli(Y, weights)
        value = entropy(m) + energy(m, log_g1)
        r.add_check("h(m) + ∫ log g1 dm <= P_X", None, value, P, value <= P + 1e-12, str(np.round(weights / weights.sum(), 6).tolist()))
    r.constants.update(pressure=P)
    r.conclude()
    return r


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    result = box.Box(fixtures.systems())
    result.F2_oracle = gibbs.rpf_oracle(result.X, result.F2).gibbs
    result.Psi_pulled = pot.compose_with_factor(result.Psi, result.F1)
    result.identity = codes.FactorMap(result.Y, result.Y, (0, 1))
    return result


class Tests:
    def test_image_potential(self, testcases):
        s = testcases
        assert np.allclose(image_potential(s.F1, s.F2, 1).log_hi, math.log(3))
        assert np.isclose(image_potential(s.F1, s.F2, 2).value(s.Y.parse("AB")).hi, math.log(9))
        counts = codes.preimage_counts(s.F1, 4)
        assert np.allclose(np.exp(image_potential(s.F1, pot.zero(s.X), 4).log_hi), counts)

    def test_image_tilt(self, testcases):
        s = testcases
        tilted = image_potential(s.F1, s.F2, 3, -math.log(6))
        assert np.allclose(np.exp(tilted.log_hi), 27 / 216) and tilted.tilt == -math.log(6)

    def test_image_tsv(self, testcases):
        lines = image_potential(testcases.F1, testcases.F2, 1).to_tsv().splitlines()
        assert lines[:2] == ["# level=1", "y_word\tlog_g_lo\tlog_g_hi"] and lines[2].startswith("A\t1.0986")

    def test_pressure_equality(self, testcases):
        s = testcases
        r = verify_pressure_equality(s.F1, s.F2, 8)
        assert r.verdict == "PASS"
        assert np.allclose(r.series["pressure"].column("P_X"), math.log(6))
        assert np.allclose(r.series["pressure"].column("P_Y_hi"), math.log(6))
        r = verify_pressure_equality(s.F1, pot.zero(s.X), 6)
        assert np.allclose(r.series["pressure"].column("P_Y_lo"), math.log(3))

    def test_pressure_equality_window2_collapse(self, testcases):
        s = testcases
        r = verify_pressure_equality(s.collapse, s.window2, 12)
        assert r.verdict == "PASS" and np.isclose(r.constants["M"], 3.0)

    def test_image_gibbs_exact(self, testcases):
        s = testcases
        r = verify_image_gibbs(s.F1, s.F2_oracle, s.F2, 10)
        assert r.verdict == "PASS"
        ratio = r.series["ratio"]
        assert max(abs(v - 1) for v in ratio.column("min") + ratio.column("max")) <= 1e-10

    def test_image_gibbs_uniform(self, testcases):
        s = testcases
        zero = pot.zero(s.X)
        r = verify_image_gibbs(s.F1, MarkovMeasure.bernoulli(s.X, [1, 1, 1]), zero, 6)
        assert np.allclose(r.series["ratio"].column("max"), 1.0) and np.isclose(r.constants["pressure"], math.log(3))

    def test_image_gibbs_window2(self, testcases):
        s = testcases
        mu = gibbs.rpf_oracle(s.X, s.W2).gibbs
        r = verify_image_gibbs(s.F1, mu, s.W2, 12)
        assert r.verdict == "PASS"
        ratio = r.series["ratio"]
        spreads = [hi / lo for n, lo, hi in zip(ratio.column("n"), ratio.column("min"), ratio.column("max")) if n >= 6]
        assert max(spreads) / min(spreads) < 1.05

    def test_image_gibbs_zero_mass(self, testcases):
        s = testcases
        weights = np.ones(9)
        weights[4] = 0
        with pytest.raises(PreconditionError):
            verify_image_gibbs(s.F1, CylinderDistribution(s.X, 2, weights), s.F2, 2)

    def test_subadditivity(self, testcases):
        s = testcases
        assert verify_subadditivity(s.F1, s.F2, 8).verdict == "PASS"
        assert verify_subadditivity(s.F1, s.W2, 8).verdict == "PASS"
        assert verify_subadditivity(s.golden_map, s.golden_zero, 10).verdict == "PASS"

    def test_relative_pressure_identity(self, testcases):
        s = testcases
        y = sh.Point((0,), (1, 0))
        assert relative_pressure_identity(s.F1, s.F2, y, 10).verdict == "PASS"
        assert relative_pressure_identity(s.F1, s.W2, sh.Point((), (0,)), 8).verdict == "PASS"

    def test_multiplicativity(self, testcases):
        s = testcases
        r = first_coordinate_multiplicativity_check(s.F1, s.F2, 12)
        assert r.verdict == "PASS" and max(r.series["multiplicativity"].column("max_relative_error")) <= 1e-12
        tables = {n: image_potential(s.F1, s.F2, n) for n in (1, 2, 3)}
        assert np.isclose(tables[3].value(s.Y.parse("ABA")).hi, tables[1].value((0,)).hi + tables[2].value(s.Y.parse("BA")).hi)
        assert first_coordinate_multiplicativity_check(s.F1, pot.zero(s.X), 8).verdict == "PASS"
        with pytest.raises(PreconditionError):
            first_coordinate_multiplicativity_check(s.F1, s.W2, 4)

    def test_u_first_coordinate(self, testcases):
        s = testcases
        result = kempton_u(s.F1, s.F2, n_max=8)
        assert all(np.allclose(u, 3.0) for u in result.u_tables.values())
        assert result.report.verdict == "PASS" and max(result.sup_diffs) < 1e-12

    def test_u_zero(self, testcases):
        s = testcases
        result = kempton_u(s.F1, pot.zero(s.X), n_max=6)
        u = result.u_tables[5]
        first = np.arange(u.shape[1]) // 2**5
        assert np.allclose(u, np.where(first == 0, 2.0, 1.0)[None, :])
        # c is alone in its fiber, so u = 1 exactly on B-words and the strict lower bound fails there
        assert result.report.verdict == "FAIL"
        assert {f.check for f in result.report.failures} == {"u > 1"}
        assert all(f.witness.startswith("B") for f in result.report.failures)

    def test_u_window2_converges(self, testcases):
        s = testcases
        result = kempton_u(s.F1, s.W2, n_max=20)
        assert result.report.verdict == "PASS"
        assert min(float(u.min()) for u in result.u_tables.values()) > 1.0
        assert result.geometric_ratio < 0.9
        assert result.w_sensitivity[-1] <= 1e-8
        assert result.sup_diffs[5] < result.sup_diffs[0]

    def test_u_unsupported(self, testcases):
        with pytest.raises(UnsupportedError):
            kempton_u(testcases.golden_map, testcases.golden_zero, n_max=4)

    def test_preimage_bernoulli(self, testcases):
        s = testcases
        result = preimage_gibbs(s.F1, s.Psi, 10)
        assert np.allclose(result.mu1.distribution(1), [1 / 7, 1 / 7, 5 / 7])
        assert np.allclose(result.nu.distribution(1), [2 / 7, 5 / 7])
        assert result.pushforward_check <= 1e-10 and result.report.verdict == "PASS"
        assert result.condition.best_D == 1.0

    def test_preimage_zero(self, testcases):
        s = testcases
        result = preimage_gibbs(s.F1, pot.zero(s.Y), 6)
        assert np.allclose(result.mu1.distribution(1), [1 / 4, 1 / 4, 1 / 2])

    def test_preimage_one_symbol(self, testcases):
        s = testcases
        result = preimage_gibbs(s.golden_map, pot.zero(s.full1), 8)
        assert result.report.verdict == "PASS" and result.report.constants["measure"] == "approximant"

    def test_preimage_sft(self, testcases):
        s = testcases
        result = preimage_gibbs(s.F3, s.Psi, 8, n_check=6)
        assert result.report.verdict == "PASS" and result.report.constants["measure"] == "approximant"
        assert result.pushforward_check <= 1e-8
        assert result.report.series["pushforward"].column("n") == list(range(1, 7))
        assert np.isclose(result.condition.best_D, 0.75)
        assert np.allclose(at_level(result.nu, 1).weights, [2 / 7, 5 / 7])
        # B_2 is aa ab ac ba bc ca cb cc; the fiber over AA is aa ab ba and carries ν[AA] = 4/49,
        # ab less of it since b cannot be followed by b
        w = at_level(result.mu1, 2).weights
        assert len(w) == 8 and np.isclose(w[[0, 1, 3]].sum(), 4 / 49)
        assert np.isclose(w[0], w[3]) and w[1] < w[0]

    def test_preimage_refuses(self, testcases):
        s = testcases
        with pytest.raises(PreconditionError) as e:
            preimage_gibbs(s.decaying, pot.zero(s.full2), 10)
        assert e.value.witness

    def test_compensation(self, testcases):
        s = testcases
        assert np.allclose(compensation_function_full_shift(s.F1).values, [math.log(2), 0.0])
        assert np.allclose(compensation_function_full_shift(s.identity).values, 0.0)
        assert np.allclose(compensation_function_full_shift(s.quad).values, [math.log(3), 0.0])
        with pytest.raises(UnsupportedError):
            compensation_function_full_shift(s.golden_map)

    def test_compensation_check(self, testcases):
        s = testcases
        assert compensation_check(s.F1, MarkovMeasure.bernoulli(s.Y, [1, 3]), 8).verdict == "PASS"
        assert compensation_check(s.F1, s.F2_oracle.image(s.F1), 6).verdict == "PASS"

    def test_criterion_pulled_back(self, testcases):
        s = testcases
        r = equality_criterion_ratio(s.F1, s.Psi_pulled, 10)
        assert r.verdict == "PASS-trend" and np.isclose(r.constants["A_hat"], 1.0)
        assert equality_criterion_ratio(s.F1, pot.zero(s.X), 6).constants["A_hat"] == pytest.approx(1.0)

    def test_criterion_grows(self, testcases):
        s = testcases
        r = equality_criterion_ratio(s.F1, s.F2, 10, n_ref=4)
        assert r.verdict == "FAIL-trend" and r.constants["growth"] >= 1.2
        assert np.isclose(r.series["criterion"].column("A_n")[0], 1.5)

    def test_selector(self, testcases):
        s = testcases
        assert s.X.format(psi_selector(s.F1, s.Y.parse("AAB"))) == "aac"
        assert s.X.format(psi_selector(s.F1, s.Y.parse("BBBB"))) == "cccc"
        word = s.Y.parse("ABBA")
        assert psi_selector(s.F1, word)[1:] == psi_selector(s.F1, word[1:])

    def test_selector_image_zero(self, testcases):
        s = testcases
        result = bowen_image_potential(s.F1, pot.zero(s.X))
        assert np.allclose(result.potential.values, [math.log(2), 0.0]) and result.report.verdict == "PASS"

    def test_selector_image_fiber_constant(self, testcases):
        s = testcases
        result = bowen_image_potential(s.F1, s.Psi_pulled)
        assert np.allclose(result.potential.values, [math.log(2) + math.log(2), math.log(5)])
        assert result.report.verdict == "PASS"

    def test_selector_image_refuses(self, testcases):
        with pytest.raises(PreconditionError):
            bowen_image_potential(testcases.F1, testcases.F2, n_max=10)

    def test_relative_equilibrium(self, testcases):
        s = testcases
        assert relative_equilibrium_check(s.F1, s.F2).verdict == "PASS"
        assert relative_equilibrium_check(s.quad, pot.from_weights(s.quad.domain, [1, 1, 2, 3])).verdict == "PASS"


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

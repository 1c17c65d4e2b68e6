#!/usr/bin/env python
"""
Module gibbsmap.cli runs one verification per invocation and writes its report:

  gibbsmap pressure [--config PATH] [--out DIR] [--n-max INT] [--seed INT] [--force]
  gibbsmap relative-pressure | factor-gibbs | preimage | condition-a | ratio-criterion | u-converge | compensation | oracle
  gibbsmap run --config PATH       # the operation named in [run]
  gibbsmap run --operation mixing  # any operation on the reference systems

Without --config the reference systems of `gibbsmap.fixtures` are used with a default run per operation. A subcommand
overrides `[run].operation`, --n-max and --seed override the run table. Outputs go to --out (default `out/<operation>`):
report.json, one TSV per series and the distribution dumps of the operation, all or nothing.

Exit status: 0 for PASS, PASS-trend and INFO, 1 for FAIL and FAIL-trend, 2 when the run is refused (bad config,
a precondition verified false, over budget, unsupported setting). Set GIBBSMAP_LOGLEVEL=INFO to follow along.
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import json
import math
import os
import pathlib
import sys
import typing as t

import numpy as np
import pydantic
import fire
import box
import pytest

from gibbsmap import config, gibbs, pressure, report, resolver, transfer
from gibbsmap import codes as cd
from gibbsmap import potential as pot
from gibbsmap import shift as sh
from gibbsmap.catalog import Catalog
from gibbsmap.checker import check, BudgetError, ConfigError, GibbsMapError
from gibbsmap.gibbs import CylinderDistribution
from gibbsmap.markov import MarkovMeasure

type Handler = t.Callable[[config.RunSpec, Catalog], tuple[report.Report, dict[str, str]]]

SUBCOMMANDS = ("pressure", "relative-pressure", "factor-gibbs", "preimage", "condition-a", "ratio-criterion", "u-converge", "compensation", "oracle")

# runs on the reference systems when no config is given
DEFAULTS: dict[str, dict[str, t.Any]] = {
    "pressure": dict(shift="X", potential="F2", n_max=12, order=0),
    "relative-pressure": dict(map="F1", potential="F2", n_max=10, y={"cycle": "A"}),
    "factor-gibbs": dict(map="F1", potential="F2", n_max=10),
    "preimage": dict(map="F1", potential="Psi", n_max=10),
    "condition-a": dict(map="F1", n_max=12),
    "ratio-criterion": dict(map="F1", potential="F2", n_max=10),
    "u-converge": dict(map="F1", potential="W2", n_max=20),
    "compensation": dict(map="F1", potential="Psi", n_max=10),
    "oracle": dict(shift="golden", potential="golden_zero", n_max=12),
    "pressure-equality": dict(map="F1", potential="F2", n_max=12),
    "subadditivity": dict(map="F1", potential="F2", n_max=10),
    "multiplicativity": dict(map="F1", potential="F2", n_max=12),
    "selector-image": dict(map="F1", potential="PsiF1", n_max=8),
    "relative-equilibrium": dict(map="F1", potential="F2"),
    "mixing": dict(map="F1", potential="F2", n_words=2, t_min=3, t_max=12),
}

SUMMARIES = {
    "pressure": "pressure series {n, estimate, lo, hi} with brackets of the potential on a shift",
    "relative-pressure": "relative pressure terms over a point y of the factor",
    "factor-gibbs": "Gibbs ratio envelope of the image measure against the tilted image potential",
    "preimage": "Gibbs measure of Psi∘π - log φ̃∘π and its pushforward against the Gibbs measure of Psi",
    "condition-a": "Condition A ratios D_L and submultiplicativity of the preimage counts",
    "ratio-criterion": "growth of A_n, the fiber ratio criterion for equal equilibrium states",
    "u-converge": "convergence of the u-iteration for the image potential",
    "compensation": "the closed-form compensation function against preimage counts",
    "oracle": "exact Gibbs measure of an additive potential on a mixing SFT against the brackets",
}


def _required(run: config.RunSpec, field: str) -> t.Any:
    value = getattr(run, field)
    if value is None:
        raise ConfigError(f"{run.operation} needs run.{field}", [f"run.{field}"])
    return value


def _potential(run: config.RunSpec, catalog: Catalog) -> pot.Potential:
    return catalog.potential(_required(run, "potential"))


def _factor(run: config.RunSpec, catalog: Catalog) -> cd.FactorMap:
    return catalog.map(_required(run, "map"))


def _shift(run: config.RunSpec, catalog: Catalog, p: pot.Potential) -> sh.Subshift:
    if run.shift is None:
        return p.shift
    shift = catalog.shift(run.shift)
    if p.shift is not shift:
        raise ConfigError(f"run.potential {p.name} lives on {p.shift.name}, not on {shift.name}", ["run.potential", "run.shift"])
    return shift


def _domain(run: config.RunSpec, catalog: Catalog) -> sh.Subshift:
    if run.map is not None:
        return catalog.map(run.map).domain
    if run.shift is not None:
        return catalog.shift(run.shift)
    return _potential(run, catalog).shift


def _dump(dist: CylinderDistribution) -> str:
    return report.distribution_tsv(dist.words(), dist.weights, dist.level, dist.shift.name, dist.provenance)


def _dump_level(run: config.RunSpec) -> int:
    return min(run.dump_level, run.n_max)


def estimate_cost(run: config.RunSpec, catalog: Catalog) -> float:
    """Words enumerated at the top level: |A_X|^n_max, |A_Y|^(n_max+1) |A_X|^(k-1) for the u-iteration."""
    if run.operation == "u-converge":
        factor = _factor(run, catalog)
        form = _potential(run, catalog).additive_form()
        window = form.window if form is not None else 1
        return float(factor.codomain.alphabet_size) ** (run.n_max + 1) * float(factor.domain.alphabet_size) ** (window - 1)
    return float(_domain(run, catalog).alphabet_size) ** run.n_max


def _pressure(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    p = _potential(run, catalog)
    shift = _shift(run, catalog, p)
    r = pressure.pressure_report(shift, p, run.n_max, run.n_min, markov_order=run.order, seed=run.seed, steps=run.steps, method=run.method)
    level = _dump_level(run)
    approximant = gibbs.gibbs_approximant(shift, p, level, pressure.pressure_estimate(shift, p, level))
    return r, {"approximant.tsv": _dump(approximant)}


def _relative_pressure(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    factor = _factor(run, catalog)
    y = _required(run, "y").point(factor.codomain)
    return pressure.relative_pressure_report(factor, _potential(run, catalog), y, run.n_max), {}


def _factor_gibbs(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    factor, p = _factor(run, catalog), _potential(run, catalog)
    mu, P, source = transfer.gibbs_measure(factor.domain, p, run.n_max)
    r = transfer.verify_image_gibbs(factor, mu, p, run.n_max, P)
    r.constants["measure"] = source
    level = _dump_level(run)
    table = transfer.image_potential(factor, p, level, -P)
    image = gibbs.pushforward(transfer.at_level(mu, level), factor)
    return r, {"g_tilde.tsv": table.to_tsv(), "pushforward.tsv": _dump(image)}


def _preimage(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    result = transfer.preimage_gibbs(_factor(run, catalog), _potential(run, catalog), run.n_max, run.n_check, run.tolerance)
    level = _dump_level(run)
    return result.report, {"mu1.tsv": _dump(transfer.at_level(result.mu1, level)), "nu.tsv": _dump(transfer.at_level(result.nu, level))}


def _condition_a(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    return cd.condition_report(_factor(run, catalog), run.n_max, run.floor), {}


def _ratio_criterion(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    return transfer.equality_criterion_ratio(_factor(run, catalog), _potential(run, catalog), run.n_max, growth_limit=run.growth_limit), {}


def _u_converge(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    factor = _factor(run, catalog)
    tails = [spec.point(factor.domain) for spec in run.tails] if run.tails else None
    return transfer.kempton_u(factor, _potential(run, catalog), tails, run.n_max).report, {}


def _compensation(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    factor = _factor(run, catalog)
    Y = factor.codomain
    if run.potential is not None:
        q = _potential(run, catalog)
        check(q.shift is Y, f"run.potential {q.name} must live on {Y.name}", ConfigError)
        measure = gibbs.rpf_oracle(Y, q).gibbs
    else:
        measure = MarkovMeasure.bernoulli(Y, np.ones(Y.alphabet_size))
    return transfer.compensation_check(factor, measure, run.n_max), {}


def _oracle(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    p = _potential(run, catalog)
    shift = _shift(run, catalog, p)
    r = gibbs.oracle_report(shift, p, run.n_max)
    oracle = gibbs.rpf_oracle(shift, p)
    return r, {"oracle.tsv": _dump(CylinderDistribution.from_measure(oracle.gibbs, _dump_level(run), "oracle"))}


def _pressure_equality(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    return transfer.verify_pressure_equality(_factor(run, catalog), _potential(run, catalog), run.n_max), {}


def _subadditivity(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    return transfer.verify_subadditivity(_factor(run, catalog), _potential(run, catalog), run.n_max), {}


def _multiplicativity(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    return transfer.first_coordinate_multiplicativity_check(_factor(run, catalog), _potential(run, catalog), run.n_max), {}


def _selector_image(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    n_check = run.n_check or min(6, run.n_max)
    result = transfer.bowen_image_potential(_factor(run, catalog), _potential(run, catalog), run.n_max, n_check, run.growth_limit, run.tolerance)
    return result.report, {"criterion.tsv": report.to_tsv(result.criterion.series["criterion"])}


def _relative_equilibrium(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    return transfer.relative_equilibrium_check(_factor(run, catalog), _potential(run, catalog), seed=run.seed), {}


def _mixing(run: config.RunSpec, catalog: Catalog) -> tuple[report.Report, dict[str, str]]:
    p = _potential(run, catalog)
    if run.map is not None:
        factor = _factor(run, catalog)
        measure = gibbs.rpf_oracle(factor.domain, p).gibbs.image(factor)
    else:
        measure = gibbs.rpf_oracle(_shift(run, catalog, p), p).gibbs
    pairs = [(measure.shift.parse(run.u), measure.shift.parse(run.v))] if run.u is not None else None
    t_range = range(run.t_min, run.t_max + 1)
    return gibbs.mixing_report(measure, run.n_words, t_range, run.gap, run.floor, pairs), {}


HANDLERS: dict[str, Handler] = {
    "pressure": _pressure,
    "relative-pressure": _relative_pressure,
    "factor-gibbs": _factor_gibbs,
    "preimage": _preimage,
    "condition-a": _condition_a,
    "ratio-criterion": _ratio_criterion,
    "u-converge": _u_converge,
    "compensation": _compensation,
    "oracle": _oracle,
    "pressure-equality": _pressure_equality,
    "subadditivity": _subadditivity,
    "multiplicativity": _multiplicativity,
    "selector-image": _selector_image,
    "relative-equilibrium": _relative_equilibrium,
    "mixing": _mixing,
}


def execute(run: config.RunSpec, catalog: Catalog, out: str | os.PathLike | None = None, force: bool = False) -> tuple[report.Verdict, list[str], report.Report]:
    """
    Run one operation and write its files.
    :param out: output directory, nothing is written when None
    :param force: run even when the estimated cost is over run.budget
    :return: verdict, written paths, the report
    """
    cost = estimate_cost(run, catalog)
    if cost > run.budget and not force:
        raise BudgetError(f"{run.operation}: about {cost:.3g} words to enumerate, budget {run.budget:.3g}; --force to run anyway", cost)
    logger.info("%s: n_max %d, estimated %.3g words", run.operation, run.n_max, cost)
    r, extra = HANDLERS[run.operation](run, catalog)
    paths = report.write_report(str(out), r, extra) if out is not None else []
    return r.verdict, paths, r


def status(verdict: report.Verdict) -> int:
    return 1 if verdict in ("FAIL", "FAIL-trend") else 0


def prepare(
    operation: str | None, config_path: str | None = None, out: str | None = None, n_max: int | None = None, seed: int | None = None
) -> tuple[config.RunSpec, Catalog, str]:
    """The run table, the catalog it refers to and the output directory, flags applied over the config."""
    if config_path:
        experiment = config.load(config_path)
        catalog = resolver.Resolver(experiment).resolve()
        run, out = experiment.run, out or experiment.out
    else:
        check(operation is not None, "run needs --config or --operation", ConfigError)
        check(operation in DEFAULTS, f"unknown operation {operation!r}, one of {sorted(DEFAULTS)}", ConfigError)
        catalog, run = Catalog.from_fixtures(), config.RunSpec(operation=operation, **DEFAULTS[operation])
    overrides = {k: v for k, v in dict(operation=operation, n_max=n_max, seed=seed).items() if v is not None}
    if overrides:
        try:
            run = config.RunSpec.model_validate({**run.model_dump(), **overrides})
        except pydantic.ValidationError as e:
            raise ConfigError("invalid command line override", [f"run.{field}" for field in config._fields(e)]) from e
    return run, catalog, out or os.path.join("out", run.operation)


def _command(operation: str | None, config_path: str | None, out: str | None, n_max: int | None, seed: int | None, force: bool) -> int:
    try:
        run, catalog, out = prepare(operation, config_path, out, n_max, seed)
        verdict, paths, _ = execute(run, catalog, out, force)
    except GibbsMapError as e:
        witness = getattr(e, "witness", None)
        logger.error("%s refused: %s", operation or "run", e)
        print(f"gibbsmap {operation or 'run'}: {e}" + (f" (witness {witness})" if witness else ""), file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    print(verdict)
    return status(verdict)


def _subcommand(operation: str) -> t.Callable[..., None]:
    def command(config: str | None = None, out: str | None = None, n_max: int | None = None, seed: int | None = None, force: bool = False) -> None:
        raise SystemExit(_command(operation, config, out, n_max, seed, force))

    command.__name__ = operation.replace("-", "_")
    command.__doc__ = f"{SUMMARIES[operation]}; --config PATH --out DIR --n-max INT --seed INT --force"
    return command


def run(config: str | None = None, operation: str | None = None, out: str | None = None, n_max: int | None = None, seed: int | None = None, force: bool = False) -> None:
    """The operation of the config's [run] table (or --operation on the reference systems)."""
    raise SystemExit(_command(operation, config, out, n_max, seed, force))


SAMPLE = """
spec_version = "1"

[shifts.X]
alphabet = "abc"

[shifts.Y]
alphabet = "AB"

[maps.F1]
domain = "X"
codomain = "Y"
symbol_map = { a = "A", b = "A", c = "B" }

[potentials.Psi]
shift = "Y"
weights = [2, 5]

[run]
operation = "preimage"
map = "F1"
potential = "Psi"
n_max = 8
"""


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return box.Box(catalog=Catalog.from_fixtures(), sample=SAMPLE)


def _default(operation: str, **changes) -> config.RunSpec:
    return config.RunSpec(operation=operation, **{**DEFAULTS[operation], **changes})


class Tests:
    """
    Every operation end to end on the reference systems. Run with: `python -m gibbsmap.cli pt` or `pytest gibbsmap/cli.py`
    """

    def test_defaults_cover_operations(self, testcases):
        assert set(DEFAULTS) == set(config.OPERATIONS) == set(HANDLERS)
        assert set(SUBCOMMANDS) <= set(SUMMARIES)

    def test_pressure(self, testcases, tmp_path):
        verdict, paths, r = execute(_default("pressure"), testcases.catalog, tmp_path)
        assert verdict == "PASS"
        estimates = r.series["pressure"].column("estimate")
        assert len(estimates) == 12 and abs(estimates[-1] - math.log(6)) <= 1e-12
        assert abs(r.constants["markov_bound"] - math.log(6)) <= 1e-9
        names = sorted(pathlib.Path(p).name for p in paths)
        assert names == ["approximant.tsv", "pressure.F2.pressure.tsv", "report.json"]
        table = (tmp_path / "pressure.F2.pressure.tsv").read_text()
        assert table.startswith("n\testimate\tlo\thi\n") and "\r" not in table

    def test_factor_gibbs(self, testcases, tmp_path):
        verdict, paths, r = execute(_default("factor-gibbs"), testcases.catalog, tmp_path)
        assert verdict == "PASS" and r.constants["measure"] == "oracle"
        assert np.allclose(r.series["ratio"].column("min"), 1.0, atol=1e-10)
        assert np.allclose(r.series["ratio"].column("max"), 1.0, atol=1e-10)
        assert (tmp_path / "g_tilde.tsv").read_text().startswith("# level=4\n")

    def test_preimage(self, testcases):
        verdict, _, r = execute(_default("preimage"), testcases.catalog)
        assert verdict == "PASS" and r.constants["measure"] == "oracle"

    def test_condition_a(self, testcases):
        assert execute(_default("condition-a"), testcases.catalog)[0] == "PASS-trend"
        verdict, _, _ = execute(_default("condition-a", map="decaying", n_max=10), testcases.catalog)
        assert status(verdict) == 1

    def test_ratio_criterion(self, testcases):
        grows = execute(_default("ratio-criterion"), testcases.catalog)[2]
        assert grows.verdict == "FAIL-trend" and grows.constants["growth"] >= 1.2
        assert execute(_default("ratio-criterion", potential="PsiF1"), testcases.catalog)[0] == "PASS-trend"

    def test_u_converge(self, testcases):
        verdict, _, r = execute(_default("u-converge", n_max=10), testcases.catalog)
        assert verdict == "PASS"
        sup_diff = [d for d in r.series["u"].column("sup_diff") if d is not None]
        assert sup_diff[-1] < sup_diff[0] and r.constants["geometric_ratio"] < 0.9

    def test_other_operations(self, testcases):
        for operation in ("relative-pressure", "compensation", "oracle", "subadditivity", "multiplicativity", "selector-image", "relative-equilibrium"):
            verdict, _, _ = execute(_default(operation, n_max=min(8, DEFAULTS[operation].get("n_max", 8))), testcases.catalog)
            assert status(verdict) == 0, operation

    def test_pressure_equality(self, testcases):
        assert execute(_default("pressure-equality", n_max=8), testcases.catalog)[0] == "PASS"

    def test_mixing(self, testcases):
        verdict, _, r = execute(_default("mixing"), testcases.catalog)
        assert verdict == "PASS-trend" and r.constants["C_tilde"] >= 0.99
        assert r.series["mixing"].column("t") == list(range(3, 13))

    def test_mixing_word_lengths(self, testcases):
        for n_words in range(1, 5):
            verdict, _, r = execute(_default("mixing", n_words=n_words), testcases.catalog)
            assert verdict == "PASS-trend" and r.constants["C_tilde"] >= 0.99, n_words
            assert r.series["mixing"].column("t") == [t_ for t_ in range(3, 13) if t_ > n_words]

    def test_budget(self, testcases):
        big = _default("pressure", n_max=20)
        assert estimate_cost(big, testcases.catalog) == 3.0**20
        with pytest.raises(BudgetError) as e:
            execute(big, testcases.catalog)
        assert e.value.estimate == 3.0**20
        assert estimate_cost(_default("u-converge"), testcases.catalog) == 2.0**21 * 3.0

    def test_missing_field(self, testcases):
        with pytest.raises(ConfigError) as e:
            execute(_default("relative-pressure", y=None), testcases.catalog)
        assert e.value.fields == ["run.y"]

    def test_prepare_overrides(self, testcases):
        run_, _, out = prepare("pressure", n_max=5, seed=3)
        assert run_.n_max == 5 and run_.seed == 3 and out == os.path.join("out", "pressure")
        with pytest.raises(ConfigError) as e:
            prepare("pressure", n_max=0)
        assert e.value.fields == ["run.n_max"]
        with pytest.raises(ConfigError):
            prepare(None)

    def test_config_reproducible(self, testcases, tmp_path):
        path = tmp_path / "experiment.toml"
        path.write_text(testcases.sample)
        first, second = tmp_path / "first", tmp_path / "second"
        assert _command(None, str(path), str(first), None, None, False) == 0
        assert _command(None, str(path), str(second), None, None, False) == 0
        names = sorted(p.name for p in first.iterdir())
        assert "report.json" in names and names == sorted(p.name for p in second.iterdir())
        assert all((first / n).read_bytes() == (second / n).read_bytes() for n in names)
        assert json.loads((first / "report.json").read_text())["verdict"] == "PASS"

    def test_refusals_exit_2(self, testcases, tmp_path):
        assert _command(None, str(tmp_path / "missing.toml"), str(tmp_path), None, None, False) == 2
        assert _command("pressure", None, str(tmp_path / "big"), 20, None, False) == 2
        assert not (tmp_path / "big").exists()


def version(*rest: tuple[str]) -> str:
    """
    Report the version of this module a.k.a. `__version__` (if it's supplied)
    :param rest: ignored
    :return: None
    """
    return globals().get("__version__", "unknown")


def about(*rest: tuple[str]):
    """
    Describe this module using the module docstring.
    :param *rest: ignored
    :return:
    """
    print(__doc__)


def pt(*rest: tuple[str]) -> int:
    """
    Run all pytests in class Tests in this module. Keeps implementation and testcases together in a single file.
    :param *rest: additional arguments to pytest.main(), not actually used yet
    :return: 0 if all tests pass, >0 otherwise (whatever pytest.main() returns)
    """
    return pytest.main(["--verbose", *sys.argv[2:], __file__])


def main():
    """
    The main entry point for the command line interface, run directly via the `gibbsmap` script.
    :return:
    """
    level = os.environ.get("GIBBSMAP_LOGLEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    commands = {operation: _subcommand(operation) for operation in SUBCOMMANDS}
    commands.update(run=run, version=version, about=about, pt=pt)
    return fire.Fire(commands)


# from the command line:
#  directly: chmod a+x gibbsmap/cli.py; PYTHONPATH=. ./gibbsmap/cli.py pressure
#  as a module: python -m gibbsmap.cli factor-gibbs --n-max 8
if __name__ == "__main__":
    main()

#!/usr/bin/env python
"""
Module config reads an experiment file (TOML) into pydantic models. A file names its shifts, maps and potentials in
tables and says what to do with them in `[run]`:

  spec_version = "1"
  [shifts.X]
  alphabet = "abc"
  [shifts.Y]
  alphabet = "AB"
  [maps.F1]
  domain = "X"
  codomain = "Y"
  symbol_map = { a = "A", b = "A", c = "B" }
  [potentials.F2]
  shift = "X"
  weights = [1, 2, 3]
  [run]
  operation = "factor-gibbs"
  map = "F1"
  potential = "F2"
  n_max = 10

Schema and syntax failures become `ConfigError` listing the offending fields (dotted paths).

cli usage: `python -m gibbsmap.config validate configs/f2_f1.toml` or `python -m gibbsmap.config section configs/f2_f1.toml run`
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import os
import pprint
import sys
import typing as t

import pydantic
import toml
import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap.checker import ConfigError

type Operation = t.Literal[
    "pressure",
    "relative-pressure",
    "factor-gibbs",
    "preimage",
    "condition-a",
    "ratio-criterion",
    "u-converge",
    "compensation",
    "oracle",
    "pressure-equality",
    "subadditivity",
    "multiplicativity",
    "selector-image",
    "relative-equilibrium",
    "mixing",
]
OPERATIONS: tuple[str, ...] = t.get_args(Operation.__value__)


class Strict(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid", frozen=True)


class LabeledGraph(Strict):
    states: list[str | int]
    edges: list[tuple[str | int, str | int, str]]


class ShiftSpec(Strict):
    alphabet: str | list[str]
    kind: t.Literal["full", "sft", "sofic"] = "full"
    transition_matrix: list[list[int]] | None = None
    labeled_graph: LabeledGraph | None = None

    @property
    def symbols(self) -> list[str]:
        """A string alphabet is one symbol per character."""
        return list(self.alphabet) if isinstance(self.alphabet, str) else list(self.alphabet)

    @pydantic.model_validator(mode="after")
    def _presentation(self) -> ShiftSpec:
        match self.kind:
            case "full":
                if self.transition_matrix is not None or self.labeled_graph is not None:
                    raise ValueError("a full shift takes neither transition_matrix nor labeled_graph")
            case "sft":
                if self.transition_matrix is None or self.labeled_graph is not None:
                    raise ValueError("an sft needs transition_matrix and no labeled_graph")
            case "sofic":
                if self.labeled_graph is None or self.transition_matrix is not None:
                    raise ValueError("a sofic shift needs labeled_graph and no transition_matrix")
        return self


class MapSpec(Strict):
    domain: str
    codomain: str
    symbol_map: list[tuple[str, str]] | dict[str, str]
    verify_length: int = pydantic.Field(8, ge=1)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return list(self.symbol_map.items()) if isinstance(self.symbol_map, dict) else list(self.symbol_map)


class DerivedSpec(Strict):
    construction: t.Literal["compose", "quotient", "tilt", "zero"]
    source: str | None = None
    map: str | None = None
    per_step_log: float | None = None

    @pydantic.model_validator(mode="after")
    def _arguments(self) -> DerivedSpec:
        needs = {"compose": ("source", "map"), "quotient": ("source", "map"), "tilt": ("source", "per_step_log"), "zero": ()}[self.construction]
        missing = [name for name in needs if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.construction} needs {', '.join(missing)}")
        return self


class PotentialSpec(Strict):
    shift: str | None = None
    window: int = pydantic.Field(1, ge=1)
    log_values: list[float] | dict[str, float] | None = None
    weights: list[pydantic.PositiveFloat] | None = None
    derived: DerivedSpec | None = None
    C: float | None = pydantic.Field(None, ge=0)
    M: float | None = pydantic.Field(None, ge=1)

    @pydantic.model_validator(mode="after")
    def _one_source(self) -> PotentialSpec:
        given = [name for name in ("log_values", "weights", "derived") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"exactly one of log_values, weights, derived is required, got {given or 'none'}")
        if self.weights is not None and self.window != 1:
            raise ValueError("weights define a window-1 potential")
        constructed = self.derived is not None and self.derived.construction != "zero"
        if self.shift is None and not constructed:
            raise ValueError("shift is required")
        return self


class PointSpec(Strict):
    """prefix·cycle^∞ in the symbols of the shift it lives on."""

    prefix: str = ""
    cycle: str

    def point(self, shift: sh.Subshift) -> sh.Point:
        return sh.Point(shift.parse(self.prefix) if self.prefix else (), shift.parse(self.cycle))


class RunSpec(Strict):
    operation: Operation
    shift: str | None = None
    map: str | None = None
    potential: str | None = None
    n_max: int = pydantic.Field(8, ge=1)
    n_min: int = pydantic.Field(1, ge=1)
    seed: int = 0
    order: int | None = pydantic.Field(None, ge=0)
    steps: int = pydantic.Field(500, ge=1)
    method: t.Literal["fixed-point", "gradient"] = "fixed-point"
    tails: list[PointSpec] | None = None
    y: PointSpec | None = None
    u: str | None = None
    v: str | None = None
    n_words: int = pydantic.Field(2, ge=1)
    gap: int = pydantic.Field(0, ge=0)
    t_min: int = pydantic.Field(1, ge=1)
    t_max: int = pydantic.Field(12, ge=1)
    floor: float = 0.0
    growth_limit: float = pydantic.Field(1.2, gt=1)
    tolerance: float = pydantic.Field(1e-10, gt=0)
    budget: float = pydantic.Field(1e8, gt=0)
    n_check: int | None = pydantic.Field(None, ge=1)
    dump_level: int = pydantic.Field(4, ge=1)

    @pydantic.model_validator(mode="after")
    def _ranges(self) -> RunSpec:
        if self.n_min > self.n_max:
            raise ValueError(f"n_min {self.n_min} > n_max {self.n_max}")
        if self.t_min > self.t_max:
            raise ValueError(f"t_min {self.t_min} > t_max {self.t_max}")
        if (self.u is None) != (self.v is None):
            raise ValueError("u and v go together")
        return self


class ExperimentConfig(Strict):
    spec_version: t.Literal["1"]
    shifts: dict[str, ShiftSpec] = {}
    maps: dict[str, MapSpec] = {}
    potentials: dict[str, PotentialSpec] = {}
    run: RunSpec
    out: str | None = None


def _fields(e: pydantic.ValidationError) -> list[str]:
    return sorted({".".join(str(part) for part in error["loc"]) or "(root)" for error in e.errors()})


def parse(document: t.Mapping[str, t.Any], source: str = "<config>") -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(document)
    except pydantic.ValidationError as e:
        for error in e.errors():
            logger.debug("%s: %s at %s", source, error["msg"], error["loc"])
        raise ConfigError(f"{source}: invalid experiment config", _fields(e)) from e


def _document(pathname: str | os.PathLike) -> dict:
    try:
        with open(pathname, "r") as f:
            return toml.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"{pathname}: no such config file") from e
    except toml.TomlDecodeError as e:
        raise ConfigError(f"{pathname}: not TOML ({e})") from e


def load(pathname: str | os.PathLike) -> ExperimentConfig:
    config = parse(_document(pathname), str(pathname))
    logger.info("%s: %d shifts, %d maps, %d potentials, operation %s", pathname, len(config.shifts), len(config.maps), len(config.potentials), config.run.operation)
    return config


def section(pathname: str | os.PathLike, sectionpath: str) -> dict:
    """The table at a dotted path, e.g. 'run' or 'potentials.F2'."""
    s = _document(pathname)
    for part in sectionpath.split("."):
        if not isinstance(s, dict) or part not in s:
            raise ConfigError(f"{pathname}: no table {sectionpath}", [sectionpath])
        s = s[part]
    return s


SAMPLE = """
spec_version = "1"

[shifts.X]
alphabet = "abc"

[shifts.Y]
alphabet = "AB"

[shifts.golden]
alphabet = "01"
kind = "sft"
transition_matrix = [[1, 1], [1, 0]]

[maps.F1]
domain = "X"
codomain = "Y"
symbol_map = { a = "A", b = "A", c = "B" }

[potentials.F2]
shift = "X"
weights = [1, 2, 3]

[potentials.Psi]
shift = "Y"
log_values = { A = 0.6931471805599453, B = 1.6094379124341003 }

[potentials.Phi1]
derived = { construction = "quotient", source = "Psi", map = "F1" }

[run]
operation = "preimage"
map = "F1"
potential = "Psi"
n_max = 10
y = { cycle = "A" }
"""


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return box.Box(sample=toml.loads(SAMPLE))


class Tests:
    def test_sample(self, testcases):
        config = parse(testcases.sample)
        assert config.run.operation == "preimage" and config.run.n_max == 10
        assert config.maps["F1"].pairs == [("a", "A"), ("b", "A"), ("c", "B")]
        assert config.shifts["X"].symbols == ["a", "b", "c"]
        assert config.potentials["Phi1"].derived.construction == "quotient"
        assert config.run.budget == 1e8

    def test_point(self, testcases):
        spec = PointSpec(prefix="B", cycle="AB")
        Y = sh.build_full_shift(2, "AB")
        assert spec.point(Y) == sh.Point((1,), (0, 1))

    def test_version_required(self, testcases):
        document = dict(testcases.sample)
        del document["spec_version"]
        with pytest.raises(ConfigError) as e:
            parse(document)
        assert e.value.fields == ["spec_version"]
        with pytest.raises(ConfigError):
            parse({**testcases.sample, "spec_version": "2"})

    def test_offending_fields(self, testcases):
        document = toml.loads(SAMPLE)
        document["potentials"]["F2"]["log_values"] = [0.0, 0.0, 0.0]
        document["shifts"]["golden"].pop("transition_matrix")
        document["run"]["n_max"] = 0
        with pytest.raises(ConfigError) as e:
            parse(document)
        assert e.value.fields == ["potentials.F2", "run.n_max", "shifts.golden"]

    def test_unknown_key(self, testcases):
        document = toml.loads(SAMPLE)
        document["run"]["nmax"] = 4
        with pytest.raises(ConfigError) as e:
            parse(document)
        assert "run.nmax" in e.value.fields

    def test_derived_arguments(self, testcases):
        with pytest.raises(pydantic.ValidationError):
            DerivedSpec(construction="tilt", source="F2")
        assert DerivedSpec(construction="zero").source is None

    def test_load(self, testcases, tmp_path):
        path = tmp_path / "experiment.toml"
        path.write_text(SAMPLE)
        assert load(path).potentials["F2"].weights == [1, 2, 3]
        assert section(path, "potentials.F2")["shift"] == "X"
        with pytest.raises(ConfigError):
            section(path, "potentials.nothing")

    def test_not_toml(self, testcases, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("spec_version = \n")
        with pytest.raises(ConfigError, match="not TOML"):
            load(path)
        with pytest.raises(ConfigError, match="no such"):
            load(tmp_path / "missing.toml")


def validate(pathname: str) -> str:
    """Validate a config file; prints the run table."""
    config = load(pathname)
    pprint.pprint(config.run.model_dump(exclude_none=True))
    return "ok"


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

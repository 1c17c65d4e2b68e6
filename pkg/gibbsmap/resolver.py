#!/usr/bin/env python
"""
Module resolver turns an `ExperimentConfig` into a `catalog.Catalog`. Every shift, map and potential is a node of a
networkx DiGraph with an edge from each object to the objects that refer to it; construction follows a topological
order of that graph. Unknown names and cycles (potentials derived from each other) are `ConfigError`s naming the
offending fields, and so is any failure while building an object.

python usage:
  from gibbsmap import config, resolver
  catalog = resolver.Resolver(config.load("configs/f2_f1.toml")).resolve()
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import math
import sys
import typing as t

import networkx as nx
import numpy as np
import toml
import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap import codes, config, potential as pot
from gibbsmap.catalog import Catalog
from gibbsmap.checker import ConfigError, GibbsMapError


class Resolver:
    def __init__(self, experiment: config.ExperimentConfig, base: Catalog | None = None) -> None:
        """
        :param experiment: validated config
        :param base: already built objects config names may refer to
        """
        self.experiment = experiment
        self.base = base or Catalog()

    @staticmethod
    def make(experiment: config.ExperimentConfig, base: Catalog | None = None) -> Resolver:
        return Resolver(experiment, base)

    def _references(self) -> t.Iterator[tuple[str, str, str]]:
        """(field, referenced table, referenced name) for every reference in the config."""
        e = self.experiment
        for name, m in e.maps.items():
            yield f"maps.{name}.domain", "shifts", m.domain
            yield f"maps.{name}.codomain", "shifts", m.codomain
        for name, p in e.potentials.items():
            if p.shift is not None:
                yield f"potentials.{name}.shift", "shifts", p.shift
            if p.derived is not None:
                if p.derived.source is not None:
                    yield f"potentials.{name}.derived.source", "potentials", p.derived.source
                if p.derived.map is not None:
                    yield f"potentials.{name}.derived.map", "maps", p.derived.map
        for field, table in (("shift", "shifts"), ("map", "maps"), ("potential", "potentials")):
            if (name := getattr(e.run, field)) is not None:
                yield f"run.{field}", table, name

    def graph(self) -> nx.DiGraph:
        """Config objects as nodes `table.name`, an edge from each referenced object to the one referring to it."""
        G = nx.DiGraph()
        for table in ("shifts", "maps", "potentials"):
            G.add_nodes_from(f"{table}.{name}" for name in getattr(self.experiment, table))
        missing = []
        for field, table, name in self._references():
            node = f"{table}.{name}"
            if node in G:
                if not field.startswith("run."):
                    G.add_edge(node, ".".join(field.split(".")[:2]))
            elif name not in getattr(self.base, table):
                missing.append(field)
        if missing:
            raise ConfigError("references to undefined names", sorted(missing))
        try:
            cycle = nx.find_cycle(G)
            raise ConfigError("potentials derived from each other", sorted({u for u, _ in cycle}))
        except nx.NetworkXNoCycle:
            pass
        return G

    def order(self) -> list[str]:
        return list(nx.lexicographical_topological_sort(self.graph()))

    def resolve(self) -> Catalog:
        """Build every config object in dependency order into a new catalog that starts with the base entries."""
        catalog = Catalog(dict(self.base.items()))
        for node in self.order():
            table, name = node.split(".", 1)
            try:
                catalog.add(name, getattr(self, f"_build_{table}")(name, catalog))
            except ConfigError:
                raise
            except GibbsMapError as e:
                raise ConfigError(f"{node}: {e}", [node]) from e
        logger.info("resolved %r", catalog)
        return catalog

    def _find(self, catalog: Catalog, table: str, name: str) -> t.Any:
        return getattr(catalog, table)[name]

    def _build_shifts(self, name: str, catalog: Catalog) -> sh.Subshift:
        spec = self.experiment.shifts[name]
        symbols = spec.symbols
        match spec.kind:
            case "full":
                return sh.build_full_shift(len(symbols), symbols, name=name)
            case "sft":
                return sh.build_sft(spec.transition_matrix, symbols, name=name)
            case "sofic":
                return sh.build_sofic(symbols, spec.labeled_graph.states, spec.labeled_graph.edges, name=name)

    def _build_maps(self, name: str, catalog: Catalog) -> codes.FactorMap:
        spec = self.experiment.maps[name]
        domain, codomain = self._find(catalog, "shifts", spec.domain), self._find(catalog, "shifts", spec.codomain)
        return codes.FactorMap.from_pairs(domain, codomain, spec.pairs, spec.verify_length, name=name)

    def _build_potentials(self, name: str, catalog: Catalog) -> pot.Potential:
        spec = self.experiment.potentials[name]
        shift = self._find(catalog, "shifts", spec.shift) if spec.shift is not None else None
        if spec.weights is not None:
            p = pot.from_weights(shift, spec.weights, name=name)
        elif spec.log_values is not None:
            p = pot.from_single_function(shift, spec.window, spec.log_values, name=name)
        else:
            p = self._derive(spec.derived, shift, catalog)
        if shift is not None and p.shift is not shift:
            raise ConfigError(f"potentials.{name} is built on {p.shift.name}, not on shift {shift.name}", [f"potentials.{name}.shift"])
        p = p.overridden(spec.C, spec.M)
        p.name = name
        return p

    def _derive(self, spec: config.DerivedSpec, shift: sh.Subshift | None, catalog: Catalog) -> pot.Potential:
        source = self._find(catalog, "potentials", spec.source) if spec.source is not None else None
        factor = self._find(catalog, "maps", spec.map) if spec.map is not None else None
        match spec.construction:
            case "zero":
                return pot.zero(shift)
            case "compose":
                return pot.compose_with_factor(source, factor)
            case "quotient":
                if not (isinstance(source, pot.Composition) and source.factor is factor):
                    source = pot.compose_with_factor(source, factor)
                return pot.quotient_by_count(source, factor, max(2, self.experiment.run.n_max))
            case "tilt":
                return pot.tilt(source, spec.per_step_log)


EXPERIMENT = """
spec_version = "1"

[shifts.X]
alphabet = "abc"

[shifts.Y]
alphabet = "AB"

[shifts.golden]
alphabet = ["0", "1"]
kind = "sft"
transition_matrix = [[1, 1], [1, 0]]

[shifts.even]
alphabet = "ab"
kind = "sofic"
labeled_graph = { states = ["p", "q"], edges = [["p", "p", "a"], ["p", "q", "b"], ["q", "p", "b"]] }

[maps.F1]
domain = "X"
codomain = "Y"
symbol_map = [["a", "A"], ["b", "A"], ["c", "B"]]

[potentials.F2]
shift = "X"
weights = [1, 2, 3]

[potentials.Psi]
shift = "Y"
weights = [2, 5]

[potentials.Phi1]
derived = { construction = "quotient", source = "Psi", map = "F1" }

[potentials.Tilted]
derived = { construction = "tilt", source = "Phi1", per_step_log = -1.0 }
M = 1.0

[potentials.flat]
shift = "golden"
derived = { construction = "zero" }

[run]
operation = "preimage"
map = "F1"
potential = "Psi"
"""


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return box.Box(document=toml.loads(EXPERIMENT))


def _experiment(document: dict) -> config.ExperimentConfig:
    return config.parse(document)


class Tests:
    def test_order(self, testcases):
        order = Resolver(_experiment(testcases.document)).order()
        assert order.index("shifts.X") < order.index("maps.F1") < order.index("potentials.Phi1") < order.index("potentials.Tilted")
        assert order.index("potentials.Psi") < order.index("potentials.Phi1")

    def test_resolve(self, testcases):
        catalog = Resolver.make(_experiment(testcases.document)).resolve()
        X, Y = catalog.shift("X"), catalog.shift("Y")
        assert catalog.map("F1").domain is X and catalog.map("F1").codomain is Y
        assert catalog.potential("F2").shift is X and catalog.potential("Phi1").shift is X
        assert catalog.shift("golden").kind is sh.Kind.sft and catalog.shift("even").kind is sh.Kind.sofic
        assert catalog.potential("Tilted").M == 1.0 and catalog.potential("Tilted").M_certified
        assert catalog.potential("flat").name == "flat"
        form = catalog.potential("Phi1").additive_form()
        assert np.allclose(form.values, [0.0, 0.0, math.log(5)])

    def test_undefined(self, testcases):
        document = toml.loads(EXPERIMENT)
        document["maps"]["F1"]["codomain"] = "Z"
        document["potentials"]["Phi1"]["derived"]["source"] = "nothing"
        with pytest.raises(ConfigError) as e:
            Resolver(_experiment(document)).graph()
        assert e.value.fields == ["maps.F1.codomain", "potentials.Phi1.derived.source"]

    def test_run_reference(self, testcases):
        document = toml.loads(EXPERIMENT)
        document["run"]["potential"] = "nothing"
        with pytest.raises(ConfigError) as e:
            Resolver(_experiment(document)).resolve()
        assert e.value.fields == ["run.potential"]

    def test_cycle(self, testcases):
        document = toml.loads(EXPERIMENT)
        document["potentials"]["Phi1"] = {"derived": {"construction": "tilt", "source": "Tilted", "per_step_log": 0.5}}
        with pytest.raises(ConfigError, match="each other") as e:
            Resolver(_experiment(document)).order()
        assert e.value.fields == ["potentials.Phi1", "potentials.Tilted"]

    def test_build_failure(self, testcases):
        document = toml.loads(EXPERIMENT)
        document["maps"]["F1"]["symbol_map"] = [["a", "A"], ["b", "A"], ["c", "A"]]
        with pytest.raises(ConfigError) as e:
            Resolver(_experiment(document)).resolve()
        assert e.value.fields == ["maps.F1"]

    def test_base_catalog(self, testcases):
        document = {"spec_version": "1", "potentials": {"G": {"shift": "X", "weights": [1, 1, 1]}}, "run": {"operation": "pressure", "potential": "G"}}
        base = Catalog.from_fixtures()
        catalog = Resolver(_experiment(document), base).resolve()
        assert catalog.potential("G").shift is base.shift("X")
        assert "F2" in catalog and len(catalog) == len(base) + 1


def version(*rest: tuple[str]):
    """
    Report the version of this module a.k.a. `__version__` (if it's supplied)
    :param rest: ignored
    :return: str
    """
    return globals().get("__version__", "unknown")


def about(*rest: tuple[str]):
    """
    Describe this module using the module docstring.
    :param rest: ignored
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


def order(pathname: str) -> list[str]:
    """Construction order of the objects in a config file."""
    return Resolver(config.load(pathname)).order()


def main():
    return fire.Fire()


if __name__ == "__main__":
    main()

#!/usr/bin/env python
"""
Module catalog holds the named objects of one experiment: subshifts, factor maps and potentials. A name is unique across
the three tables. `Catalog.from_fixtures()` is the catalog the cli falls back on when no config is given.

cli usage: `python -m gibbsmap.catalog names`
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import sys
import typing as t

import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap import codes, fixtures, potential as pot
from gibbsmap.checker import ConfigError

type Entry = sh.Subshift | codes.FactorMap | pot.Potential

_TABLES: tuple[tuple[str, type], ...] = (("shifts", sh.Subshift), ("maps", codes.FactorMap), ("potentials", pot.Potential))


class Catalog:
    def __init__(self, entries: t.Mapping[str, Entry] | None = None) -> None:
        self.shifts: dict[str, sh.Subshift] = {}
        self.maps: dict[str, codes.FactorMap] = {}
        self.potentials: dict[str, pot.Potential] = {}
        for name, entry in (entries or {}).items():
            self.add(name, entry)

    @staticmethod
    def make(entries: t.Mapping[str, Entry] | None = None) -> Catalog:
        return Catalog(entries)

    @staticmethod
    def from_fixtures() -> Catalog:
        s = fixtures.systems()
        entries: dict[str, Entry] = {name: value for name, value in s.items() if isinstance(value, (sh.Subshift, codes.FactorMap, pot.Potential))}
        entries.update(full4=s.quad.domain, ramp=s.decaying.domain)
        return Catalog(entries)

    def _table(self, entry: Entry) -> dict:
        for table, kind in _TABLES:
            if isinstance(entry, kind):
                return getattr(self, table)
        raise ConfigError(f"cannot catalog {entry!r}")

    def add(self, name: str, entry: Entry) -> Entry:
        if name in self:
            raise ConfigError(f"{name!r} is defined twice", [name])
        self._table(entry)[name] = entry
        logger.debug("cataloged %s = %r", name, entry)
        return entry

    def __contains__(self, name: str) -> bool:
        return any(name in getattr(self, table) for table, _ in _TABLES)

    def __getitem__(self, name: str) -> Entry:
        for table, _ in _TABLES:
            if name in getattr(self, table):
                return getattr(self, table)[name]
        raise ConfigError(f"nothing named {name!r}", [name])

    def _lookup(self, table: str, name: str, field: str) -> t.Any:
        found = getattr(self, table).get(name)
        if found is None:
            raise ConfigError(f"{field} = {name!r} names no entry of [{table}]", [field])
        return found

    def shift(self, name: str, field: str = "run.shift") -> sh.Subshift:
        return self._lookup("shifts", name, field)

    def map(self, name: str, field: str = "run.map") -> codes.FactorMap:
        return self._lookup("maps", name, field)

    def potential(self, name: str, field: str = "run.potential") -> pot.Potential:
        return self._lookup("potentials", name, field)

    def items(self) -> t.Iterator[tuple[str, Entry]]:
        for table, _ in _TABLES:
            yield from getattr(self, table).items()

    def names(self) -> dict[str, list[str]]:
        return {table: sorted(getattr(self, table)) for table, _ in _TABLES}

    def __len__(self) -> int:
        return sum(len(getattr(self, table)) for table, _ in _TABLES)

    def __repr__(self):
        return f"{self.__class__.__name__}(shifts={len(self.shifts)}, maps={len(self.maps)}, potentials={len(self.potentials)})"


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    result = box.Box(nothing=Catalog(), nothing_make=Catalog.make(), fixtures=Catalog.from_fixtures())
    result.X = sh.build_full_shift(3, "abc", name="X")
    result.small = Catalog({"X": result.X, "F": pot.from_weights(result.X, [1, 2, 3], name="F")})
    return result


class Tests:
    def test_empty(self, testcases):
        assert len(testcases.nothing) == 0 and len(testcases.nothing_make) == 0
        assert "X" not in testcases.nothing

    def test_present(self, testcases):
        assert "X" in testcases.small and "F" in testcases.small
        assert testcases.small["X"] is testcases.X
        assert testcases.small.potential("F").shift is testcases.X

    def test_absent(self, testcases):
        assert "nothing" not in testcases.small
        with pytest.raises(ConfigError):
            testcases.small["nothing"]

    def test_wrong_table(self, testcases):
        with pytest.raises(ConfigError) as e:
            testcases.small.map("X")
        assert e.value.fields == ["run.map"]

    def test_twice(self, testcases):
        catalog = Catalog({"X": testcases.X})
        with pytest.raises(ConfigError):
            catalog.add("X", sh.build_full_shift(2))

    def test_fixtures(self, testcases):
        names = testcases.fixtures.names()
        assert {"X", "Y", "golden", "full4", "ramp"} <= set(names["shifts"])
        assert {"F1", "collapse", "quad", "decaying"} <= set(names["maps"])
        assert {"F2", "W2", "Psi", "PsiF1", "golden_zero", "window2"} <= set(names["potentials"])
        assert testcases.fixtures.map("F1").domain is testcases.fixtures.shift("X")


def names(*rest: tuple[str]) -> dict[str, list[str]]:
    """Names in the fixture catalog."""
    return Catalog.from_fixtures().names()


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

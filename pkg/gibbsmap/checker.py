#!/usr/bin/env python
"""
Module checker holds the gibbsmap exception hierarchy and `check()`, the one guard every other module uses.

python usage:
  from gibbsmap.checker import check, DomainError
  check(n >= 1, f"level {n} < 1", DomainError)
  check(holds, "condition A fails up to n_max", warn=True)  # warnings.warn instead of raising
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import sys
import warnings

import fire
import box
import pytest


class GibbsMapError(Exception):
    """Root of every error gibbsmap raises on purpose."""


class InvalidAlphabetError(GibbsMapError, ValueError):
    pass


class DeadSymbolError(GibbsMapError, ValueError):
    """A symbol or presentation state that no bi-infinite sequence can use."""


class DomainError(GibbsMapError, ValueError):
    """Inadmissible word, missing table entry, empty fiber."""


class UnsupportedError(GibbsMapError):
    """The operation is defined, but not for this kind of input."""


class PreconditionError(GibbsMapError):
    """A hypothesis of the construction was checked and found false. `witness` names the offending cylinder."""

    def __init__(self, message: str, witness: str | None = None) -> None:
        super().__init__(message)
        self.witness = witness


class LevelMismatchError(GibbsMapError, ValueError):
    pass


class BudgetError(GibbsMapError):
    def __init__(self, message: str, estimate: float) -> None:
        super().__init__(message)
        self.estimate = estimate


class ConfigError(GibbsMapError, ValueError):
    def __init__(self, message: str, fields: list[str] | None = None) -> None:
        super().__init__(message if not fields else f"{message}: {', '.join(fields)}")
        self.fields = fields or []


def check(expression: bool, message: str, error: type[Exception] = AssertionError, warn: bool = False) -> bool:
    """
    Guard `expression`.
    :param expression: the thing that should be true
    :param message: what to say when it isn't
    :param error: exception class raised when it isn't
    :param warn: announce with warnings.warn (and the module logger) instead of raising
    :return: expression, so callers can branch on a warned failure
    """
    if not expression:
        if warn:
            logger.warning(message)
            warnings.warn(message, stacklevel=2)
        else:
            raise error(message)
    return bool(expression)


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return box.Box(budget=BudgetError("too big", estimate=3.0**20), config=ConfigError("bad", ["run.n_max", "shifts.X"]))


class Tests:
    def test_check_passes(self, testcases):
        assert check(True, "never raised") is True

    def test_check_raises_given_error(self, testcases):
        with pytest.raises(DomainError):
            check(False, "word 11 not in B_2", DomainError)

    def test_check_default_is_assertion(self, testcases):
        with pytest.raises(AssertionError):
            check(1 > 2, "arithmetic")

    def test_check_warns(self, testcases):
        with pytest.warns(UserWarning, match="degraded"):
            assert check(False, "degraded", warn=True) is False

    def test_hierarchy(self, testcases):
        assert issubclass(DomainError, ValueError) and issubclass(DomainError, GibbsMapError)
        assert issubclass(PreconditionError, GibbsMapError)

    def test_payloads(self, testcases):
        assert testcases.budget.estimate == 3.0**20
        assert testcases.config.fields == ["run.n_max", "shifts.X"]
        assert "run.n_max" in str(testcases.config)
        assert PreconditionError("ratio grows", witness="aaaa").witness == "aaaa"


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

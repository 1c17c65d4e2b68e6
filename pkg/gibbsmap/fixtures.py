#!/usr/bin/env python
"""
Module fixtures builds the desk-scale reference systems shared by tests, sample configs and the cli:

  X, Y        full shift on "abc" and on "AB"
  F1          X -> Y, a,b -> A and c -> B
  F2          window-1 weights (1, 2, 3) on X, pressure log 6
  golden      the golden mean SFT on "01" with the zero potential
  collapse    full shift on "01" onto the one-symbol shift, with a window-2 potential f00=0 f01=log2 f10=0 f11=log3
  W2          a positive window-2 potential on X (summable variation) for the u-iteration
  Psi         window-1 weights (2, 5) on Y
  PsiF1       Psi pulled back through F1, constant on fibers
  quad        full shift on "abcd" onto "AB" with fibers of sizes 3 and 1
  decaying    an SFT onto the full 2-shift whose preimage counts break Condition A
  nobb, F3    the SFT on "abc" without "bb", mapped a,b -> A and c -> B onto Y; Condition A holds with D < 1

`systems()` builds them once per process; potentials check that they live on the identical shift object, so always
take related objects from the same call.

cli usage: `python -m gibbsmap.fixtures names`
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import functools
import math
import sys

import numpy as np
import fire
import box
import pytest

from gibbsmap import shift as sh
from gibbsmap import codes, potential as pot

W2_TABLE = ((0.1, 0.3, 0.2), (0.4, 0.2, 0.5), (0.3, 0.6, 0.1))


@functools.cache
def systems() -> box.Box:
    s = box.Box()
    s.X = sh.build_full_shift(3, "abc", name="X")
    s.Y = sh.build_full_shift(2, "AB", name="Y")
    s.F1 = codes.FactorMap(s.X, s.Y, (0, 0, 1), name="F1")
    s.F2 = pot.from_weights(s.X, [1, 2, 3], name="F2")
    s.W2 = pot.from_single_function(s.X, 2, np.array(W2_TABLE).ravel(), name="W2")
    s.Psi = pot.from_weights(s.Y, [2, 5], name="Psi")
    s.PsiF1 = pot.compose_with_factor(s.Psi, s.F1)
    s.golden = sh.build_sft([[1, 1], [1, 0]], name="golden")
    s.golden_zero = pot.zero(s.golden)
    s.full2 = sh.build_full_shift(2, name="full2")
    s.full1 = sh.build_full_shift(1, "*", name="full1")
    s.collapse = codes.FactorMap(s.full2, s.full1, (0, 0), name="collapse")
    s.window2 = pot.from_single_function(s.full2, 2, [0.0, math.log(2), 0.0, math.log(3)], name="window2")
    s.quad = codes.FactorMap(sh.build_full_shift(4, "abcd", name="full4"), s.Y, (0, 0, 0, 1), name="quad")
    s.golden_map = codes.FactorMap(s.golden, s.full1, (0, 0), name="golden->full1")
    s.nobb = sh.build_sft([[1, 1, 1], [1, 0, 1], [1, 1, 1]], "abc", name="nobb")
    s.F3 = codes.FactorMap(s.nobb, s.Y, (0, 0, 1), name="F3")
    decaying_x = sh.build_sft([[1, 1, 0], [0, 1, 1], [1, 1, 1]], "abc", name="ramp")
    s.decaying = codes.FactorMap(decaying_x, s.full2, (0, 0, 1), name="decaying")
    logger.debug("built reference systems %s", sorted(s))
    return s


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return systems()


class Tests:
    def test_shared(self, testcases):
        assert systems() is testcases
        assert testcases.F1.domain is testcases.F2.shift and testcases.F1.codomain is testcases.Psi.shift

    def test_W2_positive(self, testcases):
        assert bool(np.all(testcases.W2.values > 0)) and testcases.W2.M_certified

    def test_fibers(self, testcases):
        assert testcases.F1.fiber_sizes == (2, 1)
        assert testcases.quad.fiber_sizes == (3, 1)


def names(*rest: tuple[str]) -> list[str]:
    """Names of the reference systems."""
    return sorted(systems())


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

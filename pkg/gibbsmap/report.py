#!/usr/bin/env python
"""
Module report defines the structured results every verification returns and the writers that turn them into files.

A `Report` holds a verdict, a list of `CheckRecord`s {check, n, lhs, rhs, pass, witness}, named `Series` (column tables
such as the pressure series {n, estimate, lo, hi}), the constants used and free-form notes. `write_report` emits
report.json (sorted keys) plus one TSV per series through a `Transaction`.

python usage:
  from gibbsmap import report
  r = report.Report(name="pressure", operation="pressure")
  r.add_check("bracket contains oracle", 16, lhs=0.4477, rhs=0.4812, passed=True)
  r.conclude()  # "PASS"
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import json
import math
import sys
import typing as t

import numpy as np
import pydantic
import fire
import box
import pytest

from gibbsmap import transaction
from gibbsmap.checker import check, DomainError

type Verdict = t.Literal["PASS", "FAIL", "PASS-trend", "FAIL-trend", "INFO"]
type Cell = int | float | str | bool | None


def _finite(x: float | None) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


class CheckRecord(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(populate_by_name=True)

    check: str
    n: int | None = None
    lhs: float | None = None
    rhs: float | None = None
    passed: bool = pydantic.Field(alias="pass")
    witness: str | None = None

    @pydantic.field_validator("lhs", "rhs", mode="before")
    @classmethod
    def _json_safe(cls, value):
        return _finite(None if value is None else float(value))


class Series(pydantic.BaseModel):
    columns: list[str]
    rows: list[list[Cell]] = []

    def append(self, *values: Cell) -> None:
        check(len(values) == len(self.columns), f"{len(values)} values for columns {self.columns}", DomainError)
        self.rows.append([_cell(v) for v in values])

    def column(self, name: str) -> list[Cell]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _cell(value: t.Any) -> Cell:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _finite(float(value))
    return None if value is None else str(value)


class Report(pydantic.BaseModel):
    name: str
    operation: str
    verdict: Verdict = "INFO"
    records: list[CheckRecord] = []
    series: dict[str, Series] = {}
    constants: dict[str, Cell] = {}
    notes: list[str] = []

    def add_check(self, check: str, n: int | None, lhs: float | None, rhs: float | None, passed: bool, witness: str | None = None) -> bool:
        self.records.append(CheckRecord(check=check, n=n, lhs=lhs, rhs=rhs, passed=bool(passed), witness=witness))
        if not passed:
            logger.info("%s: %s failed at n=%s (%s vs %s) %s", self.name, check, n, lhs, rhs, witness or "")
        return bool(passed)

    def add_series(self, name: str, columns: t.Sequence[str]) -> Series:
        self.series[name] = Series(columns=list(columns))
        return self.series[name]

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def conclude(self, trend: bool = False) -> Verdict:
        """PASS/FAIL (or the -trend variants for finite-n observations) from the records; INFO when there are none."""
        if not self.records:
            self.verdict = "INFO"
        else:
            self.verdict = ("FAIL" if self.failures else "PASS") + ("-trend" if trend else "")
        logger.info("%s: %s", self.name, self.verdict)
        return self.verdict

    @property
    def failed(self) -> bool:
        return self.verdict in ("FAIL", "FAIL-trend")

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", by_alias=True), sort_keys=True, indent=2) + "\n"


def _format(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_tsv(series: Series, header: str | None = None) -> str:
    lines = [] if header is None else [f"# {header}"]
    lines.append("\t".join(series.columns))
    lines.extend("\t".join(_format(v) for v in row) for row in series.rows)
    return "\n".join(lines) + "\n"


def distribution_tsv(words: t.Sequence[str], weights: np.ndarray, level: int, shift_name: str, provenance: str) -> str:
    """`word<TAB>weight` rows under a metadata line."""
    series = Series(columns=["word", "weight"])
    for word, weight in zip(words, weights):
        series.append(word, float(weight))
    return to_tsv(series, header=f"level={level} shift={shift_name} provenance={provenance}")


def image_table_tsv(words: t.Sequence[str], log_lo: np.ndarray, log_hi: np.ndarray, level: int) -> str:
    series = Series(columns=["y_word", "log_g_lo", "log_g_hi"])
    for word, lo, hi in zip(words, log_lo, log_hi):
        series.append(word, float(lo), float(hi))
    return to_tsv(series, header=f"level={level}")


def emit_plot_data(r: Report) -> dict[str, str]:
    """One columnar text per series, keyed by file name."""
    return {f"{r.name}.{name}.tsv": to_tsv(series) for name, series in sorted(r.series.items())}


def write_report(directory: str, r: Report, extra: t.Mapping[str, str] | None = None) -> list[str]:
    """report.json, the series TSVs and any extra files, all or nothing."""
    with transaction.Transaction(directory) as tx:
        tx.write_text("report.json", r.to_json())
        for name, text in emit_plot_data(r).items():
            tx.write_text(name, text)
        for name, text in (extra or {}).items():
            tx.write_text(name, text)
    return [str(p) for p in tx.committed]


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    r = Report(name="pressure", operation="pressure", constants={"C": 0.0, "M": 1.0})
    pressure = r.add_series("series", ["n", "estimate", "lo", "hi"])
    for n in range(1, 4):
        pressure.append(n, math.log(6), math.log(6), math.log(6))
    r.add_check("bracket contains limit", 3, lhs=math.log(6), rhs=math.log(6), passed=True)
    return box.Box(report=r)


class Tests:
    def test_verdicts(self, testcases):
        r = Report(name="x", operation="x")
        assert r.conclude() == "INFO"
        r.add_check("a", 1, 0.0, 1.0, True)
        assert r.conclude() == "PASS"
        r.add_check("b", 2, 2.0, 1.0, False, witness="AB")
        assert r.conclude(trend=True) == "FAIL-trend" and r.failed

    def test_json_sorted_with_pass_alias(self, testcases):
        text = testcases.report.to_json()
        data = json.loads(text)
        assert list(data) == sorted(data)
        assert data["records"][0]["pass"] is True

    def test_infinite_values_become_null(self, testcases):
        record = CheckRecord(check="lower side", n=4, lhs=-math.inf, rhs=1.0, passed=True)
        assert record.lhs is None

    def test_tsv(self, testcases):
        text = to_tsv(testcases.report.series["series"])
        lines = text.split("\n")
        assert lines[0] == "n\testimate\tlo\thi"
        assert lines[1].startswith("1\t1.79175946922805")
        assert text.endswith("\n") and "\r" not in text

    def test_distribution_header(self, testcases):
        text = distribution_tsv(["a", "b"], np.array([0.25, 0.75]), 1, "full3", "oracle")
        assert text.splitlines()[:2] == ["# level=1 shift=full3 provenance=oracle", "word\tweight"]

    def test_series_arity(self, testcases):
        with pytest.raises(DomainError):
            testcases.report.series["series"].append(1, 2.0)

    def test_write_report(self, testcases, tmp_path):
        written = write_report(str(tmp_path), testcases.report)
        assert sorted(p.split("/")[-1] for p in written) == ["pressure.series.tsv", "report.json"]


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

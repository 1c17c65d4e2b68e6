#!/usr/bin/env python
"""
Module transaction creates Transaction, an all-or-nothing writer for the files of one run:
```python
from gibbsmap import transaction
with transaction.Transaction(out_dir) as tx:
    tx.write_text("report.json", text)
    tx.write_text("pressure.tsv", table)
    raise Exception("rollback needed")  # neither file appears
```
Files are written to temporaries next to their destination and renamed into place only when the block exits cleanly.
"""

from __future__ import annotations
import logging

logger = logging.getLogger(__name__)  # logger.setLevel(logging.DEBUG)

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"

import os
import pathlib
import sys
import tempfile

import fire
import box
import pytest


class Transaction:
    def __init__(self, directory: str | pathlib.Path) -> None:
        if not directory:
            raise ValueError("Cannot write into an unnamed directory")
        self.directory = pathlib.Path(directory)
        self.pending: dict[pathlib.Path, pathlib.Path] = {}
        self.committed: list[pathlib.Path] = []

    def __enter__(self) -> Transaction:
        self.directory.mkdir(parents=True, exist_ok=True)
        return self

    def write_text(self, name: str, text: str) -> pathlib.Path:
        """Stage `text` as file `name`; returns the destination path."""
        destination = self.directory / name
        if destination.resolve().parent != self.directory.resolve():
            raise ValueError(f"{name} escapes {self.directory}")
        with tempfile.NamedTemporaryFile("w", dir=self.directory, prefix=f".{name}.", suffix=".tmp", delete=False, encoding="utf-8", newline="\n") as f:
            f.write(text)
        if destination in self.pending:
            self.pending[destination].unlink(missing_ok=True)
        self.pending[destination] = pathlib.Path(f.name)
        return destination

    def rollback(self) -> None:
        for temporary in self.pending.values():
            temporary.unlink(missing_ok=True)
        logger.info("rolled back %d staged files in %s", len(self.pending), self.directory)
        self.pending.clear()

    def commit(self) -> list[pathlib.Path]:
        """Rename every staged file into place. When a rename fails, files placed by this commit are removed again (a file
        they had replaced is not restored) and the remaining temporaries deleted."""
        placed: list[pathlib.Path] = []
        try:
            for destination, temporary in sorted(self.pending.items()):
                os.replace(temporary, destination)
                placed.append(destination)
        except OSError:
            for destination in placed:
                destination.unlink(missing_ok=True)
            for destination, temporary in self.pending.items():
                if destination not in placed:
                    temporary.unlink(missing_ok=True)
            logger.error("commit into %s failed after %d of %d files, removed them", self.directory, len(placed), len(self.pending))
            self.pending.clear()
            raise
        self.committed.extend(placed)
        self.pending.clear()
        return self.committed

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        if exc_type:
            self.rollback()
        else:
            self.commit()
        return False

    def __repr__(self):
        return f"{self.__class__.__name__}(directory={str(self.directory)!r}, pending={len(self.pending)})"


@pytest.fixture(scope="module")
def testcases():
    """
    Create test cases for methods of class Tests
    :return: a box (dict) of keys:values, each key is a test case name and each value is the value.
    """
    return box.Box(files={"report.json": "{}\n", "pressure.tsv": "n\testimate\n1\t1.79\n"})


class Tests:
    def test_bad_transaction(self, testcases):
        with pytest.raises(ValueError):
            Transaction("")

    def test_commit(self, testcases, tmp_path):
        with Transaction(tmp_path / "run") as tx:
            for name, text in testcases.files.items():
                tx.write_text(name, text)
            assert not (tmp_path / "run" / "report.json").exists()
        assert (tmp_path / "run" / "pressure.tsv").read_text() == testcases.files["pressure.tsv"]
        assert sorted(p.name for p in (tmp_path / "run").iterdir()) == ["pressure.tsv", "report.json"]

    def test_rollback(self, testcases, tmp_path):
        with pytest.raises(RuntimeError):
            with Transaction(tmp_path) as tx:
                tx.write_text("report.json", "{}")
                raise RuntimeError("rollback needed")
        assert list(tmp_path.iterdir()) == []

    def test_failed_rename(self, testcases, tmp_path, monkeypatch):
        replace = os.replace
        placed = []

        def second_fails(source, destination):
            if placed:
                raise OSError("no space left on device")
            replace(source, destination)
            placed.append(destination)

        monkeypatch.setattr(os, "replace", second_fails)
        with pytest.raises(OSError):
            with Transaction(tmp_path) as tx:
                for name, text in testcases.files.items():
                    tx.write_text(name, text)
        assert len(placed) == 1
        assert list(tmp_path.iterdir()) == []

    def test_escape(self, testcases, tmp_path):
        with pytest.raises(ValueError):
            with Transaction(tmp_path) as tx:
                tx.write_text("../outside.tsv", "")


def version(*rest: tuple[str]):
    """
    Report the version of this module a.k.a. `__version__` (if it's supplied)
    :param rest: ignored
    :return: None
    """
    return globals().get("__version__", "unknown")


def about(*rest: tuple[str]):
    """
    Describe this module in some way.
    :param rest:
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

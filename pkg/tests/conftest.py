"""Shared helpers for the test suite."""
from __future__ import annotations

import contextlib
import os
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
FIXTURES = TESTS_DIR / "fixtures"

FIXTURE_NAMES = [
    "py_shadow",
    "py_imports",
    "py_ambig",
    "java_basic",
    "java_ambig",
    "java_shadow",
    "mixed_src",
]

GRANULARITIES = ["token", "function", "class", "file", "directory"]

sys.path.insert(0, str(TESTS_DIR))


@contextlib.contextmanager
def chdir(path):
    prior = os.getcwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(prior)


def run_cli(argv, cwd=None) -> int:
    """Invoke the CLI entry point in-process and return its exit code."""
    from depminer.cli import main

    if cwd is None:
        return main(list(argv))
    with chdir(cwd):
        return main(list(argv))


@pytest.fixture
def registry():
    from depminer.frontend import default_registry

    return default_registry()

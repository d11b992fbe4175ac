from __future__ import annotations

from pathlib import Path

import pytest

from unired.syntax import parse_formula, parse_theory

DATA = Path(__file__).parent / "data"


def load(name: str):
    return parse_theory((DATA / name).read_text())


@pytest.fixture
def listrev():
    return load("listrev.thy")


@pytest.fixture
def revid():
    return load("revid.thy")


@pytest.fixture
def arith():
    return load("arith.thy")


def formula(theory, text: str):
    return parse_formula(text, theory)

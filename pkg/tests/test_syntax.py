from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, load
from gen import formulas, scripts, strategies, theories
from unired.psl import DInd
from unired.steps import InductArgs, Ors, SAuto, SSimp
from unired.syntax import (
    ParseError,
    parse_formula,
    parse_induct_args,
    parse_script,
    parse_scripts,
    parse_strategy,
    parse_theory,
    print_formula,
    print_script,
    print_strategy,
    print_theory,
    tokenize,
)

TH = load("listrev.thy")
LISTREV = (DATA / "listrev.thy").read_text()


def test_benchmark_file_counts():
    assert len(TH.datatypes) == 2
    assert len(TH.functions) == 5
    assert [n for n, _ in TH.goals] == ["app_nil", "app_assoc", "rev_rev", "itrev_rev"]


def test_dangling_bar_expects_constructor():
    with pytest.raises(ParseError) as err:
        parse_theory("theory t\ndatatype nat = Zero |\n")
    assert "constructor" in err.value.expected


def test_goal_variable_types_come_from_signatures():
    th = parse_theory(LISTREV + "goal g: rev xs = ys\n")
    f = th.goal("g")
    assert {v.type for v in (f.conclusion.lhs.args[0], f.conclusion.rhs)} == {"list"}


def test_print_examples():
    assert print_formula(TH.goal("rev_rev")) == "rev (rev xs) = xs"
    arith = load("arith.thy")
    assert print_formula(arith.goal("add_eq_zero")) == "add x y = Zero ==> x = Zero"


def test_strategy_examples():
    assert parse_strategy("Thens [Dynamic(Induct), Auto, IsSolved]") == DInd
    assert parse_strategy("Ors [Simp, Auto]") == Ors((SSimp(), SAuto()))
    assert parse_strategy("DInd") == DInd
    with pytest.raises(ParseError):
        parse_strategy("Thens [Auto,")


def test_comments_are_ignored():
    th = parse_theory("# header\n" + LISTREV.replace("\n\n", "\n# note\n", 1))
    assert th == TH


def test_induct_args_text():
    assert parse_induct_args("induct xs arbitrary: ys") == InductArgs(("xs",), ("ys",))
    assert parse_induct_args("xs ys rule: itrev") == InductArgs(("xs", "ys"), (), "itrev")


@settings(max_examples=200)
@given(theories())
def test_theory_round_trip(th):
    assert parse_theory(print_theory(th)) == th


@settings(max_examples=200)
@given(formulas(TH))
def test_formula_round_trip(f):
    assert parse_formula(print_formula(f), TH) == f


@settings(max_examples=200)
@given(scripts(TH))
def test_script_round_trip(script):
    assert parse_script(print_script(script), TH) == script


@settings(max_examples=200)
@given(strategies())
def test_strategy_round_trip(s):
    assert parse_strategy(print_strategy(s)) == s


@given(st.lists(scripts(TH), min_size=1, max_size=3))
def test_script_files_hold_several_scripts(items):
    text = "\n".join(print_script(s) for s in items)
    assert parse_scripts(text, TH) == items


def _offset(text: str, line: int, column: int) -> int:
    lines = text.split("\n")
    return sum(len(ln) + 1 for ln in lines[: line - 1]) + column - 1


@given(st.integers(0, len(LISTREV) - 1))
def test_truncation_errors_point_inside_the_file(cut):
    text = LISTREV[:cut]
    try:
        parse_theory(text)
    except ParseError as e:
        assert 1 <= e.pos.line
        assert 0 <= _offset(text, e.pos.line, e.pos.column) <= len(text)


def test_tokenizer_reports_unknown_characters():
    with pytest.raises(ParseError) as err:
        tokenize("theory t\n  $")
    assert (err.value.pos.line, err.value.pos.column) == (2, 3)

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings

from conftest import load
from gen import terms
from oracles import brute_first_counterexample, brute_terms, naive_eval, order_key
from unired.evaluation import (
    Counterexample,
    Evaluator,
    OutOfFuel,
    assignments,
    enumerate_terms,
    evaluate,
    falsifies,
    find_counterexample,
)
from unired.kernel import App
from unired.syntax import parse_formula, parse_term

TH = load("listrev.thy")


# -- examples ---------------------------------------------------------------------


def test_eval_examples():
    assert evaluate(TH, parse_term("add (Suc Zero) (Suc Zero)", TH)) == parse_term("Suc (Suc Zero)", TH)
    assert evaluate(TH, parse_term("rev (Cons Zero (Cons (Suc Zero) Nil))", TH)) == parse_term(
        "Cons (Suc Zero) (Cons Zero Nil)", TH)


def test_zero_fuel_runs_out():
    with pytest.raises(OutOfFuel):
        evaluate(TH, parse_term("app Nil Nil", TH), fuel=0)


def test_enumeration_examples():
    nat = lambda text: parse_term(text, TH)  # noqa: E731
    assert enumerate_terms(TH, "nat", 3) == [nat("Zero"), nat("Suc Zero"), nat("Suc (Suc Zero)")]
    assert enumerate_terms(TH, "list", 3) == [nat("Nil"), nat("Cons Zero Nil")]
    assert enumerate_terms(TH, "nat", 1) == [nat("Zero")]


@pytest.mark.parametrize("k", range(1, 9))
def test_nat_enumeration_has_k_terms(k):
    assert len(enumerate_terms(TH, "nat", k)) == k


@pytest.mark.parametrize("type_name", ["nat", "list"])
def test_enumeration_matches_brute_force(type_name):
    got = enumerate_terms(TH, type_name, 7)
    assert len(set(got)) == len(got)
    assert all(t.size <= 7 for t in got)
    assert got == sorted(brute_terms(TH, type_name, 7), key=lambda t: order_key(TH, t))


def test_rev_id_counterexample():
    f = parse_formula("rev xs = xs", TH)
    cex = find_counterexample(TH, f, 8)
    assert cex == Counterexample({"xs": parse_term("Cons Zero (Cons (Suc Zero) Nil)", TH)})
    assert cex.assignment == brute_first_counterexample(TH, f, 8)


def test_app_nil_has_no_counterexample():
    assert find_counterexample(TH, parse_formula("app xs Nil = xs", TH), 6) is None


def test_closed_false_equation_gives_empty_assignment():
    assert find_counterexample(TH, parse_formula("Zero = Suc Zero", TH)) == Counterexample({})


def test_premises_must_hold():
    f = parse_formula("app xs ys = Nil ==> xs = Cons Zero Nil", TH)
    cex = find_counterexample(TH, f, 6)
    assert cex.assignment == {"xs": App("Nil"), "ys": App("Nil")}


@pytest.mark.parametrize("text", [
    "app xs ys = app ys xs",
    "itrev xs ys = app ys (rev xs)",
    "add x y = add x x",
    "len (app xs ys) = len xs",
])
def test_first_counterexample_follows_documented_order(text):
    f = parse_formula(text, TH)
    cex = find_counterexample(TH, f, 6)
    assert cex is not None
    assert cex.assignment == brute_first_counterexample(TH, f, 6)
    assert falsifies(TH, f, cex.assignment)


def test_assignments_nondecreasing_in_total_size():
    sizes = [sum(t.size for t in a.values())
             for a in assignments(TH, [("x", "nat"), ("xs", "list")], 5)]
    assert sizes == sorted(sizes)
    assert len(sizes) == 5 * len(enumerate_terms(TH, "list", 5))


@settings(max_examples=300)
@given(terms(TH, "list", 3, var_names={}).filter(lambda t: t.size <= 7 and isinstance(t, App)))
def test_eval_agrees_with_naive_interpreter(t):
    assert Evaluator(TH).evaluate(t) == naive_eval(TH, t)


@settings(max_examples=100)
@given(terms(TH, "nat", 4, var_names={}))
def test_eval_is_deterministic(t):
    assert evaluate(TH, t) == evaluate(TH, t) == naive_eval(TH, t)


def test_eval_agrees_with_naive_interpreter_exhaustively():
    ev = Evaluator(TH)
    checked = 0
    for fn in TH.functions.values():
        pools = [brute_terms(TH, t, 7) for t in fn.arg_types]
        for args in itertools.product(*pools):
            t = App(fn.name, args)
            if t.size <= 8:
                assert ev.evaluate(t) == naive_eval(TH, t)
                checked += 1
    assert checked == 83  # every application of size <= 8

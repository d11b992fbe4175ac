from __future__ import annotations

import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load
from gen import formulas
from unired.deduct import (
    Budgets,
    Progress,
    Solved,
    Stuck,
    auto,
    constructor_clash,
    prove_implication,
    simp,
)
from unired.evaluation import find_counterexample
from unired.induct import apply_induction, candidate_applications
from unired.kernel import Hypothesis, Sequent, Var, make_sequent
from unired.steps import InductArgs
from unired.syntax import parse_formula, parse_term, parse_theory, print_theory

TH = load("listrev.thy")
ARITH = load("arith.thy")


def f(text, theory=TH):
    return parse_formula(text, theory)


def rev_rev_step():
    _, step = apply_induction(make_sequent(f("rev (rev xs) = xs")), InductArgs(("xs",)), TH)
    return step


def test_defining_equation_closes_goal():
    assert isinstance(auto(TH, make_sequent(f("app Nil ys = ys"))), Solved)


def test_clashing_hypothesis_closes_anything():
    s = make_sequent(f("rev xs = xs"))
    s = Sequent(s.fixed, (Hypothesis(f("Zero = Suc Zero")),), s.target)
    assert isinstance(auto(TH, s), Solved)


def test_rev_rev_is_stuck():
    assert isinstance(auto(TH, make_sequent(f("rev (rev xs) = xs"))), Stuck)


def test_injectivity():
    out = auto(TH, make_sequent(f("Suc x = Suc y")))
    assert isinstance(out, Progress)
    [r] = out.residual
    assert r.target.conclusion.lhs == Var("x", "nat")
    assert r.target.conclusion.rhs == Var("y", "nat")


def test_schematic_hypothesis_is_instantiated():
    target = f("itrev xs (Cons a ys) = app (rev xs) (Cons a ys)")
    ih = f("itrev xs yh = app (rev xs) yh")
    s = make_sequent(target)
    s = Sequent(s.fixed, (Hypothesis(ih, frozenset({"yh"})),), s.target)
    assert isinstance(auto(TH, s), Solved)


def test_rev_rev_step_case_is_stuck():
    out = auto(TH, rev_rev_step())
    [r] = out.residual
    assert r.target.conclusion == f("rev (app (rev xs) (Cons x Nil)) = Cons x xs").conclusion.map(
        lambda t: _rename(t, {"xs": r.fixed[1], "x": r.fixed[0]}))
    assert isinstance(auto(TH, r), Stuck)


def _rename(t, ren):
    if isinstance(t, Var):
        return ren[t.name]
    return type(t)(t.symbol, [_rename(a, ren) for a in t.args])


def test_prove_implication_examples():
    step = rev_rev_step()
    assert prove_implication(TH, f("rev (app ys (Cons x Nil)) = Cons x (rev ys)"), step)
    assert not prove_implication(TH, f("rev xs = xs"), step)
    assert prove_implication(TH, step.target, step)


def test_one_level_induction_inside_implication():
    # the goal itself needs induction; the conjecture is irrelevant to it
    s = make_sequent(f("app xs Nil = xs"))
    lemma = f("len xs = len xs")
    assert prove_implication(TH, lemma, s)
    assert not prove_implication(TH, lemma, s, Budgets(induction=False))


def test_constructor_clash():
    nil, cons = parse_term("Nil", TH), parse_term("Cons x xs", TH)
    assert constructor_clash(TH, nil, cons)
    assert constructor_clash(TH, Var("xs", "list"), parse_term("Cons x xs", TH))
    assert not constructor_clash(TH, nil, parse_term("app xs ys", TH))


def test_premise_is_used():
    s = make_sequent(f("add x y = Zero ==> x = Zero", ARITH))
    base, step = apply_induction(s, InductArgs(("x",)), ARITH)
    assert isinstance(auto(ARITH, base), Solved)
    assert isinstance(auto(ARITH, step), Solved)


LEMMAS = load("listrev.thy")
LEMMAS.lemmas = [("app_nil", f("app xs Nil = xs")),
                 ("app_assoc", f("app (app xs ys) zs = app xs (app ys zs)"))]


@settings(max_examples=150, deadline=None)
@given(formulas(TH, depth=3, max_premises=1), st.booleans())
def test_solved_implies_no_counterexample(formula, with_lemmas):
    theory = LEMMAS if with_lemmas else TH
    if isinstance(auto(theory, make_sequent(formula)), Solved):
        assert find_counterexample(theory, formula, 6) is None


LOOPY = parse_theory(print_theory(TH) + """
lemma l1: app xs ys = app ys xs
lemma l2: rev xs = rev (rev (rev xs))
lemma l3: itrev xs ys = itrev (rev (rev xs)) ys
lemma l4: rev (rev xs) = rev xs
lemma l5: add x y = add (add x Zero) y
lemma l6: len xs = len (app xs Nil)
""")


@settings(max_examples=60, deadline=None)
@given(formulas(TH, depth=3, max_premises=1))
def test_looping_rule_sets_terminate(formula):
    start = time.monotonic()
    out = auto(LOOPY, make_sequent(formula), budget=50, simp_budget=200)
    assert isinstance(out, (Solved, Progress, Stuck))
    out = simp(LOOPY, make_sequent(formula), budget=200)
    assert isinstance(out, (Solved, Progress, Stuck))
    assert time.monotonic() - start < 10


@pytest.mark.parametrize("text", ["rev xs = xs", "len (rev (app xs (rev ys))) = Zero"])
def test_growing_rules_exhaust_the_budget_instead_of_the_stack(text):
    s = make_sequent(f(text))
    assert isinstance(simp(LOOPY, s, budget=5000), (Progress, Stuck))
    assert isinstance(auto(LOOPY, s, budget=500, simp_budget=5000), (Progress, Stuck, Solved))


def _corpus_sequents():
    out = []
    for _, g in ARITH.goals:
        s = make_sequent(g)
        out.append(s)
        for a in candidate_applications(s, ARITH):
            out.extend(apply_induction(s, a, ARITH))
    return out


@pytest.mark.parametrize("k", range(len(ARITH.goals)))
def test_lemmas_never_make_auto_weaker(k):
    base = ARITH.copy()
    base.lemmas = list(ARITH.goals[:k])
    more = ARITH.copy()
    more.lemmas = list(ARITH.goals[: k + 1])
    for s in _corpus_sequents():
        if isinstance(auto(base, s), Solved):
            assert isinstance(auto(more, s), Solved)


def test_simp_reports_stuck_without_change():
    s = make_sequent(f("rev (rev xs) = xs"))
    assert isinstance(simp(TH, s), Stuck)

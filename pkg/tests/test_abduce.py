from __future__ import annotations

import pytest

from conftest import load
from unired.abduce import (
    NotStrongEnough,
    Refuted,
    Refuter,
    Valuable,
    canonicalise,
    filter_conjecture,
    generate_conjectures,
    insert_conjecture,
)
from unired.deduct import Progress, Solved, auto, prove_implication
from unired.evaluation import Counterexample, falsifies
from unired.induct import apply_induction, candidate_applications
from unired.kernel import Formula, alpha_key, make_sequent
from unired.steps import InductArgs
from unired.syntax import parse_formula, parse_term

TH = load("listrev.thy")
ARITH = load("arith.thy")


def f(text, theory=TH):
    return parse_formula(text, theory)


def same(a: Formula, b: Formula) -> bool:
    return alpha_key(make_sequent(a)) == alpha_key(make_sequent(b))


def rev_rev_stuck():
    _, step = apply_induction(make_sequent(f("rev (rev xs) = xs")), InductArgs(("xs",)), TH)
    out = auto(TH, step)
    assert isinstance(out, Progress)
    return out.residual[0]


LEMMA = f("rev (app ys (Cons x Nil)) = Cons x (rev ys)")


def test_hypothesis_rewriting_then_generalisation_finds_the_lemma():
    got = generate_conjectures(rev_rev_stuck(), TH)
    assert any(same(c, LEMMA) for c in got)


def test_constant_generalisation_on_itrev():
    got = generate_conjectures(make_sequent(f("itrev xs Nil = rev xs")), TH)
    for text in ["itrev xs ys = app (rev xs) ys", "itrev xs ys = app ys (rev xs)",
                 "itrev xs ys = rev xs"]:
        assert f(text) in got


def test_premise_dropping():
    s = make_sequent(f("add x y = Zero ==> x = Zero", ARITH))
    got = generate_conjectures(s, ARITH)
    assert canonicalise(f("x = Zero", ARITH), ARITH) in got


def test_premise_free_goal_gets_no_duplicate():
    got = generate_conjectures(make_sequent(f("itrev xs Nil = rev xs")), TH)
    assert len(got) == len(set(got))
    assert f("itrev xs Nil = rev xs") not in got


def test_verdict_examples():
    stuck = rev_rev_stuck()
    assert filter_conjecture(TH, stuck, LEMMA) == Valuable()
    itrev = make_sequent(f("itrev xs Nil = rev xs"))
    nil = parse_term("Nil", TH)
    one = parse_term("Cons Zero Nil", TH)
    assert filter_conjecture(TH, itrev, f("itrev xs ys = rev xs")) == Refuted(
        Counterexample({"xs": nil, "ys": one}))
    v = filter_conjecture(TH, itrev, f("itrev xs ys = app ys (rev xs)"))
    assert isinstance(v, Refuted)
    assert v.counterexample.assignment == {
        "xs": one, "ys": parse_term("Cons (Suc Zero) Nil", TH)}
    assert filter_conjecture(TH, itrev, f("itrev xs ys = app (rev xs) ys")) == Valuable()


def test_too_weak_conjecture():
    assert filter_conjecture(TH, rev_rev_stuck(), f("len xs = len xs")) == NotStrongEnough()


def test_insert_splits_into_two_obligations():
    stuck = rev_rev_stuck()
    before = stuck
    first, second = insert_conjecture(stuck, LEMMA, TH)
    assert second == make_sequent(LEMMA)
    assert first.target == stuck.target
    assert first.hyps[:-1] == stuck.hyps
    assert same(first.hyps[-1].formula, LEMMA)
    assert first.hyps[-1].schematic
    assert stuck == before


def test_self_conjecture_closes_first_obligation():
    stuck = rev_rev_stuck()
    first, _ = insert_conjecture(stuck, stuck.target, TH)
    assert isinstance(auto(TH, first), Solved)


def _stuck_corpus():
    out = []
    for theory in (TH, ARITH):
        for _, g in theory.goals:
            s = make_sequent(g)
            out.append((theory, s))
            for a in candidate_applications(s, theory)[:2]:
                for case in apply_induction(s, a, theory):
                    r = auto(theory, case)
                    if isinstance(r, Progress):
                        out.extend((theory, c) for c in r.residual)
    return out


STUCK = _stuck_corpus()


@pytest.mark.parametrize("i", range(0, len(STUCK), max(1, len(STUCK) // 12)))
def test_filter_properties(i):
    theory, s = STUCK[i]
    refuter = Refuter(theory)
    got = generate_conjectures(s, theory, 8)
    assert len(got) <= 8 and len(got) == len(set(got))
    assert got == generate_conjectures(s, theory, 8)
    for c in got:
        v = filter_conjecture(theory, s, c, refuter=refuter)
        assert v == filter_conjecture(theory, s, c, refuter=Refuter(theory))
        if isinstance(v, Refuted):
            assert falsifies(theory, c, v.counterexample.assignment)
        if isinstance(v, Valuable):
            assert prove_implication(theory, c, s)


def test_cap_is_respected():
    s = rev_rev_stuck()
    assert len(generate_conjectures(s, TH, 3)) == 3
    assert generate_conjectures(s, TH, 0) == []

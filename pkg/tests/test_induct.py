from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load
from unired.evaluation import find_counterexample
from unired.induct import InvalidArgs, apply_cases, apply_induction, candidate_applications
from unired.kernel import (
    App,
    Formula,
    Var,
    make_sequent,
    match,
    sequent_vars,
)
from unired.steps import InductArgs
from unired.syntax import parse_formula, parse_term

TH = load("listrev.thy")
ARITH = load("arith.thy")


def seq(text, theory=TH):
    return make_sequent(parse_formula(text, theory))


def test_app_nil_has_one_candidate():
    assert candidate_applications(seq("app xs Nil = xs"), TH) == [InductArgs(("xs",))]


def test_itrev_generalised_candidates():
    got = candidate_applications(seq("itrev xs ys = app (rev xs) ys"), TH)
    for expected in [
        InductArgs(("xs",)),
        InductArgs(("xs",), ("ys",)),
        InductArgs(("ys",)),
        InductArgs(("ys",), ("xs",)),
        InductArgs(("xs", "ys"), (), "itrev"),
    ]:
        assert expected in got
    # rev xs is an all-variable call, so it supplies rule candidates too
    assert InductArgs(("xs",), (), "rev") in got
    assert len(got) == len(set(got)) == 7


def test_closed_goal_has_no_candidates():
    assert candidate_applications(seq("Zero = Zero"), TH) == []


def test_structural_cases_of_app_nil():
    base, step = apply_induction(seq("app xs Nil = xs"), InductArgs(("xs",)), TH)
    assert base.hyps == ()
    assert base.target == parse_formula("app Nil Nil = Nil", TH)
    [ih] = step.hyps
    x, xs1 = step.fixed
    assert ih.schematic == frozenset()
    assert ih.formula.conclusion.lhs == App("app", (xs1, App("Nil")))
    assert step.target.conclusion.rhs == App("Cons", (x, xs1))


def test_arbitrary_variables_become_schematic():
    _, step = apply_induction(seq("itrev xs ys = app (rev xs) ys"), InductArgs(("xs",), ("ys",)), TH)
    [ih] = step.hyps
    [y_hat] = ih.schematic
    assert y_hat not in {v.name for v in step.fixed}
    assert ih.formula.conclusion.lhs.args[1] == Var(y_hat, "list")


def test_recursion_induction_follows_itrev():
    cases = apply_induction(seq("itrev xs ys = app (rev xs) ys"), InductArgs(("xs", "ys"), (), "itrev"),
                            TH)
    assert len(cases) == 2
    base, step = cases
    assert base.hyps == ()
    [ih] = step.hyps
    lhs = step.target.conclusion.lhs
    pat = parse_term("itrev (Cons x xs1) ys2", TH)
    sigma = match(pat, lhs)
    assert sigma is not None
    assert ih.formula.conclusion.lhs == App(
        "itrev", (sigma["xs1"], App("Cons", (sigma["x"], sigma["ys2"]))))


def test_cases_without_hypotheses():
    nil, cons = apply_cases(seq("len xs = len xs"), "xs", TH)
    assert nil.target == parse_formula("len Nil = len Nil", TH)
    assert cons.hyps == ()
    assert cons.target.conclusion.lhs.args[0].symbol == "Cons"


@pytest.mark.parametrize("args", [
    InductArgs(("zs",)),
    InductArgs(("xs",), ("xs",)),
    InductArgs(("xs", "ys")),
    InductArgs(("xs",), (), "nosuch"),
    InductArgs(("xs",), (), "itrev"),
])
def test_invalid_arguments(args):
    with pytest.raises(InvalidArgs):
        apply_induction(seq("itrev xs ys = app (rev xs) ys"), args, TH)


def test_cases_on_absent_variable_is_invalid():
    with pytest.raises(InvalidArgs):
        apply_cases(seq("app xs Nil = xs"), "n", TH)


CORPUS = [(ARITH, f) for _, f in ARITH.goals] + [
    (TH, parse_formula("itrev xs ys = app (rev xs) ys", TH)),
    (TH, parse_formula("itrev xs Nil = rev xs", TH)),
]


def _all_applications():
    out = []
    for theory, f in CORPUS:
        s = make_sequent(f)
        for a in candidate_applications(s, theory):
            out.append((theory, s, a))
    return out


APPS = _all_applications()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(APPS))
def test_cases_preserve_ground_truth(item):
    theory, s, args = item
    assert find_counterexample(theory, s.target, 6) is None
    for case in apply_induction(s, args, theory):
        assert find_counterexample(theory, case.target, 6) is None
        for h in case.hyps:
            assert find_counterexample(theory, h.formula, 6) is None


@given(st.sampled_from(APPS))
def test_fresh_names_do_not_collide(item):
    theory, s, args = item
    before = set(sequent_vars(s))
    fixed_before = {v.name for v in s.fixed}
    for case in apply_induction(s, args, theory):
        introduced = set(sequent_vars(case)) - before
        assert not introduced & fixed_before
        assert not introduced & theory.symbols()
        for h in case.hyps:
            assert not h.schematic & {v.name for v in case.fixed}


@given(st.sampled_from(APPS))
def test_case_count(item):
    theory, s, args = item
    cases = apply_induction(s, args, theory)
    if args.rule is None:
        x = next(v for v in s.fixed if v.name == args.on[0])
        assert len(cases) == len(theory.constructors(x.type))
    else:
        assert len(cases) == len(theory.functions[args.rule].equations)


def test_premises_survive_induction():
    s = seq("add x y = Zero ==> x = Zero", ARITH)
    for case in apply_induction(s, InductArgs(("x",)), ARITH):
        assert len(case.target.premises) == 1
        assert isinstance(case.target, Formula)

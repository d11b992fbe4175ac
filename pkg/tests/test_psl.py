from __future__ import annotations

import pytest

from conftest import load
from unired.config import Config
from unired.deduct import Solved, auto
from unired.induct import apply_induction, candidate_applications
from unired.kernel import make_sequent
from unired.mlfeat import default_features, default_weights
from unired.psl import DInd, NotFound, StrategyContext, apply_strategy, run_strategy
from unired.replay import Proved, check_script
from unired.steps import (
    Auto,
    Conjecture,
    Dynamic,
    Induct,
    InductArgs,
    IsSolved,
    Ors,
    ProofScript,
    Qed,
    Repeat,
    SAuto,
    SSimp,
    Thens,
)
from unired.syntax import parse_formula, parse_strategy, parse_theory, print_theory

TH = load("listrev.thy")


def goal(name, theory=TH):
    return theory.goal(name)


def test_dind_first_success_on_app_nil():
    root = (make_sequent(goal("app_nil")),)
    goals, steps = next(iter(apply_strategy(TH, root, DInd, 1)))
    assert goals == ()
    assert steps == (Induct(InductArgs(("xs",))), Auto())


def test_is_solved_on_open_state_yields_nothing():
    assert list(apply_strategy(TH, (make_sequent(goal("app_nil")),), IsSolved(), 3)) == []


def test_ors_on_solved_state_takes_first_branch():
    out = list(apply_strategy(TH, (), Ors((IsSolved(), SAuto())), 1))
    assert out[0] == ((), ())


@pytest.mark.parametrize("name", ["app_nil", "app_assoc"])
def test_dind_direct_induction(name):
    r = run_strategy(TH, goal(name), DInd, name=name)
    assert r == ProofScript(name, (Induct(InductArgs(("xs",))), Auto(), Qed()), ())


def test_dind_cannot_prove_rev_rev():
    assert run_strategy(TH, goal("rev_rev"), DInd) == NotFound("exhausted")


def test_reflexive_goal():
    f = parse_formula("rev xs = rev xs", TH)
    r = run_strategy(TH, f, Thens((SAuto(), IsSolved())), name="refl")
    assert r.steps == (Auto(), Qed())


def test_conjecturing_strategy_proves_rev_rev():
    st = parse_strategy(
        "Thens [Dynamic(Induct), Auto, Dynamic(Conjecture), Auto, Dynamic(Induct), Auto, IsSolved]")
    r = run_strategy(TH, goal("rev_rev"), st, name="rev_rev")
    assert isinstance(r, ProofScript)
    assert any(isinstance(s, Conjecture) for s in r.steps)
    assert check_script(TH, "rev_rev", r) == Proved(r)


def test_node_budget():
    cfg = Config(strategy_nodes=3)
    assert run_strategy(TH, goal("rev_rev"), DInd, cfg) == NotFound("budget")


def test_repeat_is_greedy():
    s = (make_sequent(parse_formula("Suc (Suc x) = Suc (Suc y)", TH)),)
    out = list(apply_strategy(TH, s, Repeat(SAuto(), 3), 1))
    assert out[0][1] == (Auto(),)  # iterate first
    assert out[-1] == (s, ())  # zero iterations last


def _brute_force_dind(theory, formula) -> bool:
    s = make_sequent(formula)
    for a in candidate_applications(s, theory):
        if all(isinstance(auto(theory, c), Solved) for c in apply_induction(s, a, theory)):
            return True
    return False


CORPORA = ["listrev.thy", "arith.thy"]


@pytest.mark.parametrize("path", CORPORA)
def test_dind_agrees_with_brute_force(path):
    theory = load(path)
    for name, f in theory.goals:
        expected = _brute_force_dind(theory, f)
        r = run_strategy(theory, f, DInd, name=name)
        assert isinstance(r, ProofScript) == expected, name
        if expected:
            assert check_script(theory, name, r) == Proved(r)
            theory.add_lemma(name, f)


STRATEGIES = [
    DInd,
    Ors((Thens((SAuto(), IsSolved())), DInd)),
    Thens((Dynamic("Induct"), Repeat(SAuto(), 2), IsSolved())),
    Thens((Dynamic("Induct"), Ors((SSimp(), SAuto())), Repeat(SAuto(), 2), IsSolved())),
]


@pytest.mark.parametrize("strategy", STRATEGIES)
@pytest.mark.parametrize("name", ["app_nil", "app_assoc"])
def test_iddfs_dominance(strategy, name):
    root = (make_sequent(goal(name)),)
    ctx = StrategyContext(TH)
    found = {}
    for d in range(1, 5):
        found[d] = {steps for goals, steps in apply_strategy(TH, root, strategy, d, ctx) if not goals}
    for d in range(1, 5):
        for later in range(d, 5):
            assert found[d] <= found[later]
    assert found[4]


def test_ranked_candidates_are_tried_first():
    feats_ctx = StrategyContext(TH)
    ranked = StrategyContext(TH, features=default_features(), weights=default_weights())
    s = make_sequent(parse_formula("itrev xs ys = app (rev xs) ys", TH))
    assert ranked.induction_candidates(s)[0] == InductArgs(("xs",), ("ys",))
    assert feats_ctx.induction_candidates(s) == candidate_applications(s, TH)


def test_named_strategy_definition_parses():
    assert parse_strategy("strategy Mine = Thens [Dynamic(Induct), Auto, IsSolved]") == DInd


def test_scripts_record_lemmas_in_scope():
    th = parse_theory(print_theory(TH))
    th.add_lemma("app_nil", goal("app_nil"))
    r = run_strategy(th, goal("app_assoc"), DInd, name="app_assoc")
    assert r.using == ("app_nil",)

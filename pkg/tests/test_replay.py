from __future__ import annotations

import random
from dataclasses import replace

import pytest

from conftest import load
from gen import mutate
from unired.kernel import make_sequent
from unired.replay import Proved, ReplayError, StepRunner, check_script
from unired.steps import Auto, Cases, Induct, InductArgs, ProofScript, Qed, Simp
from unired.syntax import parse_formula, parse_script
from unired.unite import united_prove

TH = load("listrev.thy")


def _prove_in_order():
    th = TH.copy()
    out = {}
    for name, _ in th.goals:
        r = united_prove(th, name)
        out[name] = r.script
    return th, out


PROVED_THEORY, SCRIPTS = _prove_in_order()
FALSE_CONJECTURE = parse_formula("rev xs = xs", TH)


def test_every_goal_has_a_replayable_script():
    for name, script in SCRIPTS.items():
        assert check_script(PROVED_THEORY, name, script) == Proved(script)


def test_app_assoc_direct_script():
    sc = parse_script("proof app_assoc\n  induct xs\n  auto\nqed", TH)
    assert check_script(TH, "app_assoc", sc) == Proved(sc)


def test_missing_auto_fails_at_qed():
    sc = ProofScript("app_assoc", (Induct(InductArgs(("xs",))), Qed()))
    r = check_script(TH, "app_assoc", sc)
    assert isinstance(r, ReplayError) and r.step_index == 2


def test_script_for_another_goal_is_rejected():
    # the app_nil script would in fact close app_assoc; the header decides
    r = check_script(TH, "app_assoc", replace(SCRIPTS["app_nil"], using=()))
    assert r == ReplayError(1, "script proves app_nil, not app_assoc")


def test_script_may_not_cite_its_own_goal():
    sc = ProofScript("rev_rev", (Auto(), Qed()), ("rev_rev",))
    r = check_script(PROVED_THEORY, "rev_rev", sc)
    assert isinstance(r, ReplayError) and "own goal" in r.reason


def test_goal_is_not_its_own_lemma_when_using_is_open():
    sc = ProofScript("rev_rev", (Auto(), Qed()))
    assert isinstance(check_script(PROVED_THEORY, "rev_rev", sc), ReplayError)


def test_unknown_lemma_and_goal():
    sc = ProofScript("app_nil", (Auto(), Qed()), ("nope",))
    assert check_script(TH, "app_nil", sc).step_index == 0
    assert check_script(TH, "nope", sc).step_index == 0


def test_steps_after_qed():
    sc = ProofScript("app_nil", (Induct(InductArgs(("xs",))), Auto(), Qed(), Auto()))
    assert check_script(TH, "app_nil", sc) == ReplayError(4, "steps after qed")


def test_missing_qed():
    sc = ProofScript("app_nil", (Induct(InductArgs(("xs",))), Auto()))
    assert check_script(TH, "app_nil", sc) == ReplayError(3, "missing qed")


def test_no_progress_is_an_error():
    sc = ProofScript("rev_rev", (Simp(), Qed()))
    r = check_script(TH, "rev_rev", sc)
    assert r == ReplayError(1, "no progress")


def test_step_errors_name_the_failing_step():
    sc = ProofScript("app_nil", (Induct(InductArgs(("ys",))), Auto(), Qed()))
    assert check_script(TH, "app_nil", sc).step_index == 1
    sc = ProofScript("app_nil", (Cases("zs"), Qed()))
    assert check_script(TH, "app_nil", sc).step_index == 1


def test_runner_acts_on_first_goal_only_for_structural_steps():
    runner = StepRunner(TH)
    a = parse_formula("app xs Nil = xs", TH)
    b = parse_formula("rev (rev xs) = xs", TH)
    goals = (make_sequent(a), make_sequent(b))
    after = runner.apply(goals, Induct(InductArgs(("xs",))))
    assert len(after) == 3 and after[-1] == goals[1]


@pytest.mark.parametrize("name", ["app_nil", "app_assoc"])
def test_cases_cannot_replace_a_needed_induction(name):
    script = SCRIPTS[name]
    steps = tuple(Cases(s.args.on[0]) if isinstance(s, Induct) else s for s in script.steps)
    assert isinstance(check_script(PROVED_THEORY, name, replace(script, steps=steps)), ReplayError)


@pytest.mark.parametrize("name", list(SCRIPTS))
def test_every_single_deletion_is_rejected(name):
    script = SCRIPTS[name]
    for i in range(len(script.steps)):
        m = replace(script, steps=script.steps[:i] + script.steps[i + 1:])
        assert isinstance(check_script(PROVED_THEORY, name, m), ReplayError), i


@pytest.mark.parametrize("name", list(SCRIPTS))
@pytest.mark.parametrize("seed", range(20))
def test_random_mutations_are_rejected(name, seed):
    script = SCRIPTS[name]
    m = mutate(script, random.Random(f"{name}/{seed}"), FALSE_CONJECTURE)
    if m.steps == script.steps:
        return  # a swap of two equal steps
    assert isinstance(check_script(PROVED_THEORY, name, m), ReplayError)

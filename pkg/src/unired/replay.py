"""Deterministic proof-step semantics and the script replay checker.

``induct``, ``cases`` and ``conjecture`` act on the first open sequent.
``auto`` and ``simp`` act on every open sequent and fail when none changes.
Replay never searches, ranks or refutes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .abduce import insert_conjecture
from .config import Config
from .deduct import Progress, Solved, _auto, _simp
from .induct import InvalidArgs, apply_cases, apply_induction
from .kernel import Sequent, Theory, make_sequent
from .steps import Auto, Cases, Conjecture, Induct, ProofScript, Qed, Simp


class StepError(Exception):
    pass


@dataclass(frozen=True)
class Proved:
    script: ProofScript


@dataclass(frozen=True)
class ReplayError:
    step_index: int  # 1-based; len(steps) + 1 when Qed is missing
    reason: str


class StepRunner:
    """Applies proof steps to goal lists, memoising deduction per sequent."""

    def __init__(self, theory: Theory, config: Config = Config()):
        self.theory = theory
        self.config = config
        self.budgets = config.budgets()
        self._auto: dict = {}
        self._simp: dict = {}
        self._lemmas = tuple(theory.lemma_names())

    def _fresh_caches(self):
        key = tuple(self.theory.lemma_names())
        if key != self._lemmas:
            self._auto.clear()
            self._simp.clear()
            self._lemmas = key

    def auto(self, s: Sequent):
        self._fresh_caches()
        hit = self._auto.get(s)
        if hit is None:
            hit = self._auto[s] = _auto(self.theory, s, self.budgets)
        return hit

    def simp(self, s: Sequent):
        self._fresh_caches()
        hit = self._simp.get(s)
        if hit is None:
            hit = self._simp[s] = _simp(self.theory, s, self.budgets)
        return hit

    def deduce(self, goals: tuple, method) -> tuple:
        out = []
        changed = False
        for s in goals:
            r = method(s)
            if isinstance(r, Solved):
                changed = True
            elif isinstance(r, Progress):
                changed = True
                out.extend(r.residual)
            else:
                out.append(s)
        if not changed:
            raise StepError("no progress")
        return tuple(out)

    def apply(self, goals: tuple, step) -> tuple:
        if isinstance(step, Qed):
            if goals:
                raise StepError(f"{len(goals)} goal(s) remain")
            return goals
        if isinstance(step, Auto):
            return self.deduce(goals, self.auto)
        if isinstance(step, Simp):
            return self.deduce(goals, self.simp)
        if not goals:
            raise StepError("no open goal")
        first, rest = goals[0], goals[1:]
        try:
            if isinstance(step, Induct):
                return tuple(apply_induction(first, step.args, self.theory)) + rest
            if isinstance(step, Cases):
                return tuple(apply_cases(first, step.var, self.theory)) + rest
        except InvalidArgs as e:
            raise StepError(str(e)) from None
        if isinstance(step, Conjecture):
            return tuple(insert_conjecture(first, step.formula, self.theory)) + rest
        raise StepError(f"unknown step {step!r}")


def scoped_theory(theory: Theory, using: Optional[tuple]) -> Theory:
    """The theory restricted to the lemmas a script declares; KeyError on unknown names."""
    if using is None:
        return theory
    known = dict(theory.lemmas)
    missing = [n for n in using if n not in known]
    if missing:
        raise KeyError(", ".join(missing))
    scoped = theory.copy()
    scoped.lemmas = [(n, known[n]) for n in using]
    return scoped


def check_script(theory: Theory, goal_name: str, script: ProofScript,
                 config: Config = Config()):
    """Replay ``script`` against the goal; Proved or the first ReplayError."""
    try:
        goal = theory.goal(goal_name)
    except KeyError:
        return ReplayError(0, f"unknown goal {goal_name}")
    if script.goal != goal_name:
        return ReplayError(1, f"script proves {script.goal}, not {goal_name}")
    if script.using is not None and goal_name in script.using:
        return ReplayError(0, f"script cites its own goal {goal_name}")
    try:
        scoped = scoped_theory(theory, script.using)
    except KeyError as e:
        return ReplayError(0, f"unknown lemma(s) {e.args[0]}")
    # a goal is never a lemma for itself
    if goal_name in scoped.lemma_names():
        scoped = scoped.copy()
        scoped.lemmas = [(n, f) for n, f in scoped.lemmas if n != goal_name]
    runner = StepRunner(scoped, config)
    goals = (make_sequent(goal),)
    for i, step in enumerate(script.steps, 1):
        try:
            goals = runner.apply(goals, step)
        except StepError as e:
            return ReplayError(i, str(e))
        if isinstance(step, Qed):
            if i != len(script.steps):
                return ReplayError(i + 1, "steps after qed")
            return Proved(script)
    return ReplayError(len(script.steps) + 1, "missing qed")

"""Rewriting-based simplifier, the ``auto`` goal closer and implication checking.

Defining equations and proved lemmas are applied innermost to a normal form.
Hypotheses (including induction hypotheses and inserted conjectures) are
applied outermost in both orientations on top of that, with a seen-set and a
per-rule application cap for schematic rules, so self-looping rules such as
``itrev xs ys -> app (itrev xs Nil) ys`` cannot run away.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .kernel import (
    App,
    Equation,
    Formula,
    Hypothesis,
    Sequent,
    Theory,
    Var,
    formula_vars,
    fresh_name,
    match,
    positions,
    prune_fixed,
    replace_at,
    sequent_vars,
    subst_equation,
    subst_formula,
    substitute,
    subterms,
    variables,
)

DEFAULT_SIMP_BUDGET = 2000
DEFAULT_AUTO_BUDGET = 500
DEFAULT_RULE_CAP = 3
# rewrites may nest at most this deep before the budget counts as spent;
# keeps growing rule sets clear of the interpreter's recursion limit
MAX_REWRITE_NESTING = 60


@dataclass(frozen=True)
class Solved:
    trace: tuple = ()


@dataclass(frozen=True)
class Progress:
    residual: tuple
    trace: tuple = ()


@dataclass(frozen=True)
class Stuck:
    trace: tuple = ()


@dataclass(frozen=True)
class RewriteRule:
    lhs: object
    rhs: object
    conditions: tuple = ()
    schematic: Optional[frozenset] = None  # None: every variable is a pattern variable
    origin: str = "lemma"
    name: str = ""

    @property
    def capped(self) -> bool:
        return self.origin in ("hypothesis", "conjecture") and bool(self.schematic)


@dataclass(frozen=True)
class Budgets:
    simp: int = DEFAULT_SIMP_BUDGET
    auto: int = DEFAULT_AUTO_BUDGET
    rule_cap: int = DEFAULT_RULE_CAP
    induction: bool = True  # one level of induction inside prove_implication


def _pattern_vars(term, schematic) -> set:
    names = set(variables(term))
    return names if schematic is None else names & schematic


def _orientations(lhs, rhs, conditions, schematic, origin, name):
    """Valid rewrite rules for an equation, left-to-right first."""
    out = []
    for l, r in ((lhs, rhs), (rhs, lhs)):
        if isinstance(l, Var) or l == r:
            continue
        bound = _pattern_vars(l, schematic)
        needed = _pattern_vars(r, schematic)
        for c in conditions:
            needed |= _pattern_vars(c.lhs, schematic) | _pattern_vars(c.rhs, schematic)
        if needed <= bound:
            out.append(RewriteRule(l, r, tuple(conditions), schematic, origin, name))
    return out


def _is_permutative(lhs, rhs) -> bool:
    return match(lhs, rhs) is not None and match(rhs, lhs) is not None


def lemma_rules(theory: Theory) -> dict:
    """Proved lemmas as rules indexed by head symbol (cached on the theory)."""
    key = tuple(theory.lemma_names())
    cached = getattr(theory, "_lemma_rule_cache", None)
    if cached is not None and cached[0] == key:
        return cached[1]
    index: dict = {}
    for name, f in theory.lemmas:
        c = f.conclusion
        if _is_permutative(c.lhs, c.rhs):
            continue
        rules = _orientations(c.lhs, c.rhs, f.premises, None, "lemma", name)
        if rules:
            rule = rules[0]
            index.setdefault(rule.lhs.symbol, []).append(rule)
    theory._lemma_rule_cache = (key, index)
    return index


class Rewriter:
    """Innermost normaliser for defining equations and proved lemmas."""

    def __init__(self, theory: Theory, budget: int = DEFAULT_SIMP_BUDGET):
        self.theory = theory
        self.steps = budget
        self.lemmas = lemma_rules(theory)
        self.memo: dict = {}
        self.trace: list = []
        self._depth = 0
        self._nesting = 0

    def exhausted(self) -> bool:
        return self.steps <= 0

    def normalize(self, term):
        if isinstance(term, Var):
            return term
        hit = self.memo.get(term)
        if hit is not None:
            return hit
        args = tuple(self.normalize(a) for a in term.args)
        t = term if all(a is b for a, b in zip(args, term.args)) else App(term.symbol, args)
        result = t
        if not self.exhausted():
            r = self._rewrite_root(t)
            if r is not None:
                self.steps -= 1
                if self._nesting >= MAX_REWRITE_NESTING:
                    self.steps = 0
                    return r
                self._nesting += 1
                try:
                    result = self.normalize(r)
                finally:
                    self._nesting -= 1
        if not self.exhausted():
            self.memo[term] = result
        return result

    def normalize_eq(self, eq: Equation) -> Equation:
        return Equation(self.normalize(eq.lhs), self.normalize(eq.rhs))

    def _rewrite_root(self, t):
        fn = self.theory.functions.get(t.symbol)
        if fn is not None:
            for pats, rhs in fn.equations:
                subst: Optional[dict] = {}
                for p, a in zip(pats, t.args):
                    subst = match(p, a, subst)
                    if subst is None:
                        break
                if subst is not None:
                    return substitute(rhs, subst)
        for rule in self.lemmas.get(t.symbol, ()):
            subst = match(rule.lhs, t)
            if subst is None:
                continue
            if rule.conditions and not self._conditions(rule, subst):
                continue
            self.trace.append(rule.name)
            return substitute(rule.rhs, subst)
        return None

    def _conditions(self, rule: RewriteRule, subst: dict) -> bool:
        if self._depth >= 2:
            return False
        self._depth += 1
        try:
            for c in rule.conditions:
                eq = subst_equation(c, subst)
                if self.normalize(eq.lhs) != self.normalize(eq.rhs):
                    return False
            return True
        finally:
            self._depth -= 1


def constructor_clash(theory: Theory, lhs, rhs) -> bool:
    """True when the two sides can never be equal by constructor distinctness."""
    stack = [(lhs, rhs)]
    while stack:
        a, b = stack.pop()
        if isinstance(a, Var) and isinstance(b, Var):
            continue
        if isinstance(a, Var) or isinstance(b, Var):
            v, t = (a, b) if isinstance(a, Var) else (b, a)
            if _occurs_under_constructors(theory, v, t):
                return True
            continue
        ca, cb = theory.is_constructor(a.symbol), theory.is_constructor(b.symbol)
        if ca and cb:
            if a.symbol != b.symbol:
                return True
            stack.extend(zip(a.args, b.args))
    return False


def _occurs_under_constructors(theory: Theory, v: Var, t) -> bool:
    if not (isinstance(t, App) and theory.is_constructor(t.symbol)):
        return False
    stack = list(t.args)
    while stack:
        s = stack.pop()
        if s == v:
            return True
        if isinstance(s, App) and theory.is_constructor(s.symbol):
            stack.extend(s.args)
    return False


def _known(eq: Equation, facts) -> bool:
    return eq in facts or Equation(eq.rhs, eq.lhs) in facts


class _Simplifier:
    def __init__(self, theory: Theory, budgets: Budgets):
        self.theory = theory
        self.budgets = budgets
        self.rw = Rewriter(theory, budgets.simp)

    def is_value(self, term) -> bool:
        return all(isinstance(t, Var) or self.theory.is_constructor(t.symbol) for t in subterms(term))

    def facts(self, hyps, premises) -> set:
        out = set(premises)
        for h in hyps:
            if not h.schematic and not h.formula.premises:
                out.add(h.formula.conclusion)
        return out

    def conditions_hold(self, conditions, subst: dict, schematic, facts) -> bool:
        for c in conditions:
            eq = subst_equation(c, subst)
            if schematic and (set(variables(eq.lhs)) | set(variables(eq.rhs))) & schematic:
                return False
            eq = self.rw.normalize_eq(eq)
            if eq.lhs != eq.rhs and not _known(eq, facts):
                return False
        return True

    def hyp_rules(self, hyps, premises) -> dict:
        index: dict = {}
        entries = []
        for h in hyps:
            origin = "conjecture" if h.schematic and not (
                set(formula_vars(h.formula)) - h.schematic
            ) else "hypothesis"
            conclusion = self.rw.normalize_eq(h.formula.conclusion)
            entries.append((conclusion, h.formula.premises, frozenset(h.schematic), origin))
        for p in premises:
            entries.append((p, (), frozenset(), "premise"))
        for k, (eq, conds, schem, origin) in enumerate(entries):
            for rule in _orientations(eq.lhs, eq.rhs, conds, schem, origin, f"{origin}{k}"):
                # never turn a constructor value back into a computation
                if self.is_value(rule.lhs) and not self.is_value(rule.rhs):
                    continue
                index.setdefault(rule.lhs.symbol, []).append(rule)
        return index

    def run(self, sequent: Sequent):
        theory = self.theory
        rw = self.rw
        fixed = list(sequent.fixed)
        hyps = []
        for h in sequent.hyps:
            if not h.schematic and not h.formula.premises:
                eq = rw.normalize_eq(h.formula.conclusion)
                if constructor_clash(theory, eq.lhs, eq.rhs):
                    return Solved(("hypothesis clash",)), None
                if eq.lhs == eq.rhs:
                    continue
                hyps.append(Hypothesis(Formula((), eq)))
            else:
                hyps.append(h)
        premises = list(sequent.target.premises)
        conclusion = sequent.target.conclusion
        changed = True
        while changed:
            changed = False
            normed = []
            for p in premises:
                eq = rw.normalize_eq(p)
                if constructor_clash(theory, eq.lhs, eq.rhs):
                    return Solved(("premise clash",)), None
                if eq.lhs != eq.rhs and eq not in normed:
                    normed.append(eq)
            premises = normed
            for i, p in enumerate(premises):
                elim = _eliminable(p, {v.name for v in fixed})
                if elim is None:
                    continue
                name, value = elim
                s = {name: value}
                premises = [subst_equation(q, s) for j, q in enumerate(premises) if j != i]
                conclusion = subst_equation(conclusion, s)
                hyps = [
                    h if h.schematic and name in h.schematic
                    else Hypothesis(subst_formula(h.formula, s), h.schematic)
                    for h in hyps
                ]
                fixed = [v for v in fixed if v.name != name]
                changed = True
                break
        facts = self.facts(hyps, premises)
        rules = self.hyp_rules(hyps, premises)
        l, r = rw.normalize(conclusion.lhs), rw.normalize(conclusion.rhs)
        seen = {(l, r)}
        uses: dict = {}
        trace = []
        while l != r and not _known(Equation(l, r), facts) and not rw.exhausted():
            step = self._hyp_step(l, r, rules, uses, seen, facts)
            if step is None:
                break
            l, r, rule = step
            seen.add((l, r))
            trace.append(rule.name)
            rw.steps -= 1
        if l == r or _known(Equation(l, r), facts):
            return Solved(tuple(rw.trace + trace)), None
        target = Formula(tuple(premises), Equation(l, r))
        result = prune_fixed(Sequent(tuple(fixed), tuple(hyps), target))
        return None, (result, tuple(rw.trace + trace))

    def _hyp_step(self, l, r, rules, uses, seen, facts):
        for side in (0, 1):
            term = (l, r)[side]
            for path, sub in positions(term):
                if isinstance(sub, Var):
                    continue
                for rule in rules.get(sub.symbol, ()):
                    if rule.capped and uses.get(rule, 0) >= self.budgets.rule_cap:
                        continue
                    subst = match(rule.lhs, sub, variables=rule.schematic)
                    if subst is None:
                        continue
                    if rule.conditions and not self.conditions_hold(
                        rule.conditions, subst, rule.schematic, facts
                    ):
                        continue
                    new = self.rw.normalize(replace_at(term, path, substitute(rule.rhs, subst)))
                    cand = (new, r) if side == 0 else (l, new)
                    if cand in seen:
                        continue
                    uses[rule] = uses.get(rule, 0) + 1
                    return cand[0], cand[1], rule
        return None


def _eliminable(eq: Equation, fixed_names: set):
    for v, t in ((eq.lhs, eq.rhs), (eq.rhs, eq.lhs)):
        if isinstance(v, Var) and v.name in fixed_names and v.name not in variables(t):
            return v.name, t
    return None


def simp(theory: Theory, sequent: Sequent, budget: int = DEFAULT_SIMP_BUDGET,
         rule_cap: int = DEFAULT_RULE_CAP):
    """Rewrite a sequent; returns Solved, Progress([sequent']) or Stuck."""
    budgets = Budgets(simp=budget, rule_cap=rule_cap)
    return _simp(theory, sequent, budgets)


def _simp(theory: Theory, sequent: Sequent, budgets: Budgets):
    solved, rest = _Simplifier(theory, budgets).run(sequent)
    if solved is not None:
        return solved
    result, trace = rest
    if result == sequent:
        return Stuck(trace)
    return Progress((result,), trace)


def _instantiates_hypothesis(theory: Theory, s: Sequent, budgets: Budgets) -> bool:
    goal = s.target.conclusion
    simp_ = _Simplifier(theory, budgets)
    facts = simp_.facts(s.hyps, s.target.premises)
    for h in s.hyps:
        c = h.formula.conclusion
        schem = h.schematic or frozenset()
        for a, b in ((c.lhs, c.rhs), (c.rhs, c.lhs)):
            subst = match(a, goal.lhs, variables=schem)
            if subst is not None:
                subst = match(b, goal.rhs, subst, variables=schem)
            if subst is None:
                continue
            if simp_.conditions_hold(h.formula.premises, subst, schem, facts):
                return True
    return False


def _injectivity(theory: Theory, s: Sequent) -> Optional[list]:
    c = s.target.conclusion
    l, r = c.lhs, c.rhs
    if not (isinstance(l, App) and isinstance(r, App)):
        return None
    if l.symbol != r.symbol or not theory.is_constructor(l.symbol) or not l.args:
        return None
    return [
        prune_fixed(Sequent(s.fixed, s.hyps, Formula(s.target.premises, Equation(a, b))))
        for a, b in zip(l.args, r.args)
        if a != b
    ]


def auto(theory: Theory, sequent: Sequent, budget: int = DEFAULT_AUTO_BUDGET,
         simp_budget: int = DEFAULT_SIMP_BUDGET, rule_cap: int = DEFAULT_RULE_CAP):
    """Simplification plus constructor reasoning and hypothesis instantiation."""
    return _auto(theory, sequent, Budgets(simp_budget, budget, rule_cap))


def _auto(theory: Theory, sequent: Sequent, budgets: Budgets):
    work = deque([sequent])
    residual = []
    trace = []
    iterations = 0
    while work:
        s = work.popleft()
        iterations += 1
        if iterations > budgets.auto:
            residual.append(s)
            residual.extend(work)
            break
        out = _simp(theory, s, budgets)
        trace.extend(out.trace)
        if isinstance(out, Solved):
            continue
        if isinstance(out, Progress):
            s = out.residual[0]
        if _instantiates_hypothesis(theory, s, budgets):
            trace.append("hypothesis")
            continue
        split = _injectivity(theory, s)
        if split is not None:
            trace.append("injectivity")
            work.extendleft(reversed(split))
            continue
        residual.append(s)
    if not residual:
        return Solved(tuple(trace))
    if residual == [sequent]:
        return Stuck(tuple(trace))
    return Progress(tuple(residual), tuple(trace))


class DeductCache:
    """Memoises auto results for one theory state; keyed by sequent."""

    def __init__(self, theory: Theory, budgets: Budgets):
        self.theory = theory
        self.budgets = budgets
        self._auto: dict = {}
        self._lemmas = tuple(theory.lemma_names())

    def auto(self, sequent: Sequent):
        key = tuple(self.theory.lemma_names())
        if key != self._lemmas:
            self._auto.clear()
            self._lemmas = key
        hit = self._auto.get(sequent)
        if hit is None:
            hit = _auto(self.theory, sequent, self.budgets)
            self._auto[sequent] = hit
        return hit


def with_conjecture(sequent: Sequent, conjecture: Formula, theory: Optional[Theory] = None) -> Sequent:
    """Add ``conjecture`` as a fully schematic hypothesis, renamed apart."""
    used = set(sequent_vars(sequent))
    if theory is not None:
        used |= theory.symbols()
    ren = {}
    for name, v in formula_vars(conjecture).items():
        new = fresh_name(name, used)
        used.add(new)
        ren[name] = Var(new, v.type)
    f = subst_formula(conjecture, ren)
    h = Hypothesis(f, frozenset(v.name for v in ren.values()))
    return Sequent(sequent.fixed, sequent.hyps + (h,), sequent.target)


def prove_implication(theory: Theory, conjecture: Formula, sequent: Sequent,
                      budgets: Budgets = Budgets(), cache: Optional[DeductCache] = None) -> bool:
    """Whether the sequent follows from the conjecture by ``auto``.

    With ``budgets.induction`` a single structural induction on one goal
    variable followed by ``auto`` on every case is also tried.
    """
    from .induct import apply_induction
    from .steps import InductArgs

    run = cache.auto if cache is not None else (lambda s: _auto(theory, s, budgets))
    first = with_conjecture(sequent, conjecture, theory)
    if isinstance(run(first), Solved):
        return True
    if not budgets.induction:
        return False
    for v in formula_vars(first.target).values():
        if v.type not in theory.datatypes:
            continue
        cases = apply_induction(first, InductArgs((v.name,)), theory)
        if all(isinstance(run(c), Solved) for c in cases):
            return True
    return False

"""Conjecture generation from stuck sequents and the discharge/refute filter.

Generation heuristics, applied to the target and to every hypothesis-rewritten
variant of it:

* hypothesis rewriting: one pass of each hypothesis in each orientation, on
  the left side, the right side, or both;
* common-subterm generalisation;
* constant-argument generalisation, synthesising right-hand sides with every
  binary function of a matching type;
* premise dropping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .deduct import Budgets, DeductCache, prove_implication, with_conjecture
from .evaluation import (
    DEFAULT_FUEL,
    Counterexample,
    Enumerator,
    Evaluator,
    find_counterexample,
)
from .kernel import (
    App,
    Equation,
    Formula,
    Sequent,
    Theory,
    Var,
    formula_vars,
    fresh_name,
    make_sequent,
    match,
    positions,
    replace_all,
    replace_at,
    substitute,
    subterms,
    subst_formula,
    term_size,
    variables,
)

DEFAULT_MAX_CONJECTURES = 8
DEFAULT_REFUTE_SIZE = 8
DEFAULT_REFUTE_TESTS = 5_000


@dataclass(frozen=True)
class Valuable:
    pass


@dataclass(frozen=True)
class NotStrongEnough:
    pass


@dataclass(frozen=True)
class Refuted:
    counterexample: Counterexample


def _rewrite_once(term, lhs, rhs, schematic):
    """Replace every outermost instance of ``lhs`` in one top-down pass."""
    subst = match(lhs, term, variables=schematic)
    if subst is not None:
        return substitute(rhs, subst)
    if isinstance(term, Var) or not term.args:
        return term
    args = tuple(_rewrite_once(a, lhs, rhs, schematic) for a in term.args)
    return App(term.symbol, args)


def _hypothesis_variants(sequent: Sequent) -> list:
    target = sequent.target
    out = []
    for h in sequent.hyps:
        if h.formula.premises:
            continue
        c = h.formula.conclusion
        schem = h.schematic or frozenset()
        for l, r in ((c.lhs, c.rhs), (c.rhs, c.lhs)):
            if isinstance(l, Var) and l.name in schem:
                continue
            if set(variables(r)) & schem - set(variables(l)):
                continue
            eq = target.conclusion
            new_l = _rewrite_once(eq.lhs, l, r, schem)
            new_r = _rewrite_once(eq.rhs, l, r, schem)
            for cand in (Equation(new_l, eq.rhs), Equation(eq.lhs, new_r), Equation(new_l, new_r)):
                if cand != eq:
                    out.append(Formula(target.premises, cand))
    return out


def _common_subterms(eq: Equation) -> list:
    right = set(subterms(eq.rhs))
    out = []
    for t in subterms(eq.lhs):
        if isinstance(t, App) and t in right and t not in out:
            out.append(t)
    return out


class _Fresh:
    def __init__(self, f: Formula, theory: Theory):
        self.used = set(formula_vars(f)) | theory.symbols()

    def var(self, type_name: str) -> Var:
        name = fresh_name("g", self.used)
        self.used.add(name)
        return Var(name, type_name)


def _generalise_common(f: Formula, theory: Theory) -> list:
    out = []
    for t in _common_subterms(f.conclusion):
        ty = theory.type_of(t)
        if ty is None:
            continue
        v = _Fresh(f, theory).var(ty)
        eq = f.conclusion
        out.append(Formula(
            tuple(Equation(replace_all(p.lhs, t, v), replace_all(p.rhs, t, v)) for p in f.premises),
            Equation(replace_all(eq.lhs, t, v), replace_all(eq.rhs, t, v)),
        ))
    return out


def _binary_functions(theory: Theory) -> list:
    return [fn for fn in theory.functions.values() if len(fn.arg_types) == 2]


def _generalise_constants(f: Formula, theory: Theory) -> list:
    eq = f.conclusion
    out = []
    rhs_type = theory.type_of(eq.rhs)
    for path, sub in positions(eq.lhs):
        if not path or isinstance(sub, Var) or sub.args or not theory.is_constructor(sub.symbol):
            continue
        ty = theory.type_of(sub)
        y = _Fresh(f, theory).var(ty)
        lhs = replace_at(eq.lhs, path, y)
        rhss = [eq.rhs]
        for fn in _binary_functions(theory):
            if fn.return_type != rhs_type:
                continue
            if fn.arg_types == (rhs_type, ty):
                rhss.append(App(fn.name, (eq.rhs, y)))
            if fn.arg_types == (ty, rhs_type):
                rhss.append(App(fn.name, (y, eq.rhs)))
        for r in rhss:
            out.append(Formula(f.premises, Equation(lhs, r)))
    return out


def _canonical_bases(theory: Theory) -> dict:
    """Variable stem per type: ``x``-style for flat types, ``xs``-style for containers."""
    out = {}
    for name, dt in theory.datatypes.items():
        container = any(
            name in ctypes and any(t != name for t in ctypes) for _, ctypes in dt.constructors
        )
        out[name] = "s" if container else ""
    return out


_LETTERS = "xyzwuvabcdefghijklmnopqrt"


def canonicalise(f: Formula, theory: Theory) -> Formula:
    """Rename variables by first occurrence to x, y, z... (xs, ys... for containers)."""
    suffix = _canonical_bases(theory)
    used = set(theory.symbols())
    counters: dict = {}
    ren = {}
    for name, v in formula_vars(f).items():
        k = counters.get(v.type, 0)
        while True:
            stem = _LETTERS[k % len(_LETTERS)] + suffix.get(v.type, "")
            if k >= len(_LETTERS):
                stem += str(k // len(_LETTERS))
            k += 1
            if stem not in used:
                break
        counters[v.type] = k
        used.add(stem)
        ren[name] = Var(stem, v.type)
    return subst_formula(f, ren)


def generate_conjectures(sequent: Sequent, theory: Theory,
                         max_conjectures: int = DEFAULT_MAX_CONJECTURES) -> list:
    """Deterministic, duplicate-free conjecture candidates, smallest first."""
    if max_conjectures <= 0:
        return []
    bases = [sequent.target] + _hypothesis_variants(sequent)
    raw = []
    for b in bases:
        raw.extend(_generalise_common(b, theory))
        raw.extend(_generalise_constants(b, theory))
        if b.premises:
            raw.append(Formula((), b.conclusion))
    own = canonicalise(sequent.target, theory)
    seen = set()
    ranked = []
    for i, f in enumerate(raw):
        c = canonicalise(f, theory)
        if c in seen or c == own or c.conclusion.lhs == c.conclusion.rhs:
            continue
        seen.add(c)
        size = sum(term_size(e.lhs) + term_size(e.rhs) for e in c.equations())
        ranked.append((size, i, c))
    ranked.sort(key=lambda t: (t[0], t[1]))
    return [c for _, _, c in ranked[:max_conjectures]]


class Refuter:
    """Shares evaluation and enumeration caches across many refutation calls."""

    def __init__(self, theory: Theory, max_size: int = DEFAULT_REFUTE_SIZE, fuel: int = DEFAULT_FUEL,
                 max_tests: Optional[int] = DEFAULT_REFUTE_TESTS):
        self.theory = theory
        self.max_size = max_size
        self.fuel = fuel
        self.max_tests = max_tests
        self.evaluator = Evaluator(theory)
        self.enumerator = Enumerator(theory)
        self.memo: dict = {}

    def __call__(self, f: Formula) -> Optional[Counterexample]:
        if f not in self.memo:
            self.memo[f] = find_counterexample(
                self.theory, f, self.max_size, self.fuel, self.evaluator, self.enumerator,
                self.max_tests,
            )
        return self.memo[f]


def filter_conjecture(theory: Theory, sequent: Sequent, conjecture: Formula,
                      budgets: Budgets = Budgets(), refuter: Optional[Refuter] = None,
                      cache: Optional[DeductCache] = None):
    if not prove_implication(theory, conjecture, sequent, budgets, cache):
        return NotStrongEnough()
    cex = (refuter or Refuter(theory))(conjecture)
    if cex is not None:
        return Refuted(cex)
    return Valuable()


def insert_conjecture(sequent: Sequent, conjecture: Formula,
                      theory: Optional[Theory] = None) -> list:
    """The two obligations: the sequent assuming the conjecture, and the conjecture."""
    return [with_conjecture(sequent, conjecture, theory), make_sequent(conjecture)]

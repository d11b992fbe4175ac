"""Ground evaluation, size-ordered term enumeration and counterexample search.

Counterexample search is exhaustive over a small scope rather than random:
every ground assignment up to a size bound is tried in a fixed order, so the
reported witness is reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .kernel import App, Formula, Theory, Var, formula_vars, match

DEFAULT_MAX_SIZE = 8
DEFAULT_FUEL = 10_000


class OutOfFuel(Exception):
    """Raised when evaluation needs more defining-equation applications than allowed."""


@dataclass(frozen=True)
class Counterexample:
    assignment: dict  # variable name -> ground constructor term

    def __hash__(self):
        return hash(tuple(sorted(self.assignment.items())))


class Evaluator:
    """Call-by-value evaluator with a result cache.

    The cache records the number of equation applications each call took,
    so a cache hit is charged exactly what recomputation would cost.
    """

    def __init__(self, theory: Theory):
        self.theory = theory
        self.cache: dict = {}
        # interned constructor values, so equal values are usually identical
        self.values: dict = {}
        self.fuel = 0

    def evaluate(self, term, fuel: int = DEFAULT_FUEL, env: Optional[dict] = None):
        """Normal form of ``term``; variables are looked up in ``env``."""
        if fuel <= 0:
            raise OutOfFuel()
        self.fuel = fuel
        self.env = {k: self.intern(v) for k, v in env.items()} if env else {}
        return self._eval(term)

    def intern(self, value):
        return self.values.setdefault(value, value)

    def _eval(self, term):
        if isinstance(term, Var):
            try:
                return self.env[term.name]
            except KeyError:
                raise ValueError(f"cannot evaluate open term (variable {term.name})") from None
        known = self.values.get(term)
        if known is not None:
            return known
        args = tuple(self._eval(a) for a in term.args)
        fn = self.theory.functions.get(term.symbol)
        if fn is None:
            value = App(term.symbol, args) if args else term
            return self.values.setdefault(value, value)
        key = (term.symbol, args)
        hit = self.cache.get(key)
        if hit is not None:
            value, cost = hit
            if cost > self.fuel:
                raise OutOfFuel()
            self.fuel -= cost
            return value
        if self.fuel <= 0:
            raise OutOfFuel()
        before = self.fuel
        self.fuel -= 1
        for pats, rhs in fn.equations:
            subst: Optional[dict] = {}
            for p, a in zip(pats, args):
                subst = match(p, a, subst)
                if subst is None:
                    break
            if subst is not None:
                saved = self.env
                self.env = subst
                try:
                    value = self._eval(rhs)
                finally:
                    self.env = saved
                self.cache[key] = (value, before - self.fuel)
                return value
        raise ValueError(f"no equation of {term.symbol} matches")


def evaluate(theory: Theory, term, fuel: int = DEFAULT_FUEL):
    """Return the constructor normal form of a ground term; raises OutOfFuel."""
    return Evaluator(theory).evaluate(term, fuel)


def _order_key(term, theory: Theory, ctor_rank: dict) -> tuple:
    return (term.size, ctor_rank[term.symbol]) + tuple(
        _order_key(a, theory, ctor_rank) for a in term.args
    )


class Enumerator:
    """Ground constructor terms by type, sorted by size then declaration order."""

    def __init__(self, theory: Theory):
        self.theory = theory
        self.ctor_rank = {}
        for dt in theory.datatypes.values():
            for i, (c, _) in enumerate(dt.constructors):
                self.ctor_rank[c] = i
        self._exact: dict = {}
        self._upto: dict = {}

    def exact(self, type_name: str, size: int) -> list:
        key = (type_name, size)
        if key in self._exact:
            return self._exact[key]
        out = []
        if size >= 1:
            for cname, ctypes in self.theory.constructors(type_name):
                if not ctypes:
                    if size == 1:
                        out.append(App(cname))
                    continue
                for split in _compositions(size - 1, len(ctypes)):
                    pools = [self.exact(t, k) for t, k in zip(ctypes, split)]
                    for args in itertools.product(*pools):
                        out.append(App(cname, args))
        out.sort(key=lambda t: _order_key(t, self.theory, self.ctor_rank))
        self._exact[key] = out
        return out

    def upto(self, type_name: str, max_size: int) -> list:
        key = (type_name, max_size)
        if key not in self._upto:
            terms = []
            for k in range(1, max_size + 1):
                terms += self.exact(type_name, k)
            self._upto[key] = terms
        return self._upto[key]


def _compositions(total: int, parts: int):
    """Ordered splits of ``total`` into ``parts`` positive integers."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_terms(theory: Theory, type_name: str, max_size: int) -> list:
    return list(Enumerator(theory).upto(type_name, max_size))


def assignments(theory: Theory, names_types: list, max_size: int, enumerator=None):
    """Yield assignments in nondecreasing total size, lexicographic within a size."""
    enum = enumerator or Enumerator(theory)
    pools = [enum.upto(t, max_size) for _, t in names_types]
    if any(not p for p in pools):
        return
    if not pools:
        yield {}
        return
    by_size = []
    for pool in pools:
        groups: dict = {}
        for idx, t in enumerate(pool):
            groups.setdefault(t.size, []).append(idx)
        by_size.append(groups)
    names = [n for n, _ in names_types]
    lo = len(pools)
    hi = max_size * len(pools)
    for total in range(lo, hi + 1):
        index_tuples = []
        for sizes in _size_splits(total, [sorted(g) for g in by_size]):
            index_tuples.extend(itertools.product(*(by_size[i][k] for i, k in enumerate(sizes))))
        index_tuples.sort()
        for idxs in index_tuples:
            yield {n: pools[i][j] for i, (n, j) in enumerate(zip(names, idxs))}


def _size_splits(total: int, available: list):
    if len(available) == 1:
        if total in available[0]:
            yield (total,)
        return
    for k in available[0]:
        if k >= total:
            break
        for rest in _size_splits(total - k, available[1:]):
            yield (k,) + rest


def _holds(ev: Evaluator, f: Formula, assignment: dict, fuel: int) -> Optional[bool]:
    """True/False for the formula instance; None when evaluation ran out of fuel."""
    try:
        for p in f.premises:
            if ev.evaluate(p.lhs, fuel, assignment) != ev.evaluate(p.rhs, fuel, assignment):
                return True
        c = f.conclusion
        return ev.evaluate(c.lhs, fuel, assignment) == ev.evaluate(c.rhs, fuel, assignment)
    except OutOfFuel:
        return None


def find_counterexample(
    theory: Theory,
    formula: Formula,
    max_size: int = DEFAULT_MAX_SIZE,
    fuel: int = DEFAULT_FUEL,
    evaluator: Optional[Evaluator] = None,
    enumerator: Optional[Enumerator] = None,
    max_tests: Optional[int] = None,
) -> Optional[Counterexample]:
    """First falsifying assignment in enumeration order, or None.

    Variables are ordered by first occurrence.  Assignments that exhaust the
    fuel are skipped, never reported.  ``max_tests`` stops the search after
    that many assignments (smallest first).
    """
    ev = evaluator or Evaluator(theory)
    names_types = [(n, v.type) for n, v in formula_vars(formula).items()]
    for a in itertools.islice(assignments(theory, names_types, max_size, enumerator), max_tests):
        if _holds(ev, formula, a, fuel) is False:
            return Counterexample(a)
    return None


def falsifies(theory: Theory, formula: Formula, assignment: dict, fuel: int = DEFAULT_FUEL) -> bool:
    return _holds(Evaluator(theory), formula, assignment, fuel) is False

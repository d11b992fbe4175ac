"""Induction: candidate generation, structural and recursion induction, case analysis.

Generalised ("arbitrary") variables become schematic variables of the
induction hypotheses.  Hypotheses that mention an induction or generalised
variable are dropped: proving the stronger, hypothesis-free statement is
sound, and folding them into the new hypotheses made nested inductions
grow without bound.
"""

from __future__ import annotations

import itertools

from .kernel import (
    App,
    Formula,
    Hypothesis,
    Sequent,
    Theory,
    Var,
    formula_vars,
    fresh_name,
    hypothesis_free_vars,
    prune_fixed,
    sequent_vars,
    subst_formula,
    substitute,
    subterms,
    variables,
)
from .steps import InductArgs

DEFAULT_MAX_ARBITRARY = 2


class InvalidArgs(ValueError):
    pass


def _datatype_vars(sequent: Sequent, theory: Theory) -> list:
    return [v for v in formula_vars(sequent.target).values() if v.type in theory.datatypes]


def _subsets(pool: list, limit: int):
    for k in range(0, min(limit, len(pool)) + 1):
        yield from itertools.combinations(pool, k)


def candidate_applications(
    sequent: Sequent, theory: Theory, max_arbitrary: int = DEFAULT_MAX_ARBITRARY
) -> list:
    """Every induction invocation worth trying on ``sequent``, in a fixed order."""
    dvars = [v.name for v in _datatype_vars(sequent, theory)]
    out = []
    for x in dvars:
        rest = [y for y in dvars if y != x]
        for arb in _subsets(rest, max_arbitrary):
            out.append(InductArgs((x,), tuple(arb)))
    seen = set()
    for eq in sequent.target.equations():
        for side in (eq.lhs, eq.rhs):
            for t in subterms(side):
                if not (isinstance(t, App) and theory.is_function(t.symbol) and t.args):
                    continue
                if not all(isinstance(a, Var) for a in t.args):
                    continue
                on = tuple(a.name for a in t.args)
                if len(set(on)) != len(on) or (t.symbol, on) in seen:
                    continue
                seen.add((t.symbol, on))
                rest = [y for y in dvars if y not in on]
                for arb in _subsets(rest, max_arbitrary):
                    out.append(InductArgs(on, tuple(arb), t.symbol))
    return out


def _validate(sequent: Sequent, args: InductArgs, theory: Theory) -> dict:
    tvars = formula_vars(sequent.target)
    if not args.on:
        raise InvalidArgs("induction needs at least one variable")
    if set(args.on) & set(args.arbitrary):
        raise InvalidArgs("induction and arbitrary variables overlap")
    if len(set(args.on)) != len(args.on) or len(set(args.arbitrary)) != len(args.arbitrary):
        raise InvalidArgs("repeated variable")
    for name in args.on + args.arbitrary:
        if name not in tvars:
            raise InvalidArgs(f"{name} is not free in the goal")
    for name in args.on:
        if tvars[name].type not in theory.datatypes:
            raise InvalidArgs(f"{name} does not have a datatype type")
    if args.rule is None:
        if len(args.on) != 1:
            raise InvalidArgs("structural induction takes exactly one variable")
    else:
        fn = theory.functions.get(args.rule)
        if fn is None:
            raise InvalidArgs(f"unknown function {args.rule}")
        if len(args.on) != len(fn.arg_types):
            raise InvalidArgs(f"{args.rule} takes {len(fn.arg_types)} argument(s)")
        for name, t in zip(args.on, fn.arg_types):
            if tvars[name].type != t:
                raise InvalidArgs(f"{name} does not have type {t}")
    return tvars


def _type_base(type_name: str) -> str:
    return type_name[:1].lower() or "v"


class _Names:
    def __init__(self, sequent: Sequent, theory: Theory):
        self.used = set(sequent_vars(sequent)) | theory.symbols()

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self.used)
        self.used.add(name)
        return name


def _kept_hyps(sequent: Sequent, relevant: set) -> list:
    return [h for h in sequent.hyps if not (set(hypothesis_free_vars(h)) & relevant)]


def _ih(prop: Formula, subst: dict, arbitrary: tuple, tvars: dict, names: _Names) -> Hypothesis:
    schem = {}
    for y in arbitrary:
        schem[y] = Var(names.fresh(y), tvars[y].type)
    full = dict(subst)
    full.update(schem)
    return Hypothesis(subst_formula(prop, full), frozenset(v.name for v in schem.values()))


def apply_induction(sequent: Sequent, args: InductArgs, theory: Theory) -> list:
    tvars = _validate(sequent, args, theory)
    hyps = _kept_hyps(sequent, set(args.on) | set(args.arbitrary))
    prop = sequent.target
    names = _Names(sequent, theory)
    cases = []
    if args.rule is None:
        x = tvars[args.on[0]]
        for cname, ctypes in theory.constructors(x.type):
            fresh = _ctor_vars(x, ctypes, names)
            ihs = [
                _ih(prop, {x.name: v}, args.arbitrary, tvars, names)
                for v in fresh
                if v.type == x.type
            ]
            inst = {x.name: App(cname, fresh)}
            cases.append(_case(sequent, hyps + ihs, inst, fresh))
        return cases
    fn = theory.functions[args.rule]
    for pats, rhs in fn.equations:
        ren: dict = {}
        for p in pats:
            for name, v in variables(p).items():
                ren[name] = Var(names.fresh(name), v.type)
        inst = {on: substitute(p, ren) for on, p in zip(args.on, pats)}
        ihs = [
            _ih(prop, {on: substitute(a, ren) for on, a in zip(args.on, t.args)},
                args.arbitrary, tvars, names)
            for t in subterms(rhs)
            if isinstance(t, App) and t.symbol == fn.name
        ]
        cases.append(_case(sequent, hyps + ihs, inst, list(ren.values())))
    return cases


def _ctor_vars(x: Var, ctypes, names: _Names) -> list:
    return [Var(names.fresh(x.name if t == x.type else _type_base(t)), t) for t in ctypes]


def _case(sequent: Sequent, hyps: list, inst: dict, new_vars: list) -> Sequent:
    fixed = []
    inserted = False
    for v in sequent.fixed:
        if v.name in inst:
            if not inserted:
                fixed.extend(new_vars)
                inserted = True
        else:
            fixed.append(v)
    if not inserted:
        fixed.extend(new_vars)
    target = subst_formula(sequent.target, inst)
    return prune_fixed(Sequent(tuple(fixed), tuple(hyps), target))


def apply_cases(sequent: Sequent, var: str, theory: Theory) -> list:
    """Constructor case split on ``var`` without induction hypotheses."""
    tvars = formula_vars(sequent.target)
    if var not in tvars or tvars[var].type not in theory.datatypes:
        raise InvalidArgs(f"cannot do case analysis on {var}")
    x = tvars[var]
    names = _Names(sequent, theory)
    out = []
    for cname, ctypes in theory.constructors(x.type):
        fresh = _ctor_vars(x, ctypes, names)
        inst = {var: App(cname, fresh)}
        hyps = [
            Hypothesis(subst_formula(h.formula, inst), h.schematic)
            if var in hypothesis_free_vars(h)
            else h
            for h in sequent.hyps
        ]
        out.append(_case(sequent, hyps, inst, fresh))
    return out

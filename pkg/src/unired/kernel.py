"""Core symbolic data model: terms, equations, formulas, sequents and theories.

Terms are first-order and monomorphic.  Types are plain datatype names
(strings).  All values except :class:`Theory` are immutable and hashable;
a theory only grows through :meth:`Theory.add_lemma`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence


class Var:
    __slots__ = ("name", "type", "_hash")

    def __init__(self, name: str, type: str):
        self.name = name
        self.type = type
        self._hash = hash(("V", name, type))

    def __eq__(self, other):
        return (
            isinstance(other, Var)
            and self.name == other.name
            and self.type == other.type
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r}, {self.type!r})"

    @property
    def size(self) -> int:
        return 1


class App:
    __slots__ = ("symbol", "args", "size", "_hash")

    def __init__(self, symbol: str, args: Sequence[Term] = ()):
        self.symbol = symbol
        self.args = tuple(args)
        self.size = 1 + sum(a.size for a in self.args)
        self._hash = hash((symbol, self.args))

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, App)
            and self._hash == other._hash
            and self.symbol == other.symbol
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.args:
            return f"App({self.symbol!r})"
        return f"App({self.symbol!r}, {list(self.args)!r})"


Term = "Var | App"
Substitution = dict  # variable name -> Term


@dataclass(frozen=True)
class Equation:
    lhs: object
    rhs: object

    def map(self, fn) -> Equation:
        return Equation(fn(self.lhs), fn(self.rhs))


@dataclass(frozen=True)
class Formula:
    """``premises ==> conclusion``; free variables are universally quantified."""

    premises: tuple = ()
    conclusion: Equation = None

    def equations(self) -> tuple:
        return self.premises + (self.conclusion,)

    def map(self, fn) -> Formula:
        return Formula(
            tuple(p.map(fn) for p in self.premises), self.conclusion.map(fn)
        )


@dataclass(frozen=True)
class Hypothesis:
    formula: Formula
    schematic: frozenset = frozenset()


@dataclass(frozen=True)
class Sequent:
    fixed: tuple  # of Var
    hyps: tuple  # of Hypothesis
    target: Formula


@dataclass(frozen=True)
class DatatypeDef:
    name: str
    constructors: tuple  # of (name, tuple of type names)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    arg_types: tuple
    return_type: str
    equations: tuple  # of (patterns tuple, rhs)


@dataclass(frozen=True)
class Diagnostic:
    location: str
    message: str
    pos: object = None  # optional syntax.SourcePos

    def __str__(self):
        where = f"{self.pos.line}:{self.pos.column}: " if self.pos else ""
        return f"{where}{self.location}: {self.message}"


@dataclass
class Theory:
    name: str = "anonymous"
    datatypes: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    lemmas: list = field(default_factory=list)  # (name, Formula)
    goals: list = field(default_factory=list)  # (name, Formula)
    positions: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._ctor_index = None

    # -- symbol table ---------------------------------------------------
    def _index(self):
        if self._ctor_index is None or self._ctor_index[0] != len(self.datatypes):
            table = {}
            for dt in self.datatypes.values():
                for cname, ctypes in dt.constructors:
                    table[cname] = (tuple(ctypes), dt.name)
            self._ctor_index = (len(self.datatypes), table)
        return self._ctor_index[1]

    def is_constructor(self, symbol: str) -> bool:
        return symbol in self._index()

    def is_function(self, symbol: str) -> bool:
        return symbol in self.functions

    def signature(self, symbol: str) -> Optional[tuple]:
        """Return ``(arg_types, result_type)`` or None for unknown symbols."""
        ctor = self._index().get(symbol)
        if ctor is not None:
            return ctor
        fn = self.functions.get(symbol)
        if fn is not None:
            return fn.arg_types, fn.return_type
        return None

    def constructors(self, type_name: str) -> tuple:
        return self.datatypes[type_name].constructors

    def symbols(self) -> set:
        return set(self._index()) | set(self.functions)

    def goal(self, name: str) -> Formula:
        for gname, f in self.goals:
            if gname == name:
                return f
        raise KeyError(name)

    def lemma_names(self) -> list:
        return [n for n, _ in self.lemmas]

    def add_lemma(self, name: str, formula: Formula) -> None:
        if name not in self.lemma_names():
            self.lemmas.append((name, formula))

    def copy(self) -> Theory:
        return Theory(
            self.name,
            dict(self.datatypes),
            dict(self.functions),
            list(self.lemmas),
            list(self.goals),
            dict(self.positions),
        )

    def type_of(self, term) -> Optional[str]:
        if isinstance(term, Var):
            return term.type
        sig = self.signature(term.symbol)
        return sig[1] if sig else None


# ---------------------------------------------------------------------------
# term utilities


def term_size(term) -> int:
    return term.size


def substitute(term, subst: Mapping):
    """Simultaneously replace variables (by name) with terms."""
    if not subst:
        return term
    if isinstance(term, Var):
        return subst.get(term.name, term)
    if not term.args:
        return term
    args = tuple(substitute(a, subst) for a in term.args)
    if all(a is b for a, b in zip(args, term.args)):
        return term
    return App(term.symbol, args)


def subst_equation(eq: Equation, subst: Mapping) -> Equation:
    return Equation(substitute(eq.lhs, subst), substitute(eq.rhs, subst))


def subst_formula(f: Formula, subst: Mapping) -> Formula:
    if not subst:
        return f
    return Formula(
        tuple(subst_equation(p, subst) for p in f.premises),
        subst_equation(f.conclusion, subst),
    )


def compose(tau: Mapping, sigma: Mapping) -> dict:
    """Return the substitution equivalent to applying ``sigma`` then ``tau``."""
    out = {name: substitute(t, tau) for name, t in sigma.items()}
    for name, t in tau.items():
        out.setdefault(name, t)
    return out


def match(pattern, subject, subst: Optional[dict] = None, variables=None):
    """First-order matching of ``pattern`` against ``subject``.

    ``variables`` restricts which pattern variables may be bound; any other
    variable only matches itself.  Returns the extended substitution, or
    None when there is no match.
    """
    subst = {} if subst is None else dict(subst)
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            if variables is not None and p.name not in variables:
                if p != s:
                    return None
                continue
            bound = subst.get(p.name)
            if bound is None:
                subst[p.name] = s
            elif bound != s:
                return None
            continue
        if not isinstance(s, App) or s.symbol != p.symbol or len(s.args) != len(p.args):
            return None
        stack.extend(zip(p.args, s.args))
    return subst


def variables(term, acc: Optional[dict] = None) -> dict:
    """Variables of ``term`` keyed by name, in first-occurrence (preorder) order."""
    acc = {} if acc is None else acc
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            acc.setdefault(t.name, t)
        else:
            stack.extend(reversed(t.args))
    return acc


def formula_vars(f: Formula) -> dict:
    acc: dict = {}
    for eq in f.equations():
        variables(eq.lhs, acc)
        variables(eq.rhs, acc)
    return acc


def hypothesis_free_vars(h: Hypothesis) -> dict:
    return {n: v for n, v in formula_vars(h.formula).items() if n not in h.schematic}


def sequent_vars(s: Sequent) -> dict:
    """All variable names used anywhere in a sequent (fixed and schematic)."""
    acc = {v.name: v for v in s.fixed}
    for h in s.hyps:
        acc.update(formula_vars(h.formula))
    acc.update(formula_vars(s.target))
    return acc


def alpha_key(s: Sequent) -> Sequent:
    """A representative of the sequent's class under consistent variable renaming.

    Variables are renamed ``_0, _1, ...`` by first occurrence in the target,
    then the hypotheses; schematic variables are renamed per hypothesis.
    """
    ren: dict = {}
    for v in formula_vars(s.target).values():
        ren.setdefault(v.name, Var(f"_{len(ren)}", v.type))
    hyps = []
    for h in s.hyps:
        local = {}
        for v in formula_vars(h.formula).values():
            if v.name in h.schematic:
                local[v.name] = Var(f"_s{len(local)}", v.type)
            else:
                ren.setdefault(v.name, Var(f"_{len(ren)}", v.type))
        full = {**ren, **local}
        hyps.append(Hypothesis(subst_formula(h.formula, full),
                               frozenset(v.name for v in local.values())))
    fixed = tuple(ren.get(v.name, v) for v in s.fixed if v.name in ren)
    return Sequent(fixed, tuple(hyps), subst_formula(s.target, ren))


def subterms(term) -> Iterator:
    """Preorder traversal of subterms (outermost-leftmost first)."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, App):
            stack.extend(reversed(t.args))


def positions(term, prefix=()) -> Iterator:
    """Yield ``(path, subterm)`` pairs in preorder."""
    yield prefix, term
    if isinstance(term, App):
        for i, a in enumerate(term.args):
            yield from positions(a, prefix + (i,))


def replace_at(term, path, new):
    if not path:
        return new
    i = path[0]
    args = list(term.args)
    args[i] = replace_at(args[i], path[1:], new)
    return App(term.symbol, args)


def replace_all(term, old, new):
    """Replace every occurrence of subterm ``old`` by ``new``."""
    if term == old:
        return new
    if isinstance(term, Var) or not term.args:
        return term
    args = tuple(replace_all(a, old, new) for a in term.args)
    if all(a is b for a, b in zip(args, term.args)):
        return term
    return App(term.symbol, args)


def occurs(sub, term) -> bool:
    return any(t == sub for t in subterms(term))


def is_ground(term) -> bool:
    return not any(isinstance(t, Var) for t in subterms(term))


def fresh_name(base: str, used) -> str:
    """A deterministic variant of ``base`` not in ``used``."""
    stem = base.rstrip("0123456789") or "v"
    if stem not in used:
        return stem
    i = 1
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"


def make_sequent(goal: Formula) -> Sequent:
    """The root proof obligation for a goal formula."""
    return Sequent(tuple(formula_vars(goal).values()), (), goal)


def prune_fixed(s: Sequent) -> Sequent:
    """Keep only fixed variables that still occur, in a canonical order."""
    acc: dict = {}
    for h in s.hyps:
        acc.update(hypothesis_free_vars(h))
    acc.update(formula_vars(s.target))
    order = [v for v in s.fixed if v.name in acc]
    seen = {v.name for v in order}
    order += [v for n, v in acc.items() if n not in seen]
    return Sequent(tuple(order), s.hyps, s.target)


def is_constructor_term(theory: Theory, term) -> bool:
    return all(isinstance(t, App) and theory.is_constructor(t.symbol) for t in subterms(term))


# ---------------------------------------------------------------------------
# well-formedness


def _infer_type(theory: Theory, term, where: str, out: list) -> Optional[str]:
    if isinstance(term, Var):
        if term.type not in theory.datatypes:
            out.append(Diagnostic(where, f"variable {term.name} has unknown type {term.type}"))
        return term.type
    sig = theory.signature(term.symbol)
    if sig is None:
        out.append(Diagnostic(where, f"unknown symbol {term.symbol}"))
        return None
    arg_types, result = sig
    if len(arg_types) != len(term.args):
        out.append(
            Diagnostic(
                where,
                f"arity mismatch: {term.symbol} expects {len(arg_types)} "
                f"argument(s), got {len(term.args)}",
            )
        )
    for expected, arg in zip(arg_types, term.args):
        got = _infer_type(theory, arg, where, out)
        if got is not None and got != expected:
            out.append(
                Diagnostic(where, f"type mismatch: expected {expected}, got {got}")
            )
    return result


def _check_var_consistency(terms, where: str, out: list) -> None:
    seen: dict = {}
    for t in terms:
        for s in subterms(t):
            if isinstance(s, Var):
                prev = seen.setdefault(s.name, s.type)
                if prev != s.type:
                    out.append(
                        Diagnostic(where, f"variable {s.name} used at types {prev} and {s.type}")
                    )
                    seen[s.name] = s.type


def _check_formula(theory: Theory, f: Formula, where: str, out: list) -> None:
    terms = []
    for eq in f.equations():
        lt = _infer_type(theory, eq.lhs, where, out)
        rt = _infer_type(theory, eq.rhs, where, out)
        if lt is not None and rt is not None and lt != rt:
            out.append(Diagnostic(where, f"equation sides have types {lt} and {rt}"))
        terms += [eq.lhs, eq.rhs]
    _check_var_consistency(terms, where, out)


def _patterns_overlap(ps, qs) -> bool:
    stack = list(zip(ps, qs))
    while stack:
        p, q = stack.pop()
        if isinstance(p, Var) or isinstance(q, Var):
            continue
        if p.symbol != q.symbol:
            return False
        stack.extend(zip(p.args, q.args))
    return True


def _exhaustive(theory: Theory, rows: list, types: list) -> bool:
    """Pattern-matrix exhaustiveness: every value vector is matched by a row."""
    if not types:
        return bool(rows)
    if not rows:
        return False
    head_type, rest = types[0], types[1:]
    if not any(isinstance(r[0], App) for r in rows):
        return _exhaustive(theory, [r[1:] for r in rows], rest)
    if head_type not in theory.datatypes:
        return False
    for cname, ctypes in theory.constructors(head_type):
        specialised = []
        for r in rows:
            p = r[0]
            if isinstance(p, Var):
                wild = [Var("_", t) for t in ctypes]
                specialised.append(wild + list(r[1:]))
            elif p.symbol == cname:
                specialised.append(list(p.args) + list(r[1:]))
        if not _exhaustive(theory, specialised, list(ctypes) + list(rest)):
            return False
    return True


def _is_recursive_ctor(theory: Theory, dt: DatatypeDef, ctypes) -> bool:
    return dt.name in ctypes


def check_theory(theory: Theory) -> list:
    """Return diagnostics for every violated well-formedness invariant."""
    out: list = []
    pos = theory.positions
    names: set = set()

    def dup(name, where):
        if name in names:
            out.append(Diagnostic(where, f"duplicate name {name}", pos.get(where)))
        names.add(name)

    for dt in theory.datatypes.values():
        where = f"datatype {dt.name}"
        dup(dt.name, where)
        if not dt.constructors:
            out.append(Diagnostic(where, "datatype has no constructors", pos.get(where)))
        elif all(_is_recursive_ctor(theory, dt, ct) for _, ct in dt.constructors):
            out.append(
                Diagnostic(where, "datatype needs a non-recursive constructor", pos.get(where))
            )
        for cname, ctypes in dt.constructors:
            dup(cname, where)
            for t in ctypes:
                if t not in theory.datatypes:
                    out.append(Diagnostic(where, f"unknown type {t}", pos.get(where)))

    for fn in theory.functions.values():
        where = f"fun {fn.name}"
        dup(fn.name, where)
        p = pos.get(where)
        for t in fn.arg_types + (fn.return_type,):
            if t not in theory.datatypes:
                out.append(Diagnostic(where, f"unknown type {t}", p))
        for k, (pats, rhs) in enumerate(fn.equations):
            ewhere = f"{where} equation {k + 1}"
            ep = pos.get(ewhere, p)
            if len(pats) != len(fn.arg_types):
                out.append(
                    Diagnostic(
                        ewhere,
                        f"arity mismatch: {fn.name} expects {len(fn.arg_types)} "
                        f"argument(s), got {len(pats)}",
                        ep,
                    )
                )
                continue
            seen_vars: dict = {}
            for pat, t in zip(pats, fn.arg_types):
                if not all(
                    isinstance(s, Var) or theory.is_constructor(s.symbol) for s in subterms(pat)
                ):
                    out.append(Diagnostic(ewhere, "pattern uses a non-constructor symbol", ep))
                got = _infer_type(theory, pat, ewhere, out)
                if got is not None and got != t:
                    out.append(Diagnostic(ewhere, f"type mismatch: expected {t}, got {got}", ep))
                for s in subterms(pat):
                    if isinstance(s, Var):
                        if s.name in seen_vars:
                            out.append(
                                Diagnostic(ewhere, f"non-linear pattern variable {s.name}", ep)
                            )
                        seen_vars[s.name] = s
            got = _infer_type(theory, rhs, ewhere, out)
            if got is not None and got != fn.return_type:
                out.append(
                    Diagnostic(ewhere, f"type mismatch: expected {fn.return_type}, got {got}", ep)
                )
            for name in variables(rhs):
                if name not in seen_vars:
                    out.append(
                        Diagnostic(ewhere, f"right-hand side variable {name} not bound", ep)
                    )
        eqs = [pats for pats, _ in fn.equations if len(pats) == len(fn.arg_types)]
        for i in range(len(eqs)):
            for j in range(i + 1, len(eqs)):
                if _patterns_overlap(eqs[i], eqs[j]):
                    out.append(
                        Diagnostic(
                            where, f"overlapping patterns in equations {i + 1} and {j + 1}", p
                        )
                    )
        if not fn.equations:
            out.append(Diagnostic(where, "function has no equations", p))
        elif all(t in theory.datatypes for t in fn.arg_types) and not _exhaustive(
            theory, [list(r) for r in eqs], list(fn.arg_types)
        ):
            out.append(Diagnostic(where, "non-exhaustive patterns", p))

    # lemma and goal names live in their own namespaces; a proved goal is
    # recorded as a lemma under the same name
    for kind, items in (("lemma", theory.lemmas), ("goal", theory.goals)):
        names = set()
        for name, f in items:
            where = f"{kind} {name}"
            dup(name, where)
            sub: list = []
            _check_formula(theory, f, where, sub)
            out.extend(Diagnostic(d.location, d.message, pos.get(where)) for d in sub)
    return out

"""Boolean feature assertions over induction candidates, scoring and weight fitting.

An assertion is a closed formula of a small first-order language whose
quantifiers range over finite domains drawn from the goal and the candidate:

    some v in induct . some o in occ(v) . some f in funcs . at_rec_argpos(o, f)

Domains: ``induct``, ``arbitrary``, ``vars`` (variables of the target),
``funcs`` (defined functions occurring in the target) and ``occ(v)``
(occurrences of a bound variable).  Connectives: ``not``, ``&``, ``|``,
``->``; quantifier bodies extend as far right as possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .induct import candidate_applications
from .kernel import App, Sequent, Theory, Var, formula_vars, make_sequent, subterms, variables
from .steps import InductArgs
from .syntax import ParseError, TokenStream, parse_induct_args, parse_theory

# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Implies:
    left: object
    right: object


@dataclass(frozen=True)
class Quant:
    kind: str  # "some" or "all"
    var: str
    domain: str  # induct, arbitrary, vars, funcs, occ
    of: Optional[str] = None  # the bound variable for occ(v)
    body: object = None


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Count:
    which: str  # "on" or "arbitrary"
    bound: int


@dataclass(frozen=True)
class FeatureSet:
    names: tuple
    exprs: tuple

    def __len__(self) -> int:
        return len(self.exprs)


class UnknownChoice(ValueError):
    pass


# sort of each predicate argument: var, func or occ
_PREDICATES = {
    "is_datatype_var": ("var",),
    "occurs_in_conclusion": ("var",),
    "is_induct": ("var",),
    "is_arbitrary": ("var",),
    "is_recursive": ("func",),
    "at_rec_argpos": ("occ", "func"),
    "at_varying_argpos": ("occ", "func"),
    "uses_rule": (),
    "rule_function_occurs_in_goal": (),
}
_DOMAINS = {"induct": "var", "arbitrary": "var", "vars": "var", "funcs": "func", "occ": "occ"}
_RESERVED = {"some", "all", "in", "not", "true", "false", "count_on", "count_arbitrary"}


# -- parsing -----------------------------------------------------------------


class _FeatureParser:
    def __init__(self, text: str):
        self.s = TokenStream(text)

    def parse(self):
        e = self.expr({})
        if self.s.peek().kind != "EOF":
            self.s.fail("end of assertion")
        return e

    def expr(self, env: dict):
        left = self.disj(env)
        if self.s.accept("->"):
            return Implies(left, self.expr(env))
        return left

    def disj(self, env):
        left = self.conj(env)
        while self.s.accept("|"):
            left = Or(left, self.conj(env))
        return left

    def conj(self, env):
        left = self.unary(env)
        while self.s.accept("&"):
            left = And(left, self.unary(env))
        return left

    def unary(self, env):
        s = self.s
        if s.accept("not") or s.accept("!"):
            return Not(self.unary(env))
        if s.at("some") or s.at("all"):
            return self.quant(env)
        return self.atom(env)

    def quant(self, env):
        s = self.s
        kind = s.next().text
        var = s.ident("bound variable", _RESERVED | set(_PREDICATES)).text
        s.expect("in")
        tok = s.ident("a domain")
        if tok.text not in _DOMAINS:
            raise ParseError(tok.pos, "a domain", repr(tok.text))
        of = None
        if tok.text == "occ":
            s.expect("(")
            of = self.bound(env, "var")
            s.expect(")")
        s.expect(".")
        inner = dict(env)
        inner[var] = _DOMAINS[tok.text]
        return Quant(kind, var, tok.text, of, self.expr(inner))

    def bound(self, env, sort):
        tok = self.s.ident("a bound variable")
        if env.get(tok.text) != sort:
            raise ParseError(tok.pos, f"a bound {sort} variable", repr(tok.text))
        return tok.text

    def atom(self, env):
        s = self.s
        if s.accept("("):
            e = self.expr(env)
            s.expect(")")
            return e
        tok = s.ident("an assertion")
        if tok.text in ("true", "false"):
            return Const(tok.text == "true")
        if tok.text in ("count_on", "count_arbitrary"):
            s.expect("<=")
            n = s.peek()
            if n.kind != "INT" or "." in n.text or int(n.text) < 0:
                s.fail("a natural number")
            s.next()
            return Count(tok.text[len("count_"):], int(n.text))
        sig = _PREDICATES.get(tok.text)
        if sig is None:
            raise ParseError(tok.pos, "a predicate", repr(tok.text))
        if not sig:
            return Pred(tok.text)
        s.expect("(")
        args = []
        for i, sort in enumerate(sig):
            if i:
                s.expect(",")
            arg = s.ident("an argument")
            bound_sort = env.get(arg.text)
            # an unbound identifier in function position is a function literal
            if bound_sort != sort and not (sort == "func" and bound_sort is None):
                raise ParseError(arg.pos, f"a {sort} argument", repr(arg.text))
            args.append(arg.text)
        s.expect(")")
        return Pred(tok.text, tuple(args))


def parse_feature(text: str):
    return _FeatureParser(text).parse()


_PREC = {Implies: 1, Or: 2, And: 3}


def print_feature(e, prec: int = 0) -> str:
    if isinstance(e, Const):
        return "true" if e.value else "false"
    if isinstance(e, Count):
        return f"count_{e.which} <= {e.bound}"
    if isinstance(e, Pred):
        return e.name + (f"({', '.join(e.args)})" if e.args else "")
    if isinstance(e, Not):
        return "not " + print_feature(e.body, 4)
    if isinstance(e, Quant):
        dom = f"occ({e.of})" if e.domain == "occ" else e.domain
        text = f"{e.kind} {e.var} in {dom} . {print_feature(e.body)}"
        return f"({text})" if prec else text
    p = _PREC[type(e)]
    op = {Implies: "->", Or: "|", And: "&"}[type(e)]
    # implication is right-associative, the others left-associative
    lp, rp = (p + 1, p) if isinstance(e, Implies) else (p, p + 1)
    text = f"{print_feature(e.left, lp)} {op} {print_feature(e.right, rp)}"
    return f"({text})" if prec > p else text


# -- evaluation --------------------------------------------------------------


@dataclass(frozen=True)
class Occurrence:
    var: str
    parent: Optional[App]  # None when the variable is a whole side
    index: int
    in_conclusion: bool


def recursion_positions(theory: Theory, fname: str) -> tuple:
    """(positions a recursive call shrinks, positions a recursive call changes)."""
    fn = theory.functions.get(fname)
    rec, varying = set(), set()
    if fn is None:
        return frozenset(), frozenset()
    for pats, rhs in fn.equations:
        for t in subterms(rhs):
            if not (isinstance(t, App) and t.symbol == fname):
                continue
            for i, (p, a) in enumerate(zip(pats, t.args)):
                if a != p:
                    varying.add(i)
                    if a in set(subterms(p)):
                        rec.add(i)
    return frozenset(rec), frozenset(varying)


class SequentInfo:
    """Candidate-independent facts about a sequent, shared across candidates."""

    def __init__(self, sequent: Sequent, theory: Theory):
        self.theory = theory
        target = sequent.target
        self.tvars = formula_vars(target)
        self.funcs = []
        self.occs: dict = {name: [] for name in self.tvars}
        self.conclusion_vars = set(variables(target.conclusion.rhs, variables(target.conclusion.lhs)))
        calls = set()
        for k, eq in enumerate(target.equations()):
            in_concl = k == len(target.premises)
            for side in (eq.lhs, eq.rhs):
                if isinstance(side, Var):
                    self.occs[side.name].append(Occurrence(side.name, None, 0, in_concl))
                for t in subterms(side):
                    if not isinstance(t, App):
                        continue
                    if theory.is_function(t.symbol):
                        if t.symbol not in self.funcs:
                            self.funcs.append(t.symbol)
                        if all(isinstance(a, Var) for a in t.args):
                            calls.add((t.symbol, tuple(a.name for a in t.args)))
                    for i, a in enumerate(t.args):
                        if isinstance(a, Var):
                            self.occs[a.name].append(Occurrence(a.name, t, i, in_concl))
        self.calls = calls
        self._positions: dict = {}
        self.memo: dict = {}

    def positions(self, fname: str):
        if fname not in self._positions:
            self._positions[fname] = recursion_positions(self.theory, fname)
        return self._positions[fname]


class _Context:
    def __init__(self, info: SequentInfo, args: InductArgs):
        self.info = info
        self.theory = info.theory
        self.args = args
        self.tvars = info.tvars
        self.funcs = info.funcs
        self.occs = info.occs
        self.conclusion_vars = info.conclusion_vars
        self.calls = info.calls
        self.positions = info.positions

    def domain(self, q: Quant, env: dict) -> list:
        if q.domain == "induct":
            return list(self.args.on)
        if q.domain == "arbitrary":
            return list(self.args.arbitrary)
        if q.domain == "vars":
            return list(self.tvars)
        if q.domain == "funcs":
            return list(self.funcs)
        return list(self.occs.get(env[q.of], ()))

    def pred(self, p: Pred, env: dict) -> bool:
        vals = [env.get(a, a) for a in p.args]
        name = p.name
        if name == "is_datatype_var":
            v = self.tvars.get(vals[0])
            return v is not None and v.type in self.theory.datatypes
        if name == "occurs_in_conclusion":
            return vals[0] in self.conclusion_vars
        if name == "is_induct":
            return vals[0] in self.args.on
        if name == "is_arbitrary":
            return vals[0] in self.args.arbitrary
        if name == "is_recursive":
            return bool(self.positions(vals[0])[1])
        if name in ("at_rec_argpos", "at_varying_argpos"):
            occ, f = vals
            if occ.parent is None or occ.parent.symbol != f:
                return False
            rec, varying = self.positions(f)
            return occ.index in (rec if name == "at_rec_argpos" else varying)
        if name == "uses_rule":
            return self.args.rule is not None
        if name == "rule_function_occurs_in_goal":
            return self.args.rule is not None and (self.args.rule, self.args.on) in self.calls
        raise ValueError(f"unknown predicate {name}")

    def eval(self, e, env: dict) -> bool:
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Not):
            return not self.eval(e.body, env)
        if isinstance(e, And):
            return self.eval(e.left, env) and self.eval(e.right, env)
        if isinstance(e, Or):
            return self.eval(e.left, env) or self.eval(e.right, env)
        if isinstance(e, Implies):
            return not self.eval(e.left, env) or self.eval(e.right, env)
        if isinstance(e, Count):
            n = len(self.args.on if e.which == "on" else self.args.arbitrary)
            return n <= e.bound
        if isinstance(e, Pred):
            return self.pred(e, env)
        if not _uses_candidate(e):
            key = (id(e), tuple(env.get(v) for v in _free_names(e)))
            hit = self.info.memo.get(key)
            if hit is None:
                hit = self.info.memo[key] = self._quantify(e, env)
            return hit
        return self._quantify(e, env)

    def _quantify(self, e: Quant, env: dict) -> bool:
        results = (self.eval(e.body, {**env, e.var: x}) for x in self.domain(e, env))
        return any(results) if e.kind == "some" else all(results)


_CANDIDATE_PREDICATES = {"is_induct", "is_arbitrary", "uses_rule", "rule_function_occurs_in_goal"}
_uses_cache: dict = {}
_free_cache: dict = {}


def _children(e) -> tuple:
    if isinstance(e, Not):
        return (e.body,)
    if isinstance(e, (And, Or, Implies)):
        return (e.left, e.right)
    if isinstance(e, Quant):
        return (e.body,)
    return ()


def _uses_candidate(e) -> bool:
    """Whether the value of ``e`` can depend on the induction candidate."""
    # keyed by identity; the stored node keeps its id from being reused
    cached = _uses_cache.get(id(e))
    if cached is not None and cached[0] is e:
        return cached[1]
    if isinstance(e, Count):
        hit = True
    elif isinstance(e, Pred):
        hit = e.name in _CANDIDATE_PREDICATES
    elif isinstance(e, Quant) and e.domain in ("induct", "arbitrary"):
        hit = True
    else:
        hit = any(_uses_candidate(c) for c in _children(e))
    _uses_cache[id(e)] = (e, hit)
    return hit


def _free_names(e) -> tuple:
    cached = _free_cache.get(id(e))
    if cached is not None and cached[0] is e:
        return cached[1]
    if isinstance(e, Pred):
        names = set(e.args)
    elif isinstance(e, Quant):
        names = set(_free_names(e.body)) - {e.var}
        if e.of is not None:
            names.add(e.of)
    else:
        names = set()
        for c in _children(e):
            names.update(_free_names(c))
    hit = tuple(sorted(names))
    _free_cache[id(e)] = (e, hit)
    return hit


def eval_feature(expr, sequent: Sequent, args: InductArgs, theory: Theory) -> bool:
    return _Context(SequentInfo(sequent, theory), args).eval(expr, {})


def extract(sequent: Sequent, args: InductArgs, features: FeatureSet, theory: Theory,
            info: Optional[SequentInfo] = None) -> tuple:
    ctx = _Context(info or SequentInfo(sequent, theory), args)
    return tuple(ctx.eval(e, {}) for e in features.exprs)


def score(vector, weights) -> float:
    if len(vector) != len(weights):
        raise ValueError(f"feature vector has {len(vector)} entries, weights {len(weights)}")
    return float(sum(w for b, w in zip(vector, weights) if b))


def rank(candidates: list, weights) -> list:
    """Sort ``(args, vector)`` pairs by descending score; stable on ties."""
    scored = [(score(v, weights), i, a, v) for i, (a, v) in enumerate(candidates)]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [(a, v, s) for s, _, a, v in scored]


def ranked_candidates(sequent: Sequent, theory: Theory, features: FeatureSet, weights,
                      max_arbitrary: int = 2) -> list:
    """candidate_applications, each with its vector and score, best first."""
    cands = candidate_applications(sequent, theory, max_arbitrary)
    info = SequentInfo(sequent, theory)
    return rank([(a, extract(sequent, a, features, theory, info)) for a in cands], weights)


def fit_weights(corpus: list, features: FeatureSet, max_arbitrary: int = 2) -> tuple:
    """Add-one smoothed log-odds of each feature among chosen vs. other candidates."""
    m = len(features)
    pos, neg = 0, 0
    pos_j, neg_j = [0] * m, [0] * m
    for theory, goal_name, chosen in corpus:
        seq = make_sequent(theory.goal(goal_name))
        cands = candidate_applications(seq, theory, max_arbitrary)
        if chosen not in cands:
            raise UnknownChoice(f"{goal_name}: {chosen} is not a candidate")
        info = SequentInfo(seq, theory)
        for a in cands:
            vec = extract(seq, a, features, theory, info)
            if a == chosen:
                pos += 1
                counts = pos_j
            else:
                neg += 1
                counts = neg_j
            for j, b in enumerate(vec):
                counts[j] += b
    return tuple(
        math.log((pos_j[j] + 1) / (pos + 2)) - math.log((neg_j[j] + 1) / (neg + 2))
        for j in range(m)
    )


# -- files -------------------------------------------------------------------


def parse_feature_set(text: str) -> FeatureSet:
    """One assertion per line, optionally labelled ``name: assertion``."""
    names, exprs = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if sep and head.strip().isidentifier():
            name, body = head.strip(), rest
        else:
            name, body = f"f{len(exprs) + 1}", line
        try:
            exprs.append(parse_feature(body))
        except ParseError as e:
            raise ParseError(type(e.pos)(lineno, e.pos.column), e.expected, e.found) from None
        names.append(name)
    return FeatureSet(tuple(names), tuple(exprs))


def print_feature_set(fs: FeatureSet) -> str:
    return "".join(f"{n}: {print_feature(e)}\n" for n, e in zip(fs.names, fs.exprs))


def parse_weights(text: str, expected: Optional[int] = None) -> tuple:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    values = []
    for ln in lines:
        values.extend(float(x) for x in ln.split())
    if any(not math.isfinite(w) for w in values):
        raise ValueError("weights must be finite")
    if expected is not None and len(values) != expected:
        raise ValueError(f"expected {expected} weights, found {len(values)}")
    return tuple(values)


def format_weights(weights) -> str:
    return "".join(f"{w!r}\n" for w in weights)


def default_features() -> FeatureSet:
    return parse_feature_set(resources.files("unired.data").joinpath("default.features").read_text())


def default_weights() -> tuple:
    text = resources.files("unired.data").joinpath("default.weights").read_text()
    return parse_weights(text, len(default_features()))


def load_corpus(path) -> list:
    """Lines ``<theory-path> <goal> induct <vars> [arbitrary: ..] [rule: f]``.

    Theory paths are relative to the corpus file.
    """
    path = Path(path)
    theories: dict = {}
    out = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) < 3:
            raise ValueError(f"{path}:{lineno}: expected '<theory> <goal> induct ...'")
        thy_path = (path.parent / parts[0]).resolve()
        if thy_path not in theories:
            theories[thy_path] = parse_theory(thy_path.read_text())
        theory = theories[thy_path]
        theory.goal(parts[1])
        out.append((theory, parts[1], parse_induct_args(parts[2])))
    return out

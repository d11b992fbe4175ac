"""Hand-written recursive-descent parser and printers.

Concrete grammar of theory files::

    theory   ::= "theory" IDENT item*
    item     ::= datatype | fundef | lemma | goal
    datatype ::= "datatype" IDENT "=" ctor ("|" ctor)*
    ctor     ::= IDENT type*
    fundef   ::= "fun" IDENT "::" type ("->" type)+ eq+
    eq       ::= IDENT pat* "=" term
    pat      ::= IDENT | "(" IDENT pat* ")"
    term     ::= IDENT atom*            # longest match
    atom     ::= IDENT | "(" term ")"
    lemma    ::= "lemma" IDENT ":" formula
    goal     ::= "goal" IDENT ":" formula
    formula  ::= (equation "==>")* equation
    equation ::= term "=" term

Application is prefix and only symbols of positive arity take arguments, so
``Cons x (rev xs)`` needs no further disambiguation.  ``#`` starts a line
comment.  Variable types are inferred from the signatures of the symbols
they are passed to.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .kernel import (
    App,
    DatatypeDef,
    Equation,
    Formula,
    FunctionDef,
    Sequent,
    Theory,
    Var,
    check_theory,
)
from .steps import (
    DYNAMIC_KINDS,
    Auto,
    Cases,
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
    Simp,
    SSimp,
    Thens,
)


@dataclass(frozen=True)
class SourcePos:
    line: int
    column: int


class ParseError(Exception):
    def __init__(self, pos: SourcePos, expected: str, found: str):
        self.pos = pos
        self.expected = expected
        self.found = found
        super().__init__(f"{pos.line}:{pos.column}: expected {expected}, found {found}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, STRING, SYM, EOF
    text: str
    pos: SourcePos


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<INT>-?[0-9]+(?:\.[0-9]+)?)
  | (?P<STRING>"[^"\n]*")
  | (?P<SYM>==>|::|->|<=|[=|():,\[\].&!])
    """,
    re.VERBOSE,
)

THEORY_KEYWORDS = {"theory", "datatype", "fun", "goal", "lemma"}
SCRIPT_KEYWORDS = {"proof", "using", "induct", "cases", "auto", "simp", "conjecture", "qed"}


def tokenize(text: str) -> list:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            pos = SourcePos(line, i - line_start + 1)
            raise ParseError(pos, "a token", repr(text[i]))
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, SourcePos(line, i - line_start + 1)))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            line_start = i + lexeme.rindex("\n") + 1
        i = m.end()
    tokens.append(Token("EOF", "", SourcePos(line, i - line_start + 1)))
    return tokens


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "EOF" else repr(tok.text)


# ---------------------------------------------------------------------------
# raw (untyped) terms carry their source position for error reporting


@dataclass
class _Raw:
    name: str
    args: list
    pos: SourcePos
    explicit_app: bool = False


class TokenStream:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.i = min(self.i + 1, len(self.tokens) - 1)
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("SYM", "IDENT") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            raise ParseError(tok.pos, repr(text), _describe(tok))
        return self.next()

    def ident(self, what: str = "identifier", reserved=()) -> Token:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.text in reserved:
            raise ParseError(tok.pos, what, _describe(tok))
        return self.next()

    def fail(self, expected: str):
        tok = self.peek()
        raise ParseError(tok.pos, expected, _describe(tok))


class _TermReader:
    """Parses raw terms and elaborates them against a theory's signature."""

    def __init__(self, stream: TokenStream, theory: Theory, reserved=THEORY_KEYWORDS):
        self.s = stream
        self.theory = theory
        self.reserved = reserved

    def _arity(self, name: str) -> int:
        sig = self.theory.signature(name)
        return len(sig[0]) if sig else 0

    def _starts_atom(self) -> bool:
        tok = self.s.peek()
        if tok.kind == "SYM" and tok.text == "(":
            return True
        if tok.kind != "IDENT" or tok.text in self.reserved:
            return False
        return self._arity(tok.text) == 0

    def raw_term(self) -> _Raw:
        tok = self.s.peek()
        if tok.kind == "SYM" and tok.text == "(":
            return self.raw_atom()
        head = self.s.ident("term", self.reserved)
        node = _Raw(head.text, [], head.pos)
        if self._arity(head.text) > 0:
            while self._starts_atom():
                node.args.append(self.raw_atom())
        return node

    def raw_atom(self) -> _Raw:
        if self.s.accept("("):
            head = self.s.ident("term", self.reserved)
            node = _Raw(head.text, [], head.pos, explicit_app=True)
            while self._starts_atom():
                node.args.append(self.raw_atom())
            self.s.expect(")")
            return node
        head = self.s.ident("term", self.reserved)
        return _Raw(head.text, [], head.pos)

    # -- typing ------------------------------------------------------------
    def infer(self, raw: _Raw, expected: Optional[str], env: dict, fixed_env: bool) -> Optional[str]:
        sig = self.theory.signature(raw.name)
        if sig is None:
            if raw.args:
                raise ParseError(raw.pos, "a function or constructor", repr(raw.name))
            known = env.get(raw.name)
            if known is None:
                if fixed_env:
                    raise ParseError(raw.pos, "a bound variable", repr(raw.name))
                if expected is not None:
                    env[raw.name] = expected
                return expected
            if expected is not None and known != expected:
                raise ParseError(raw.pos, f"a term of type {expected}", f"{raw.name} of type {known}")
            return known
        arg_types, result = sig
        if len(arg_types) != len(raw.args):
            raise ParseError(
                raw.pos,
                f"{len(arg_types)} argument(s) for {raw.name} (arity mismatch)",
                f"{len(raw.args)}",
            )
        if expected is not None and result != expected:
            raise ParseError(raw.pos, f"a term of type {expected}", f"{raw.name} of type {result}")
        for t, a in zip(arg_types, raw.args):
            self.infer(a, t, env, fixed_env)
        return result

    def build(self, raw: _Raw, env: dict):
        if self.theory.signature(raw.name) is None:
            return Var(raw.name, env[raw.name])
        return App(raw.name, [self.build(a, env) for a in raw.args])

    def raw_equation(self):
        lhs = self.raw_term()
        self.s.expect("=")
        rhs = self.raw_term()
        return lhs, rhs

    def raw_formula(self):
        eqs = [self.raw_equation()]
        while self.s.accept("==>"):
            eqs.append(self.raw_equation())
        return eqs

    def elaborate_formula(self, raw_eqs, env: Optional[dict] = None) -> Formula:
        env = {} if env is None else env
        for _ in range(len(raw_eqs) * 4 + 4):
            before = dict(env)
            for lhs, rhs in raw_eqs:
                lt = self.infer(lhs, None, env, False)
                rt = self.infer(rhs, lt, env, False)
                if lt is None and rt is not None:
                    self.infer(lhs, rt, env, False)
            if env == before:
                break
        for lhs, rhs in raw_eqs:
            for raw in (lhs, rhs):
                for name, pos in _raw_vars(raw, self.theory):
                    if name not in env:
                        raise ParseError(pos, "a variable whose type can be inferred", repr(name))
        eqs = [Equation(self.build(l, env), self.build(r, env)) for l, r in raw_eqs]
        return Formula(tuple(eqs[:-1]), eqs[-1])


def _raw_vars(raw: _Raw, theory: Theory):
    if theory.signature(raw.name) is None:
        yield raw.name, raw.pos
    for a in raw.args:
        yield from _raw_vars(a, theory)


# ---------------------------------------------------------------------------
# theories


def _pattern(reader: _TermReader, expected: str, env: dict):
    s = reader.s
    theory = reader.theory
    if s.accept("("):
        head = s.ident("constructor")
        sig = theory.signature(head.text)
        if sig is None or not theory.is_constructor(head.text):
            raise ParseError(head.pos, "a constructor", repr(head.text))
        arg_types, result = sig
        if result != expected:
            raise ParseError(head.pos, f"a pattern of type {expected}", f"{head.text} of type {result}")
        sub = []
        while not s.at(")"):
            if len(sub) >= len(arg_types):
                raise ParseError(
                    s.peek().pos, f"{len(arg_types)} argument(s) for {head.text} (arity mismatch)", _describe(s.peek())
                )
            sub.append(_pattern(reader, arg_types[len(sub)], env))
        if len(sub) != len(arg_types):
            raise ParseError(
                s.peek().pos, f"{len(arg_types)} argument(s) for {head.text} (arity mismatch)", str(len(sub))
            )
        s.expect(")")
        return App(head.text, sub)
    tok = s.ident("pattern", THEORY_KEYWORDS)
    sig = theory.signature(tok.text)
    if sig is not None:
        if not theory.is_constructor(tok.text):
            raise ParseError(tok.pos, "a constructor or variable", repr(tok.text))
        if sig[0]:
            raise ParseError(tok.pos, f"{len(sig[0])} argument(s) for {tok.text} (arity mismatch)", "0")
        if sig[1] != expected:
            raise ParseError(tok.pos, f"a pattern of type {expected}", f"{tok.text} of type {sig[1]}")
        return App(tok.text)
    if tok.text in env:
        raise ParseError(tok.pos, "a linear pattern", f"repeated variable {tok.text}")
    env[tok.text] = expected
    return Var(tok.text, expected)


def parse_theory(text: str) -> Theory:
    s = TokenStream(text)
    theory = Theory()
    reader = _TermReader(s, theory)
    s.expect("theory")
    theory.name = s.ident("theory name", THEORY_KEYWORDS).text
    while s.peek().kind != "EOF":
        tok = s.peek()
        if s.accept("datatype"):
            name = s.ident("datatype name", THEORY_KEYWORDS)
            theory.positions[f"datatype {name.text}"] = name.pos
            s.expect("=")
            ctors = []
            while True:
                c = s.ident("constructor", THEORY_KEYWORDS)
                types = []
                while s.peek().kind == "IDENT" and s.peek().text not in THEORY_KEYWORDS:
                    types.append(s.next().text)
                ctors.append((c.text, tuple(types)))
                if not s.accept("|"):
                    break
            if name.text in theory.datatypes:
                raise ParseError(name.pos, "a new datatype name", repr(name.text))
            theory.datatypes[name.text] = DatatypeDef(name.text, tuple(ctors))
            for cname, ctypes in ctors:
                for t in ctypes:
                    if t not in theory.datatypes:
                        raise ParseError(name.pos, "a declared type", repr(t))
        elif s.accept("fun"):
            name = s.ident("function name", THEORY_KEYWORDS)
            theory.positions[f"fun {name.text}"] = name.pos
            if theory.signature(name.text) is not None:
                raise ParseError(name.pos, "a new function name", repr(name.text))
            s.expect("::")
            types = [s.ident("type").text]
            s.expect("->")
            types.append(s.ident("type").text)
            while s.accept("->"):
                types.append(s.ident("type").text)
            for t in types:
                if t not in theory.datatypes:
                    raise ParseError(name.pos, "a declared type", repr(t))
            fn = FunctionDef(name.text, tuple(types[:-1]), types[-1], ())
            theory.functions[name.text] = fn
            eqs = []
            if not s.at(name.text):
                s.fail(f"an equation for {name.text}")
            while s.at(name.text):
                head = s.next()
                theory.positions[f"fun {name.text} equation {len(eqs) + 1}"] = head.pos
                env: dict = {}
                pats = []
                while not s.at("="):
                    if len(pats) >= len(fn.arg_types):
                        raise ParseError(
                            s.peek().pos,
                            f"{len(fn.arg_types)} argument(s) for {name.text} (arity mismatch)",
                            _describe(s.peek()),
                        )
                    pats.append(_pattern(reader, fn.arg_types[len(pats)], env))
                if len(pats) != len(fn.arg_types):
                    raise ParseError(
                        head.pos, f"{len(fn.arg_types)} argument(s) for {name.text} (arity mismatch)", str(len(pats))
                    )
                s.expect("=")
                raw = reader.raw_term()
                reader.infer(raw, fn.return_type, env, True)
                eqs.append((tuple(pats), reader.build(raw, env)))
            theory.functions[name.text] = FunctionDef(fn.name, fn.arg_types, fn.return_type, tuple(eqs))
        elif tok.text in ("goal", "lemma") and tok.kind == "IDENT":
            s.next()
            name = s.ident(f"{tok.text} name", THEORY_KEYWORDS)
            theory.positions[f"{tok.text} {name.text}"] = name.pos
            s.expect(":")
            formula = reader.elaborate_formula(reader.raw_formula())
            target = theory.goals if tok.text == "goal" else theory.lemmas
            target.append((name.text, formula))
        else:
            s.fail("'datatype', 'fun', 'lemma' or 'goal'")
    diags = check_theory(theory)
    if diags:
        d = diags[0]
        raise ParseError(d.pos or s.peek().pos, f"well-formed {d.location}", d.message)
    return theory


def parse_formula(text: str, theory: Theory, env: Optional[dict] = None) -> Formula:
    s = TokenStream(text)
    reader = _TermReader(s, theory)
    raw = reader.raw_formula()
    if s.peek().kind != "EOF":
        s.fail("end of formula")
    return reader.elaborate_formula(raw, dict(env or {}))


def parse_term(text: str, theory: Theory, env: Optional[dict] = None):
    """Parse a term; ``env`` maps variable names to types where known."""
    s = TokenStream(text)
    reader = _TermReader(s, theory)
    raw = reader.raw_term()
    if s.peek().kind != "EOF":
        s.fail("end of term")
    env = dict(env or {})
    reader.infer(raw, None, env, False)
    for name, pos in _raw_vars(raw, theory):
        if name not in env:
            raise ParseError(pos, "a variable whose type can be inferred", repr(name))
    return reader.build(raw, env)


# ---------------------------------------------------------------------------
# printing


def print_term(term, nested: bool = False) -> str:
    if isinstance(term, Var):
        return term.name
    if not term.args:
        return term.symbol
    body = " ".join([term.symbol] + [print_term(a, True) for a in term.args])
    return f"({body})" if nested else body


def print_equation(eq: Equation) -> str:
    return f"{print_term(eq.lhs)} = {print_term(eq.rhs)}"


def print_formula(f: Formula) -> str:
    return " ==> ".join(print_equation(e) for e in f.equations())


def print_sequent(s: Sequent) -> str:
    parts = []
    for h in s.hyps:
        text = print_formula(h.formula)
        if h.schematic:
            text += "  [for all " + " ".join(sorted(h.schematic)) + "]"
        parts.append(text)
    lines = [f"  {p}" for p in parts]
    lines.append("  |- " + print_formula(s.target))
    return "\n".join(lines)


def print_theory(theory: Theory) -> str:
    lines = [f"theory {theory.name}"]
    for dt in theory.datatypes.values():
        ctors = " | ".join(" ".join((c,) + tuple(ts)) for c, ts in dt.constructors)
        lines.append(f"datatype {dt.name} = {ctors}")
    for fn in theory.functions.values():
        sig = " -> ".join(fn.arg_types + (fn.return_type,))
        lines.append(f"fun {fn.name} :: {sig}")
        for pats, rhs in fn.equations:
            lhs = " ".join([fn.name] + [print_term(p, True) for p in pats])
            lines.append(f"  {lhs} = {print_term(rhs)}")
    for name, f in theory.lemmas:
        lines.append(f"lemma {name}: {print_formula(f)}")
    for name, f in theory.goals:
        lines.append(f"goal {name}: {print_formula(f)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# strategies

_ATOMIC_STRATEGIES = {"Auto": SAuto(), "Simp": SSimp(), "IsSolved": IsSolved()}


def _strategy(s: TokenStream, named: dict):
    tok = s.ident("strategy")
    if tok.text in _ATOMIC_STRATEGIES:
        return _ATOMIC_STRATEGIES[tok.text]
    if tok.text == "Dynamic":
        s.expect("(")
        kind = s.ident("'Induct' or 'Conjecture'")
        if kind.text not in DYNAMIC_KINDS:
            raise ParseError(kind.pos, "'Induct' or 'Conjecture'", repr(kind.text))
        s.expect(")")
        return Dynamic(kind.text)
    if tok.text in ("Thens", "Ors"):
        s.expect("[")
        items = [_strategy(s, named)]
        while s.accept(","):
            items.append(_strategy(s, named))
        s.expect("]")
        return (Thens if tok.text == "Thens" else Ors)(tuple(items))
    if tok.text == "Repeat":
        s.expect("(")
        body = _strategy(s, named)
        s.expect(",")
        n = s.peek()
        if n.kind != "INT" or int(float(n.text)) < 1 or "." in n.text:
            s.fail("a positive iteration bound")
        s.next()
        s.expect(")")
        return Repeat(body, int(n.text))
    if tok.text in named:
        return named[tok.text]
    raise ParseError(tok.pos, "a strategy", repr(tok.text))


def parse_strategy(text: str, named: Optional[dict] = None):
    """Parse strategy text; ``strategy NAME = ...`` definitions are accepted."""
    if named is None:
        from .psl import NAMED_STRATEGIES

        named = NAMED_STRATEGIES
    s = TokenStream(text)
    if s.at("strategy"):
        s.next()
        s.ident("strategy name")
        s.expect("=")
    result = _strategy(s, named)
    if s.peek().kind != "EOF":
        s.fail("end of strategy")
    return result


def print_strategy(st) -> str:
    if isinstance(st, SAuto):
        return "Auto"
    if isinstance(st, SSimp):
        return "Simp"
    if isinstance(st, IsSolved):
        return "IsSolved"
    if isinstance(st, Dynamic):
        return f"Dynamic({st.kind})"
    if isinstance(st, Thens):
        return "Thens [" + ", ".join(print_strategy(x) for x in st.items) + "]"
    if isinstance(st, Ors):
        return "Ors [" + ", ".join(print_strategy(x) for x in st.items) + "]"
    if isinstance(st, Repeat):
        return f"Repeat({print_strategy(st.body)}, {st.max_iter})"
    raise TypeError(f"not a strategy: {st!r}")


# ---------------------------------------------------------------------------
# proof scripts


def print_step(step) -> str:
    if isinstance(step, Induct):
        a = step.args
        text = "induct " + " ".join(a.on)
        if a.arbitrary:
            text += " arbitrary: " + " ".join(a.arbitrary)
        if a.rule:
            text += f" rule: {a.rule}"
        return text
    if isinstance(step, Cases):
        return f"cases {step.var}"
    if isinstance(step, Auto):
        return "auto"
    if isinstance(step, Simp):
        return "simp"
    if isinstance(step, Conjecture):
        return f'conjecture "{print_formula(step.formula)}"'
    if isinstance(step, Qed):
        return "qed"
    raise TypeError(f"not a proof step: {step!r}")


def print_script(script: ProofScript) -> str:
    lines = [f"proof {script.goal}"]
    if script.using is not None:
        lines.append("using" + "".join(f" {n}" for n in script.using))
    lines += [print_step(st) for st in script.steps]
    return "\n".join(lines) + "\n"


def _var_list(s: TokenStream) -> list:
    out = []
    while s.peek().kind == "IDENT" and s.peek().text not in SCRIPT_KEYWORDS | {"arbitrary", "rule"}:
        out.append(s.next().text)
    return out


def _induct_args(s: TokenStream) -> InductArgs:
    on = _var_list(s)
    if not on:
        s.fail("induction variable")
    arbitrary, rule = [], None
    if s.accept("arbitrary"):
        s.expect(":")
        arbitrary = _var_list(s)
        if not arbitrary:
            s.fail("variable")
    if s.accept("rule"):
        s.expect(":")
        rule = s.ident("function name").text
    return InductArgs(tuple(on), tuple(arbitrary), rule)


def parse_induct_args(text: str) -> InductArgs:
    """Parse ``v.. [arbitrary: v..] [rule: f]`` (an optional leading ``induct`` is skipped)."""
    s = TokenStream(text)
    s.accept("induct")
    args = _induct_args(s)
    if s.peek().kind != "EOF":
        s.fail("end of induction arguments")
    return args


def _script(s: TokenStream, theory: Theory) -> ProofScript:
    s.expect("proof")
    goal = s.ident("goal name", SCRIPT_KEYWORDS).text
    using = None
    if s.accept("using"):
        using = []
        while s.peek().kind == "IDENT" and s.peek().text not in SCRIPT_KEYWORDS:
            using.append(s.next().text)
        using = tuple(using)
    steps = []
    while True:
        if s.accept("induct"):
            steps.append(Induct(_induct_args(s)))
        elif s.accept("cases"):
            steps.append(Cases(s.ident("variable", SCRIPT_KEYWORDS).text))
        elif s.accept("auto"):
            steps.append(Auto())
        elif s.accept("simp"):
            steps.append(Simp())
        elif s.accept("conjecture"):
            lit = s.peek()
            if lit.kind != "STRING":
                s.fail("quoted formula")
            s.next()
            try:
                f = parse_formula(lit.text[1:-1], theory)
            except ParseError as e:
                pos = SourcePos(lit.pos.line, lit.pos.column + e.pos.column)
                raise ParseError(pos, e.expected, e.found) from None
            steps.append(Conjecture(f))
        elif s.accept("qed"):
            steps.append(Qed())
            break
        else:
            s.fail("a proof step")
    return ProofScript(goal, tuple(steps), using)


def parse_scripts(text: str, theory: Theory) -> list:
    s = TokenStream(text)
    out = []
    while s.peek().kind != "EOF":
        out.append(_script(s, theory))
    return out


def parse_script(text: str, theory: Theory) -> ProofScript:
    s = TokenStream(text)
    script = _script(s, theory)
    if s.peek().kind != "EOF":
        s.fail("end of script")
    return script

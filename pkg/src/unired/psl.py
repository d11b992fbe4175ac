"""Strategy runtime: lazy strategy semantics and iterative-deepening search.

Only ``Dynamic`` expansions and ``Ors`` branches consume choice-point depth;
``Auto``, ``Simp`` and ``IsSolved`` are deterministic and free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .abduce import Refuter, Valuable, filter_conjecture, generate_conjectures
from .config import Config
from .deduct import DeductCache
from .induct import candidate_applications
from .kernel import Formula, Theory, make_sequent
from .mlfeat import FeatureSet, SequentInfo, extract, rank
from .replay import StepError, StepRunner
from .steps import (
    Auto,
    Conjecture,
    Dynamic,
    Induct,
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

DInd = Thens((Dynamic("Induct"), SAuto(), IsSolved()))
NAMED_STRATEGIES = {"DInd": DInd}


@dataclass(frozen=True)
class NotFound:
    reason: str  # "exhausted" or "budget"


class _Budget(Exception):
    pass


@dataclass
class StrategyContext:
    theory: Theory
    config: Config = field(default_factory=Config)
    features: Optional[FeatureSet] = None
    weights: Optional[tuple] = None  # ranking applies only when both are set
    nodes: int = 0

    def __post_init__(self):
        self.runner = StepRunner(self.theory, self.config)
        self.refuter = Refuter(
            self.theory, self.config.refute_size, self.config.fuel, self.config.refute_tests
        )
        self.deduct_cache = DeductCache(self.theory, self.config.budgets())

    def tick(self):
        self.nodes += 1
        if self.nodes > self.config.strategy_nodes:
            raise _Budget()

    def induction_candidates(self, s) -> list:
        cands = candidate_applications(s, self.theory, self.config.max_arbitrary)
        if self.features is None or self.weights is None:
            return cands
        info = SequentInfo(s, self.theory)
        vecs = [(a, extract(s, a, self.features, self.theory, info)) for a in cands]
        return [a for a, _, _ in rank(vecs, self.weights)]

    def valuable_conjectures(self, s) -> list:
        out = []
        for c in generate_conjectures(s, self.theory, self.config.max_conjectures):
            verdict = filter_conjecture(
                self.theory, s, c, self.config.budgets(), self.refuter, self.deduct_cache
            )
            if isinstance(verdict, Valuable):
                out.append(c)
        return out


def _step(ctx: StrategyContext, goals: tuple, step):
    try:
        return ctx.runner.apply(goals, step)
    except StepError:
        return None


def _run(ctx: StrategyContext, st, goals: tuple, steps: tuple, depth: int) -> Iterator:
    """Yield ``(goals, steps, depth_left)`` for every outcome of ``st``."""
    ctx.tick()
    if isinstance(st, (SAuto, SSimp)):
        new = _step(ctx, goals, Auto() if isinstance(st, SAuto) else Simp())
        if new is not None:
            yield new, steps + ((Auto() if isinstance(st, SAuto) else Simp()),), depth
        return
    if isinstance(st, IsSolved):
        if not goals:
            yield goals, steps, depth
        return
    if isinstance(st, Dynamic):
        if depth <= 0 or not goals:
            return
        first = goals[0]
        if st.kind == "Induct":
            for args in ctx.induction_candidates(first):
                step = Induct(args)
                new = _step(ctx, goals, step)
                if new is not None:
                    yield new, steps + (step,), depth - 1
        else:
            for c in ctx.valuable_conjectures(first):
                step = Conjecture(c)
                new = _step(ctx, goals, step)
                if new is not None:
                    yield new, steps + (step,), depth - 1
        return
    if isinstance(st, Thens):
        yield from _thens(ctx, st.items, goals, steps, depth)
        return
    if isinstance(st, Ors):
        if depth <= 0:
            return
        for alt in st.items:
            yield from _run(ctx, alt, goals, steps, depth - 1)
        return
    if isinstance(st, Repeat):
        yield from _repeat(ctx, st.body, st.max_iter, goals, steps, depth)
        return
    raise TypeError(f"not a strategy: {st!r}")


def _thens(ctx, items, goals, steps, depth):
    if not items:
        yield goals, steps, depth
        return
    for g, s, d in _run(ctx, items[0], goals, steps, depth):
        yield from _thens(ctx, items[1:], g, s, d)


def _repeat(ctx, body, n, goals, steps, depth):
    # greedy: as many iterations as possible first, zero iterations last
    if n > 0:
        for g, s, d in _run(ctx, body, goals, steps, depth):
            if s == steps:
                continue  # an iteration that did nothing cannot make progress
            yield from _repeat(ctx, body, n - 1, g, s, d)
    yield goals, steps, depth


def apply_strategy(theory: Theory, state, strategy, depth_bound: int,
                   ctx: Optional[StrategyContext] = None) -> Iterator:
    """Lazily yield ``(goals, steps)`` pairs reachable under ``strategy``."""
    ctx = ctx or StrategyContext(theory)
    for goals, steps, _ in _run(ctx, strategy, tuple(state), (), depth_bound):
        yield goals, steps


def run_strategy(theory: Theory, goal: Formula, strategy, config: Config = Config(),
                 name: str = "goal", features: Optional[FeatureSet] = None,
                 weights: Optional[tuple] = None, stats: Optional[dict] = None):
    """Iterative deepening over choice-point depth 1..config.max_depth.

    Returns the first script that closes every goal, or NotFound.  ``stats``
    (when given) receives the number of strategy nodes visited.
    """
    ctx = StrategyContext(theory, config, features, weights)
    root = (make_sequent(goal),)
    result = NotFound("exhausted")
    try:
        for bound in range(1, config.max_depth + 1):
            for goals, steps in apply_strategy(theory, root, strategy, bound, ctx):
                if not goals:
                    result = ProofScript(name, steps + (Qed(),), tuple(theory.lemma_names()))
                    break
            if isinstance(result, ProofScript):
                break
    except _Budget:
        result = NotFound("budget")
    if stats is not None:
        stats["nodes"] = ctx.nodes
    return result

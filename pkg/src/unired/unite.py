"""Best-first proof search combining deduction, abduction and ranked induction.

A popped state is first handed to ``auto``.  If that changes anything the
deductive child is the only child: deduction is deterministic, so branching
on alternatives next to it only duplicates work one level down.  Stuck
states branch into valuable conjectures and the top-ranked induction
candidates of their first sequent.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

from .config import Config
from .evaluation import Counterexample, find_counterexample
from .kernel import Theory, alpha_key, make_sequent, term_size
from .mlfeat import FeatureSet, default_features, default_weights, ranked_candidates
from .psl import StrategyContext
from .replay import StepError, check_script  # noqa: F401  (re-exported)
from .steps import Auto, Conjecture, Induct, ProofScript, Qed


class UnknownGoal(KeyError):
    pass


@dataclass(frozen=True)
class Stats:
    nodes: int
    millis: int
    queued: int = 0


@dataclass(frozen=True)
class Proved:
    script: ProofScript
    stats: Stats


@dataclass(frozen=True)
class Refuted:
    counterexample: Counterexample
    stats: Stats


@dataclass(frozen=True)
class GaveUp:
    reason: str  # "BudgetExhausted" or "QueueEmpty"
    stats: Stats


@dataclass(frozen=True)
class ProofState:
    goals: tuple
    log: tuple = ()
    depth: int = 0
    seqno: int = 0


@dataclass(frozen=True)
class PriorityWeights:
    step: float = 1.0
    size: float = 0.1
    depth: float = 0.5
    goals: float = 1.0

    @classmethod
    def from_config(cls, config: Config) -> "PriorityWeights":
        return cls(config.w_step, config.w_size, config.w_depth, config.w_goals)


class PriorityQueue:
    """Max-priority queue; equal priorities pop in insertion (seqno) order."""

    def __init__(self):
        self._heap: list = []

    def push(self, priority: float, seqno: int, item) -> None:
        heapq.heappush(self._heap, (-priority, seqno, item))

    def pop(self):
        neg, seqno, item = heapq.heappop(self._heap)
        return -neg, seqno, item

    def __len__(self) -> int:
        return len(self._heap)


def goal_size(goals) -> int:
    return sum(term_size(e.lhs) + term_size(e.rhs) for s in goals for e in s.target.equations())


def priority(state: ProofState, step_kind: str, step_score: float,
             weights: PriorityWeights = PriorityWeights()) -> float:
    """Higher is better.  ``step_kind`` only documents where ``step_score`` came from."""
    return (
        weights.step * step_score
        - weights.size * goal_size(state.goals)
        - weights.depth * state.depth
        - weights.goals * len(state.goals)
    )


@dataclass
class SearchContext:
    theory: Theory
    config: Config = field(default_factory=Config)
    features: Optional[FeatureSet] = None
    weights: Optional[tuple] = None

    def __post_init__(self):
        if self.features is None:
            self.features = default_features()
        if self.weights is None:
            self.weights = default_weights()
        self.strategy = StrategyContext(self.theory, self.config, self.features, self.weights)
        self.pweights = PriorityWeights.from_config(self.config)
        self.counter = itertools.count()


@dataclass(frozen=True)
class Child:
    steps: tuple
    state: ProofState
    priority: float


def expand(ctx: SearchContext, state: ProofState):
    """Children of ``state``; a ProofState with no goals signals success."""
    runner = ctx.strategy.runner
    cfg = ctx.config
    try:
        goals = runner.apply(state.goals, Auto())
    except StepError:
        goals = None
    if goals is not None:
        child = ProofState(goals, state.log + (Auto(),), state.depth + 1, next(ctx.counter))
        if not goals:
            return child
        return [Child((Auto(),), child, priority(child, "auto", cfg.deductive_bonus, ctx.pweights))]
    first = state.goals[0]
    children = []
    n_conj = sum(isinstance(s, Conjecture) for s in state.log)
    n_ind = sum(isinstance(s, Induct) for s in state.log)
    conjectures = ctx.strategy.valuable_conjectures(first) if n_conj < cfg.max_conjecture_steps else []
    for c in conjectures:
        step = Conjecture(c)
        new = runner.apply(state.goals, step)
        child = ProofState(new, state.log + (step,), state.depth + 1, next(ctx.counter))
        size = sum(term_size(e.lhs) + term_size(e.rhs) for e in c.equations())
        children.append(Child((step,), child, priority(child, "conjecture", -size / 4, ctx.pweights)))
    if n_ind >= cfg.max_inductions:
        return children
    ranked = ranked_candidates(first, ctx.theory, ctx.features, ctx.weights, cfg.max_arbitrary)
    for args, _, score in ranked[: cfg.top_k]:
        step = Induct(args)
        try:
            new = runner.apply(state.goals, step)
        except StepError:
            continue
        child = ProofState(new, state.log + (step,), state.depth + 1, next(ctx.counter))
        children.append(Child((step,), child, priority(child, "induct", score, ctx.pweights)))
    return children


def _state_key(state: ProofState) -> tuple:
    return tuple(alpha_key(s) for s in state.goals)


def united_prove(theory: Theory, goal_name: str, config: Config = Config(),
                 features: Optional[FeatureSet] = None, weights: Optional[tuple] = None):
    """Refute by testing, else best-first search; a proved goal becomes a lemma."""
    start = time.monotonic()
    try:
        goal = theory.goal(goal_name)
    except KeyError:
        raise UnknownGoal(goal_name) from None

    def stats(nodes, queued=0):
        return Stats(nodes, int((time.monotonic() - start) * 1000), queued)

    cex = find_counterexample(theory, goal, config.root_refute_size, config.fuel)
    if cex is not None:
        return Refuted(cex, stats(0))
    ctx = SearchContext(theory, config, features, weights)
    root = ProofState((make_sequent(goal),), (), 0, next(ctx.counter))
    queue = PriorityQueue()
    queue.push(priority(root, "root", 0.0, ctx.pweights), root.seqno, root)
    seen = {_state_key(root)}
    nodes = 0
    while queue:
        if nodes >= config.max_nodes:
            return GaveUp("BudgetExhausted", stats(nodes, len(queue)))
        if config.timeout is not None and time.monotonic() - start > config.timeout:
            return GaveUp("BudgetExhausted", stats(nodes, len(queue)))
        _, _, state = queue.pop()
        nodes += 1
        out = expand(ctx, state)
        if isinstance(out, ProofState):
            script = ProofScript(goal_name, out.log + (Qed(),), tuple(theory.lemma_names()))
            theory.add_lemma(goal_name, goal)
            return Proved(script, stats(nodes, len(queue)))
        for child in out:
            key = _state_key(child.state)
            if key in seen:
                continue
            seen.add(key)
            queue.push(child.priority, child.state.seqno, child.state)
    return GaveUp("QueueEmpty", stats(nodes))

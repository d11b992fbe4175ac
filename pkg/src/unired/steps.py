"""Proof steps, proof scripts, induction arguments and strategy ASTs.

These are plain values shared by the parser, the strategy runtime, the
best-first search and the replay checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .kernel import Formula


@dataclass(frozen=True)
class InductArgs:
    on: tuple
    arbitrary: tuple = ()
    rule: Optional[str] = None


# -- proof steps -----------------------------------------------------------


@dataclass(frozen=True)
class Induct:
    args: InductArgs


@dataclass(frozen=True)
class Cases:
    var: str


@dataclass(frozen=True)
class Auto:
    pass


@dataclass(frozen=True)
class Simp:
    pass


@dataclass(frozen=True)
class Conjecture:
    formula: Formula


@dataclass(frozen=True)
class Qed:
    pass


@dataclass(frozen=True)
class ProofScript:
    goal: str
    steps: tuple
    # lemma names in scope when the script was produced; None means "whatever
    # the theory currently holds"
    using: Optional[tuple] = None


# -- strategies --------------------------------------------------------------


@dataclass(frozen=True)
class SAuto:
    pass


@dataclass(frozen=True)
class SSimp:
    pass


@dataclass(frozen=True)
class IsSolved:
    pass


@dataclass(frozen=True)
class Dynamic:
    kind: str  # "Induct" or "Conjecture"


@dataclass(frozen=True)
class Thens:
    items: tuple


@dataclass(frozen=True)
class Ors:
    items: tuple


@dataclass(frozen=True)
class Repeat:
    body: object
    max_iter: int


DYNAMIC_KINDS = ("Induct", "Conjecture")

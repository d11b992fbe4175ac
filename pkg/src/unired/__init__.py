"""Inductive theorem proving over first-order functional programs.

Combines structural and recursion induction, rewriting, conjecture
generation with counterexample filtering, learned induction ranking and a
tactic language under one best-first search.
"""

__version__ = "0.1.0"

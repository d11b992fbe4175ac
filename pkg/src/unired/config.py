"""Search configuration: budgets, priority weights and file locations.

Config files hold ``key = value`` lines; ``#`` starts a comment.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Optional

from .deduct import Budgets


@dataclass(frozen=True)
class Config:
    # deduction
    simp_budget: int = 2000
    auto_budget: int = 500
    rule_cap: int = 3
    implication_induction: bool = True
    # induction and abduction
    max_arbitrary: int = 2
    max_conjectures: int = 8
    refute_size: int = 8
    refute_tests: Optional[int] = 5_000
    fuel: int = 10_000
    root_refute_size: int = 8
    # united search
    top_k: int = 5
    max_inductions: int = 3  # Induct steps per proof state
    max_conjecture_steps: int = 3  # Conjecture steps per proof state
    max_nodes: int = 50_000
    timeout: Optional[float] = None
    w_step: float = 1.0
    w_size: float = 0.1
    w_depth: float = 0.5
    w_goals: float = 1.0
    deductive_bonus: float = 5.0
    mode: str = "single"
    # strategy runtime
    max_depth: int = 4
    strategy_nodes: int = 10_000
    # feature files; None selects the shipped defaults
    features: Optional[str] = None
    weights: Optional[str] = None

    def budgets(self) -> Budgets:
        return Budgets(self.simp_budget, self.auto_budget, self.rule_cap, self.implication_induction)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)


class ConfigError(ValueError):
    pass


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(name: str, kind, text: str):
    kind = str(kind)
    if "bool" in kind:
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, found {text!r}")
    if "Optional" in kind or "None" in kind:
        if text.lower() == "none":
            return None
    try:
        if "int" in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, found {text!r}") from None
    return text


def parse_config(text: str, base: Config = Config()) -> Config:
    types = {f.name: f.type for f in fields(Config)}
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        changes[key] = _convert(key, types[key], value.strip())
    cfg = dataclasses.replace(base, **changes)
    if cfg.mode not in ("single", "parallel"):
        raise ConfigError(f"mode must be 'single' or 'parallel', not {cfg.mode!r}")
    return cfg


def load_config(path: str, base: Config = Config()) -> Config:
    with open(path) as fh:
        return parse_config(fh.read(), base)

"""Command-line front end.

Exit codes: 0 proved/checked/fit, 1 refuted or replay failed, 2 gave up,
3 usage or input error.  With several goals the worst code wins, ranked
3 > 1 > 2 > 0.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from . import psl, unite
from .abduce import Refuted as ConjRefuted
from .abduce import Refuter, Valuable, filter_conjecture, generate_conjectures
from .config import Config, ConfigError, load_config
from .deduct import DeductCache
from .evaluation import Counterexample, find_counterexample
from .kernel import Theory, make_sequent
from .mlfeat import (
    UnknownChoice,
    default_features,
    default_weights,
    fit_weights,
    format_weights,
    load_corpus,
    parse_feature_set,
    parse_weights,
    ranked_candidates,
)
from .replay import Proved as Checked
from .replay import StepError, StepRunner, check_script
from .steps import Auto, Induct
from .syntax import (
    ParseError,
    parse_induct_args,
    parse_scripts,
    parse_strategy,
    parse_theory,
    print_formula,
    print_script,
    print_step,
    print_term,
)

OK, FAILED, GAVE_UP, USAGE = 0, 1, 2, 3
_SEVERITY = {OK: 0, GAVE_UP: 1, FAILED: 2, USAGE: 3}


def worst(codes) -> int:
    return max(codes, key=_SEVERITY.__getitem__, default=OK)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


# -- shared loading --------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from None


def _load_theory(path: str) -> Theory:
    try:
        return parse_theory(_read(path))
    except ParseError as e:
        raise UsageError(f"{path}:{e}") from None


def _config(args) -> Config:
    cfg = Config()
    if getattr(args, "config", None):
        try:
            cfg = load_config(args.config, cfg)
        except ConfigError as e:
            raise UsageError(f"{args.config}: {e}") from None
        except OSError as e:
            raise UsageError(f"{args.config}: {e.strerror}") from None
    changes = {}
    for flag, key in (("timeout", "timeout"), ("nodes", "max_nodes"),
                      ("features", "features"), ("weights", "weights")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    return cfg.replace(**changes)


def _features_weights(cfg: Config):
    try:
        feats = parse_feature_set(_read(cfg.features)) if cfg.features else default_features()
    except ParseError as e:
        raise UsageError(f"{cfg.features}:{e}") from None
    try:
        weights = (parse_weights(_read(cfg.weights), len(feats)) if cfg.weights
                   else default_weights())
    except ValueError as e:
        raise UsageError(f"{cfg.weights}: {e}") from None
    if len(weights) != len(feats):
        raise UsageError(f"{len(feats)} features but {len(weights)} shipped weights")
    return feats, weights


def _goal_names(theory: Theory, goal: Optional[str]) -> list:
    if goal is None:
        return [n for n, _ in theory.goals]
    try:
        theory.goal(goal)
    except KeyError:
        raise UsageError(f"unknown goal {goal}") from None
    return [goal]


def format_assignment(cex: Counterexample) -> list:
    return [f"  {name} = {print_term(t)}" for name, t in cex.assignment.items()]


# -- prove -----------------------------------------------------------------------


def _prove_one(theory: Theory, name: str, cfg: Config, strategy, feats, weights) -> tuple:
    """(verdict, nodes, millis, script or None, counterexample or None)."""
    if strategy is None:
        r = unite.united_prove(theory, name, cfg, feats, weights)
        if isinstance(r, unite.Proved):
            return "PROVED", r.stats.nodes, r.stats.millis, r.script, None
        if isinstance(r, unite.Refuted):
            return "REFUTED", r.stats.nodes, r.stats.millis, None, r.counterexample
        return "GAVEUP", r.stats.nodes, r.stats.millis, None, None
    start = time.monotonic()
    goal = theory.goal(name)
    cex = find_counterexample(theory, goal, cfg.root_refute_size, cfg.fuel)
    if cex is not None:
        return "REFUTED", 0, int((time.monotonic() - start) * 1000), None, cex
    stats: dict = {}
    r = psl.run_strategy(theory, goal, strategy, cfg, name, feats, weights, stats)
    millis = int((time.monotonic() - start) * 1000)
    if isinstance(r, psl.NotFound):
        return "GAVEUP", stats["nodes"], millis, None, None
    theory.add_lemma(name, goal)
    return "PROVED", stats["nodes"], millis, r, None


def _prove_job(job):
    text, name, cfg, strategy, feats, weights = job
    return _prove_one(parse_theory(text), name, cfg, strategy, feats, weights)


def _strategy(args):
    if args.strategy is None:
        return None
    try:
        return parse_strategy(args.strategy)
    except ParseError as e:
        raise UsageError(f"strategy:{e}") from None


def cmd_prove(args, out) -> int:
    cfg = _config(args)
    feats, weights = _features_weights(cfg)
    strategy = _strategy(args)
    text = _read(args.file)
    theory = _load_theory(args.file)
    names = _goal_names(theory, args.goal)
    emit = Path(args.emit_proof) if args.emit_proof else None
    if emit is not None:
        emit.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1 and not args.no_lemma_reuse:
        print("note: --jobs needs --no-lemma-reuse; proving sequentially", file=sys.stderr)
    if args.jobs > 1 and args.no_lemma_reuse and len(names) > 1:
        jobs = [(text, n, cfg, strategy, feats, weights) for n in names]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_prove_job, jobs))
    else:
        results = []
        for n in names:
            th = theory.copy() if args.no_lemma_reuse else theory
            results.append(_prove_one(th, n, cfg, strategy, feats, weights))
    codes = []
    for name, (verdict, nodes, millis, script, cex) in zip(names, results):
        path = None
        if script is not None and emit is not None:
            path = emit / f"{name}.prf"
            path.write_text(print_script(script))
        shown_ms = millis if (args.timings or not args.json) else None
        if args.json:
            obj = {"name": name, "verdict": verdict, "nodes": nodes,
                   "script": str(path) if path else None}
            if shown_ms is not None:
                obj["millis"] = shown_ms
            if cex is not None:
                obj["counterexample"] = {k: print_term(t) for k, t in cex.assignment.items()}
            print(json.dumps(obj, sort_keys=True), file=out)
        else:
            print(f"{verdict} {name} {nodes} {shown_ms}", file=out)
            if cex is not None:
                for line in format_assignment(cex):
                    print(line, file=out)
            if script is not None and args.show_script:
                print(print_script(script), end="", file=out)
        codes.append({"PROVED": OK, "REFUTED": FAILED, "GAVEUP": GAVE_UP}[verdict])
    return worst(codes)


# -- check -----------------------------------------------------------------------


def _script_files(paths) -> list:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.glob("*.prf")))
        elif p.exists():
            files.append(p)
        else:
            raise UsageError(f"{p}: no such file or directory")
    return files


def cmd_check(args, out) -> int:
    theory = _load_theory(args.file)
    cfg = _config(args)
    order = [n for n, _ in theory.goals]
    codes = []
    for path in _script_files(args.scripts):
        try:
            scripts = parse_scripts(path.read_text(), theory)
        except ParseError as e:
            raise UsageError(f"{path}:{e}") from None
        for script in scripts:
            # a script may cite lemmas and goals stated before its own goal
            scoped = theory.copy()
            if script.goal in order:
                for name in order[: order.index(script.goal)]:
                    scoped.add_lemma(name, theory.goal(name))
            r = check_script(scoped, script.goal, script, cfg)
            if isinstance(r, Checked):
                print(f"OK {script.goal}", file=out)
                codes.append(OK)
            else:
                print(f"FAIL {script.goal} step {r.step_index}: {r.reason}", file=out)
                codes.append(FAILED)
    return worst(codes)


# -- refute ----------------------------------------------------------------------


def cmd_refute(args, out) -> int:
    cfg = _config(args)
    theory = _load_theory(args.file)
    codes = []
    for name in _goal_names(theory, args.goal):
        cex = find_counterexample(theory, theory.goal(name), args.size, cfg.fuel)
        if cex is None:
            print(f"NOCOUNTEREXAMPLE {name} {args.size}", file=out)
            codes.append(OK)
        else:
            print(f"REFUTED {name}", file=out)
            for line in format_assignment(cex):
                print(line, file=out)
            codes.append(FAILED)
    return worst(codes)


# -- rank / conjecture -------------------------------------------------------------


def _print_ranking(seq, theory, feats, weights, cfg, out, indent="  "):
    for args, vec, sc in ranked_candidates(seq, theory, feats, weights, cfg.max_arbitrary):
        bits = "".join("1" if b else "0" for b in vec)
        print(f"{indent}{sc:+.4f} {bits} {print_step(Induct(args))}", file=out)


def cmd_rank(args, out) -> int:
    """Ranked induction candidates for the goal, then for each valuable conjecture."""
    cfg = _config(args)
    feats, weights = _features_weights(cfg)
    theory = _load_theory(args.file)
    [name] = _goal_names(theory, args.goal)
    seq = make_sequent(theory.goal(name))
    print(f"goal {name}: {print_formula(seq.target)}", file=out)
    _print_ranking(seq, theory, feats, weights, cfg, out)
    if args.no_conjectures:
        return OK
    ctx = psl.StrategyContext(theory, cfg)
    for c in ctx.valuable_conjectures(seq):
        print(f'conjecture "{print_formula(c)}"', file=out)
        _print_ranking(make_sequent(c), theory, feats, weights, cfg, out)
    return OK


def cmd_conjecture(args, out) -> int:
    cfg = _config(args)
    theory = _load_theory(args.file)
    [name] = _goal_names(theory, args.goal)
    goals = (make_sequent(theory.goal(name)),)
    if args.induct:
        try:
            step = Induct(parse_induct_args(args.induct))
        except ParseError as e:
            raise UsageError(f"induct:{e}") from None
        runner = StepRunner(theory, cfg)
        try:
            goals = runner.apply(goals, step)
            goals = runner.apply(goals, Auto())
        except StepError as e:
            if "no progress" not in str(e):
                raise UsageError(f"induct: {e}") from None
    refuter = Refuter(theory, cfg.refute_size, cfg.fuel, cfg.refute_tests)
    cache = DeductCache(theory, cfg.budgets())
    for i, seq in enumerate(goals, 1):
        print(f"subgoal {i}: {print_formula(seq.target)}", file=out)
        for c in generate_conjectures(seq, theory, cfg.max_conjectures):
            v = filter_conjecture(theory, seq, c, cfg.budgets(), refuter, cache)
            label = "Valuable" if isinstance(v, Valuable) else type(v).__name__
            print(f'  {label} "{print_formula(c)}"', file=out)
            if isinstance(v, ConjRefuted):
                for line in format_assignment(v.counterexample):
                    print("  " + line, file=out)
    return OK


# -- fit ---------------------------------------------------------------------------


def cmd_fit(args, out) -> int:
    cfg = _config(args)
    feats, _ = _features_weights(cfg.replace(weights=None))
    try:
        corpus = load_corpus(args.corpus)
    except (OSError, ValueError, KeyError, ParseError) as e:
        raise UsageError(f"{args.corpus}: {e}") from None
    try:
        weights = fit_weights(corpus, feats, cfg.max_arbitrary)
    except UnknownChoice as e:
        raise UsageError(str(e)) from None
    text = format_weights(weights)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return OK


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="unired", description="Inductive prover for a small functional language.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", metavar="FILE")
        sp.add_argument("--weights", metavar="FILE")
        sp.add_argument("--features", metavar="FILE")

    pr = sub.add_parser("prove", help="prove goals")
    pr.add_argument("file")
    pr.add_argument("--goal")
    mode = pr.add_mutually_exclusive_group()
    mode.add_argument("--united", action="store_true", help="united search (default)")
    mode.add_argument("--strategy", metavar="NAME|EXPR")
    pr.add_argument("--timeout", type=float, metavar="SEC")
    pr.add_argument("--nodes", type=int, metavar="N")
    pr.add_argument("--emit-proof", metavar="DIR")
    pr.add_argument("--seed", type=int, metavar="N", help="reserved; search is deterministic")
    pr.add_argument("--json", action="store_true")
    pr.add_argument("--timings", action="store_true", help="include millis in --json output")
    pr.add_argument("--jobs", type=int, default=1, metavar="N")
    pr.add_argument("--no-lemma-reuse", action="store_true")
    pr.add_argument("--show-script", action="store_true")
    common(pr)
    pr.set_defaults(func=cmd_prove)

    ck = sub.add_parser("check", help="replay proof scripts")
    ck.add_argument("file")
    ck.add_argument("scripts", nargs="+", metavar="SCRIPT|DIR")
    common(ck)
    ck.set_defaults(func=cmd_check)

    rf = sub.add_parser("refute", help="search for a counterexample")
    rf.add_argument("file")
    rf.add_argument("--goal")
    rf.add_argument("--size", type=int, default=8)
    common(rf)
    rf.set_defaults(func=cmd_refute)

    rk = sub.add_parser("rank", help="ranked induction candidates")
    rk.add_argument("file")
    rk.add_argument("--goal", required=True)
    rk.add_argument("--no-conjectures", action="store_true")
    common(rk)
    rk.set_defaults(func=cmd_rank)

    cj = sub.add_parser("conjecture", help="conjecture candidates with verdicts")
    cj.add_argument("file")
    cj.add_argument("--goal", required=True)
    cj.add_argument("--induct", metavar="ARGS", help="induct (then auto) before conjecturing")
    common(cj)
    cj.set_defaults(func=cmd_conjecture)

    ft = sub.add_parser("fit", help="fit feature weights from a corpus")
    ft.add_argument("corpus")
    ft.add_argument("--out", metavar="FILE")
    common(ft)
    ft.set_defaults(func=cmd_fit)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

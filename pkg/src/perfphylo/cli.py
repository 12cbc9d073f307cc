"""
Command line front end.

Exit codes are part of the interface:

    0  compatible / all checks pass
    1  incompatible / some check fails
    2  undecided (search budget exhausted)
    3  usage or input error
"""
from __future__ import annotations

import argparse
import os
import sys

from .construction import counterexample, duplicate_taxon, fitch_example, gapify
from .core import DomainError, to_newick
from .display import displayed_mask
from .io import format_matrix, format_trees, parse_matrix, parse_trees
from .solver import MODES, decide_pp, enumerate_compatible_trees, minimal_obstructions
from .verify import DEFAULT_SEARCH_BUDGET, verify_paper

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNDECIDED = 2
EXIT_ERROR = 3

BUDGET_ENV = "PERFPHYLO_BUDGET"


class CliError(Exception):
    pass


def _default_budget():
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    return value if value > 0 else None


def _budget(args):
    return args.budget if args.budget is not None else _default_budget()


def _read(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise CliError(f"cannot read {path}: {err.strerror}") from None


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_matrix(path):
    try:
        return parse_matrix(_read(path))
    except DomainError as err:
        raise CliError(f"{path}: {err}") from None


def _parse_duplicate(spec):
    x, sep, k = spec.rpartition(":")
    if not sep or not x:
        raise CliError(f"--duplicate expects TAXON:COUNT, got {spec!r}")
    try:
        return x, int(k)
    except ValueError:
        raise CliError(f"--duplicate count must be an integer, got {k!r}") from None


def cmd_generate(args):
    if args.kind == "counterexample":
        matrix = counterexample(args.n).matrix
    elif args.kind == "small8":
        matrix = counterexample(4).matrix
    else:
        matrix = fitch_example()
    for spec in args.duplicate or ():
        x, k = _parse_duplicate(spec)
        matrix = duplicate_taxon(matrix, x, k)
    if args.gapify:
        matrix = gapify(matrix)
    _emit(format_matrix(matrix), args.out)
    return EXIT_OK


def cmd_decide(args):
    matrix = _load_matrix(args.matrix)
    verdict = decide_pp(matrix, args.mode, _budget(args))
    print(verdict.status.capitalize())
    s = verdict.stats
    print(f"status={verdict.status}")
    print(f"taxa={len(matrix.taxa)}")
    print(f"characters={len(matrix)}")
    print(f"trees_explored={s.trees_explored}")
    print(f"pruned={s.pruned}")
    print(f"elapsed={s.elapsed:.3f}")
    if verdict.compatible:
        trees = [verdict.witness]
        if args.limit is not None and args.limit > 1:
            trees = enumerate_compatible_trees(matrix, args.limit, _budget(args))
        print(f"witness={to_newick(trees[0])}")
        if args.out:
            _emit(format_trees(trees), args.out)
        return EXIT_OK
    return EXIT_FAIL if verdict.incompatible else EXIT_UNDECIDED


def cmd_check(args):
    matrix = _load_matrix(args.matrix)
    try:
        trees = parse_trees(_read(args.tree), matrix.taxa)
    except DomainError as err:
        raise CliError(f"{args.tree}: {err}") from None
    if not trees:
        raise CliError(f"{args.tree}: no tree found")
    all_ok = True
    for t_index, tree in enumerate(trees):
        mask = displayed_mask(tree, matrix)
        prefix = f"tree{t_index + 1}\t" if len(trees) > 1 else ""
        for k, name in enumerate(matrix.names):
            ok = bool(mask >> k & 1)
            all_ok &= ok
            print(f"{prefix}{name}\t{'pass' if ok else 'fail'}")
    return EXIT_OK if all_ok else EXIT_FAIL


def cmd_obstructions(args):
    matrix = _load_matrix(args.matrix)
    max_size = args.max_size if args.max_size is not None else len(matrix)
    found = minimal_obstructions(matrix, max_size, args.mode, _budget(args))
    names = matrix.names
    for ob in found:
        print(" ".join(names[k] for k in ob.subset))
    if not found.complete:
        print("# incomplete: search budget exhausted", file=sys.stderr)
        return EXIT_UNDECIDED
    return EXIT_OK


def cmd_verify_paper(args):
    budget = _budget(args)
    reports = verify_paper(args.n, args.level, budget if budget is not None else DEFAULT_SEARCH_BUDGET)
    for r in reports:
        print(r.line())
    passed = sum(r.passed for r in reports)
    print(f"n={args.n}")
    print(f"level={args.level}")
    print(f"checks={len(reports)}")
    print(f"passed={passed}")
    print(f"status={'pass' if passed == len(reports) else 'fail'}")
    return EXIT_OK if passed == len(reports) else EXIT_FAIL


def cmd_gapify(args):
    _emit(format_matrix(gapify(_load_matrix(args.matrix))), args.out)
    return EXIT_OK


def cmd_duplicate(args):
    matrix = duplicate_taxon(_load_matrix(args.matrix), args.taxon, args.count)
    _emit(format_matrix(matrix), args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="perfphylo", description="Perfect phylogeny tools.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a built-in matrix")
    g.add_argument("kind", choices=("counterexample", "fitch", "small8"))
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--gapify", action="store_true", help="turn singleton states into gaps")
    g.add_argument("--duplicate", action="append", metavar="TAXON:COUNT")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("decide", help="is there a perfect phylogeny?")
    d.add_argument("matrix")
    d.add_argument("--mode", choices=MODES, default="auto")
    d.add_argument("--budget", type=int)
    d.add_argument("--limit", type=int, help="write up to this many witness trees")
    d.add_argument("--out", help="witness Newick file")
    d.set_defaults(func=cmd_decide)

    c = sub.add_parser("check", help="which characters does a tree display?")
    c.add_argument("matrix")
    c.add_argument("tree")
    c.set_defaults(func=cmd_check)

    o = sub.add_parser("obstructions", help="list minimal incompatible subsets")
    o.add_argument("matrix")
    o.add_argument("--max-size", type=int)
    o.add_argument("--mode", choices=MODES, default="auto")
    o.add_argument("--budget", type=int)
    o.set_defaults(func=cmd_obstructions)

    v = sub.add_parser("verify-paper", help="check the counterexample family at one n")
    v.add_argument("n", type=int)
    v.add_argument("--level", choices=("witnesses", "full"), default="full")
    v.add_argument("--budget", type=int)
    v.set_defaults(func=cmd_verify_paper)

    gp = sub.add_parser("gapify", help="turn singleton states into gaps")
    gp.add_argument("matrix")
    gp.add_argument("--out")
    gp.set_defaults(func=cmd_gapify)

    dp = sub.add_parser("duplicate", help="add copies of a taxon")
    dp.add_argument("matrix")
    dp.add_argument("--taxon", required=True)
    dp.add_argument("--count", type=int, default=1)
    dp.add_argument("--out")
    dp.set_defaults(func=cmd_duplicate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2, which would read as "undecided"
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (CliError, DomainError) as err:
        print(f"perfphylo: error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

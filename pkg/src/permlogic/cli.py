"""Command-line front end: permlogic <command> ...

Exit codes: 0 for success (or a true verdict), 1 for a false verdict, 2 for errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import constructions as cons
from . import transformers as tf
from .efgames import EFGame
from .evaluator import STRATEGIES, BudgetExceeded, Evaluator
from .logic import (
    SIGNATURES, TOG, TOTO, FormulaError, analyze, format_formula, free_vars, is_element_name, parse_formula,
    structure_of_graph, structure_of_linear_order, structure_of_permutation, structure_of_word,
)
from .merge import SolveStats, admissible_coloring, spiral_order, verify_coloring
from .perm import Permutation, statistics

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


class CLIError(Exception):
    pass


def _text(arg: str) -> str:
    """Contents of the file ``arg`` if it exists, otherwise ``arg`` itself."""
    if os.path.isfile(arg):
        with open(arg) as fh:
            return fh.read()
    return arg


def _perm(arg: str) -> Permutation:
    return Permutation.parse(_text(arg))


def _formula(arg: str, signature=TOTO):
    return parse_formula(_text(arg), signature)


def _emit(text: str, out: str | None):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _structure(arg: str, theory: str):
    if theory == "toto":
        return structure_of_permutation(_perm(arg))
    if theory == "incidence":
        return cons.incidence_structure(_perm(arg))
    if theory == "word":
        return structure_of_word(_text(arg).strip())
    if theory == "graph":
        g = cons.Graph.parse(_text(arg))
        return structure_of_graph(g.n, g.edges)
    if theory == "tolo":
        return structure_of_linear_order(int(_text(arg).strip()))
    raise CLIError(f"unknown theory {theory!r}")


# -- commands ----------------------------------------------------------------

def cmd_check(args) -> int:
    structure = _structure(args.perm, args.theory)
    phi = _formula(args.formula, SIGNATURES[args.theory])
    if free_vars(phi):
        raise CLIError(f"formula has free variables: {', '.join(sorted(free_vars(phi)))}")
    ev = Evaluator(structure, args.strategy, args.budget)
    result = ev.evaluate(phi)
    if args.json:
        print(json.dumps({"result": result, "runtime_ms": round(ev.last_stats.runtime_ms, 3),
                          "nodes_evaluated": ev.last_stats.nodes}))
    else:
        print("true" if result else "false")
    return EXIT_TRUE if result else EXIT_FALSE


def cmd_compile(args) -> int:
    kind = args.kind
    if kind == "merge":
        parts = [_formula(f) for f in args.formula]
        out = tf.merge_sentence(parts)
    else:
        if len(args.formula) != 1:
            raise CLIError(f"compile {kind} takes exactly one formula")
        phi = _formula(args.formula[0], None if kind == "interpret" else TOTO)
        if kind == "card":
            if args.q is None or args.r is None:
                raise CLIError("compile card needs --q and --r")
            variables = sorted(v for v in free_vars(phi) if is_element_name(v))
            if args.vars is not None and args.vars != len(variables):
                raise CLIError(f"--vars {args.vars} but the formula has {len(variables)} free element variables")
            out = tf.modular_count_sentence(phi, args.q, args.r, variables)
        elif kind == "expand-card":
            out = tf.expand_card(phi)
        elif kind == "relativize":
            if not args.set:
                raise CLIError("compile relativize needs --set")
            out = tf.relativize(phi, args.set)
        elif kind == "word-sim":
            out = tf.word_simulation(phi)
        elif kind == "interpret":
            out = tf.interpret_incidence(phi)
        else:
            raise CLIError(f"unknown compile target {kind!r}")
    _emit(format_formula(out), args.out)
    if args.info:
        info = analyze(out)
        print(f"quantifier depth {info.quantifier_depth}, {info.node_count} nodes", file=sys.stderr)
    return EXIT_TRUE


def _reduction_groups(out):
    groups, roles = {}, {}
    for b in out.meta["blocks"]:
        for p in b["points"]:
            groups[p] = f"B{b['index']}"
    for k, pts in out.meta["pairs"].items():
        for p in pts:
            roles[p] = "anchor" if k == "S" else k.split("@")[0]
    for pts in out.meta["barricades"].values():
        for p in pts:
            roles[p] = "barricade"
    for p in out.meta["separators"].values():
        roles[p] = "separator"
    for pts in out.meta["vertex_markers"].values():
        for p in pts:
            roles[p] = "vertex-marker"
    for row in out.meta["edge_markers"].values():
        for p in row.values():
            roles[p] = "edge-marker"
    return groups, roles


def _figures(args, pi, groups=None, roles=None, cuts=None, title=None):
    if not (args.plot or args.coords):
        return
    from . import plotting

    if args.plot:
        plotting.plot_permutation(args.plot, pi, groups, cuts=cuts, title=title)
    if args.coords:
        plotting.write_coords(args.coords, pi, groups, roles)


def cmd_reduce(args) -> int:
    from . import reduction as red

    if args.action == "decode":
        if not args.perm or not args.meta:
            raise CLIError("reduce decode needs --perm and --meta")
        out = red.ReductionOutput.from_json(_perm(args.perm), _text(args.meta))
        _emit(red.decode_graph(out).format(), args.out)
        return EXIT_TRUE
    if not args.graph:
        raise CLIError("reduce needs --graph")
    graph = cons.Graph.parse(_text(args.graph))
    oracle = None
    if args.matrix:
        matrix = cons.GriddingMatrix.parse(_text(args.matrix))
        oracle = lambda k: matrix  # noqa: E731
    out = red.encode_graph(graph, oracle)
    if args.formula:
        out.sentence = red.translate_sentence(_formula(args.formula, TOG))
    if args.out_perm:
        _emit(out.permutation.spaced(), args.out_perm)
    else:
        print(out.permutation.spaced())
    if args.out_meta:
        _emit(out.meta_json(), args.out_meta)
    if out.sentence is not None:
        if args.out_formula:
            _emit(format_formula(out.sentence), args.out_formula)
        info = analyze(out.sentence)
        print(f"sentence: quantifier depth {info.quantifier_depth}, {info.node_count} nodes", file=sys.stderr)
    groups, roles = _reduction_groups(out)
    cuts = (out.meta["cuts"]["columns"], out.meta["cuts"]["rows"])
    _figures(args, out.permutation, groups, roles, cuts, f"encoding of a graph on {graph.n} vertices")
    return EXIT_TRUE


def cmd_construct(args) -> int:
    if args.kind == "pikl":
        if args.k is None or args.l is None:
            raise CLIError("construct pikl needs --k and --l")
        pi = cons.pi_kl(args.k, args.l)
        print(pi.spaced())
        _figures(args, pi, title=f"pi_{{{args.k},{args.l}}}")
    elif args.kind == "spiral":
        if args.ell is None:
            raise CLIError("construct spiral needs --ell")
        alpha = Permutation.parse(args.alpha)
        pi, plan = cons.spiral(args.ell, alpha)
        print(pi.spaced())
        groups = {p: f"B{b.index}" for b in plan.blocks for p in b.points}
        roles = {}
        for t, arrows in plan.tracks.items():
            for arrow in arrows:
                for p in arrow:
                    roles[p] = t
        for side, pts in plan.chunks.items():
            for p in pts:
                roles[p] = f"{side}-chunk"
        if args.meta:
            meta = {"alpha": str(alpha), "ell": args.ell,
                    "blocks": [{"index": b.index, "direction": b.direction, "points": b.points,
                                "arrows": b.arrows} for b in plan.blocks],
                    "chunks": plan.chunks, "tracks": plan.tracks}
            _emit(json.dumps(meta, indent=1), args.meta)
        _figures(args, pi, groups, roles, title=f"spiral for {alpha}, l = {args.ell}")
    elif args.kind == "staircase":
        if args.k is None:
            raise CLIError("construct staircase needs --k")
        matrix = cons.staircase_matrix(args.k)
        sys.stdout.write(matrix.format())
        if args.plot:
            from . import plotting

            plotting.plot_matrix(args.plot, matrix, title=f"staircase with {args.k} cells")
        if args.coords:
            # one representative point per cell, in path order
            order = matrix.path_order()
            with open(args.coords, "w") as fh:
                fh.write("step,column,row,cell\n")
                for step, (c, r) in enumerate(order, 1):
                    fh.write(f"{step},{c},{r},{matrix.entry(c, r).name.lower()}\n")
    else:
        raise CLIError(f"unknown construction {args.kind!r}")
    return EXIT_TRUE


def cmd_ef(args) -> int:
    a = _structure(args.left, args.theory)
    b = _structure(args.right, args.theory)
    game = EFGame(a, b)
    start = time.perf_counter()
    winner = game.winner(args.k)
    if args.json:
        print(json.dumps({"winner": winner, "k": args.k, "positions": game.positions,
                          "runtime_ms": round((time.perf_counter() - start) * 1000, 3)}))
    else:
        print(winner)
    return EXIT_TRUE


def cmd_stats(args) -> int:
    pi = _perm(args.perm)
    st = statistics(pi)
    record = {
        "n": pi.n,
        "descents": sorted(st.descent_set),
        "maj": st.maj,
        "inversions": st.inversions,
        "fixed_points": sorted(st.fixed_points),
        "ltr_maxima": sorted(st.ltr_maxima),
    }
    if args.json:
        print(json.dumps(record))
    else:
        for k, v in record.items():
            print(f"{k}: {' '.join(map(str, v)) if isinstance(v, list) else v}")
    return EXIT_TRUE


def cmd_tw(args) -> int:
    pi = _perm(args.perm)
    g = cons.incidence_graph(pi)
    print(cons.treewidth(g, "exact" if args.exact else "upper"))
    return EXIT_TRUE


def cmd_merge_check(args) -> int:
    pi = _perm(args.perm)
    alpha = Permutation.parse(args.alpha)
    order = None
    if args.spiral is not None:
        spi, plan = cons.spiral(args.spiral, alpha)
        if spi != pi:
            raise CLIError("--spiral given but the permutation is not that spiral")
        order = spiral_order(plan)
    stats = SolveStats()
    start = time.perf_counter()
    coloring = admissible_coloring(pi, alpha, args.strategy, order=order, stats=stats)
    elapsed = (time.perf_counter() - start) * 1000
    found = coloring is not None
    word = "".join("R" if coloring[p] == "red" else "B" for p in range(1, pi.n + 1)) if found else None
    if args.json:
        print(json.dumps({"merge": found, "coloring": word, "verified": found and verify_coloring(pi, alpha, coloring),
                          "decisions": stats.decisions, "runtime_ms": round(elapsed, 3)}))
    else:
        print(f"merge: {'yes' if found else 'no'}")
        if found:
            print(word)
    return EXIT_TRUE if found else EXIT_FALSE


# -- parser ------------------------------------------------------------------

def _add_figure_flags(p):
    p.add_argument("--plot", metavar="FILE", help="write a figure of the points (png, pdf, svg)")
    p.add_argument("--coords", metavar="FILE", help="write point coordinates as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permlogic", description="Logic on permutations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate a sentence on a structure")
    p.add_argument("--perm", "--input", dest="perm", required=True,
                   help="permutation (file or inline), or a word / graph file for those theories")
    p.add_argument("--formula", required=True, help="formula file (or inline text)")
    p.add_argument("--theory", choices=["toto", "word", "graph", "incidence"], default="toto")
    p.add_argument("--strategy", choices=STRATEGIES, default="branching")
    p.add_argument("--budget", type=int, default=None, help="abort after this many evaluation steps")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compile", help="apply a formula transformation")
    p.add_argument("kind", choices=["card", "merge", "relativize", "word-sim", "interpret", "expand-card"])
    p.add_argument("--formula", nargs="+", required=True)
    p.add_argument("--vars", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--set")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--info", action="store_true", help="report size and depth on stderr")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("reduce", help="encode a graph (and a graph sentence) as a permutation")
    p.add_argument("action", nargs="?", choices=["decode"], help="decode instead of encode")
    p.add_argument("--graph")
    p.add_argument("--formula")
    p.add_argument("--matrix", help="gridding matrix file to use instead of the staircase")
    p.add_argument("--out-perm")
    p.add_argument("--out-formula")
    p.add_argument("--out-meta")
    p.add_argument("--perm", help="for decode: the encoded permutation")
    p.add_argument("--meta", help="for decode: the meta file")
    p.add_argument("--out", help="for decode: output graph file (default stdout)")
    _add_figure_flags(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("construct", help="build one of the special permutations")
    p.add_argument("kind", choices=["pikl", "spiral", "staircase"])
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--alpha", default="3142")
    p.add_argument("--meta", help="spiral: write blocks, chunks and tracks as JSON")
    _add_figure_flags(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("ef", help="solve an Ehrenfeucht-Fraisse game")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--theory", choices=["toto", "word", "graph", "tolo"], default="toto")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ef)

    p = sub.add_parser("stats", help="permutation statistics")
    p.add_argument("--perm", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("tw", help="tree-width of the incidence graph")
    p.add_argument("--perm", required=True)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=cmd_tw)

    p = sub.add_parser("merge-check", help="is the permutation a merge of two alpha-avoiders?")
    p.add_argument("--perm", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--strategy", choices=["propagate", "naive"], default="propagate")
    p.add_argument("--spiral", type=int, metavar="L", help="use the variable order of spiral(L, alpha)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_merge_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, FormulaError, ValueError, OSError, KeyError, BudgetExceeded) as exc:
        print(f"permlogic: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

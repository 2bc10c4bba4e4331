"""Command-line entry point. Every subcommand prints one JSON object on stdout."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import SeqflowError, UsageError
from .flow_algebra import generate_closure, is_stable, realize_flow, sharp
from .instance import Instance, load_instance, parse_nfa
from .maxflow import extract_token_flow, max_flow_word, min_cut_word
from .mm_algebra import OMEGA, ext_to_json, product
from .oracle import brute_optimal
from .qualitative import check_fair_unbounded, check_regular_unbounded, check_unbounded, is_in_rec
from .quantitative import optimal_value
from .semigroup import (FiniteSemigroup, build_sharp_summary, build_summary, ramsey_number,
                        regular_j_length)

log = logging.getLogger("seqflow")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _edges(text, inst: Instance):
    if text is None:
        return None
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 2:
            raise UsageError(f"bad edge {chunk!r}; expected u,v")
        out.append((inst.vertex(parts[0]), inst.vertex(parts[1])))
    if not out:
        raise UsageError("fair edge set must be nonempty")
    return out


def _word(text):
    return [a.strip() for a in text.split(",") if a.strip()] if text else []


def _load(args) -> Instance:
    inst = load_instance(args.instance)
    if getattr(args, "letters", None):
        inst = inst.restrict(_word(args.letters))
    if getattr(args, "nfa", None):
        with open(args.nfa, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                from .errors import ParseError
                raise ParseError(f"invalid automaton JSON: {exc}") from None
        nfa = parse_nfa(obj, inst.capacities)
        inst = inst.with_options(nfa=nfa)
    edges = _edges(getattr(args, "edges", None), inst)
    if edges:
        inst = inst.with_options(edges=edges)
    return inst


def cmd_solve(args):
    inst = _load(args)
    res = optimal_value(inst, mode=args.mode, strategy=args.strategy, from_bound=args.paper_bound,
                        bound=args.bound)
    log.info("probes: %s", res.probes)
    return res.to_json(with_witness=True, with_word=args.word)


def cmd_unbounded(args):
    inst = _load(args)
    if inst.nfa is not None:
        verdict = check_regular_unbounded(inst, inst.nfa)
    elif inst.edges is not None:
        verdict = check_fair_unbounded(inst, inst.edges, args.strategy)
    elif args.strict_space:
        verdict = _strict_bounded(inst, args.height)
    else:
        verdict = check_unbounded(inst, args.strategy, height=args.height)
    out = verdict.to_json(with_witness=args.witness)
    if args.witness and verdict.unbounded and verdict.witness is not None:
        log.info("witness height %d, iteration depth %d",
                 verdict.witness.height, verdict.witness.sharp_height)
    return out


def _strict_bounded(inst, height):
    from .mm_algebra import all_matrices, MMValue
    from .qualitative import Verdict
    H = height if height is not None else 2 * inst.n ** 4
    for x in all_matrices(inst.n):
        if x[inst.source, inst.target] == MMValue.OMEGA and is_in_rec(inst, x, H, strict_space=True):
            return Verdict(True, None, x)
    return Verdict(False)


def cmd_maxflow(args):
    inst = _load(args)
    word = _word(args.word)
    value = max_flow_word(inst, word)
    out = {"value": ext_to_json(value)}
    if args.cut:
        cut = min_cut_word(inst, word)
        vs = inst.vertices
        out["cut"] = [sorted(f"{vs[u]}->{vs[v]}" for u, v in layer) for layer in cut.layers]
        out["cut_cost"] = ext_to_json(cut.cost)
    if args.tokens is not None:
        flow = extract_token_flow(inst, word, value=args.tokens)
        out["tokens"] = flow.to_json(inst.vertices)
    return out


def cmd_oracle(args):
    inst = _load(args)
    res = brute_optimal(inst, args.max_len, nfa=inst.nfa, edges=inst.edges)
    return {"best": ext_to_json(res.best), "word": list(res.word) if res.word else None,
            "table": [None if v is None else ext_to_json(v) for v in res.table]}


def cmd_analyze(args):
    inst = _load(args)
    F = generate_closure(inst.generators())
    S = FiniteSemigroup(F.elements, product)
    idem = F.idempotents()
    out = {
        "closure_size": len(F),
        "idempotents": len(idem),
        "unstable_idempotents": sum(1 for e in idem if not is_stable(e)),
        "regular_j_length": regular_j_length(S),
        "max_expression_height": max(F.depth.values()),
    }
    r = ramsey_number(S, 3)
    out["ramsey3"] = {"exact": r.exact, "lower": r.lower, "upper_log2": r.upper.bit_length()}
    if args.word:
        word = [S.index[inst.generator(a)] for a in _word(args.word)]
        tree = build_summary(S, word)
        sharp_idx = lambda i: S.index[sharp(S.elements[i])] if S.is_idempotent(i) else i
        stree = build_sharp_summary(S, word, sharp_idx)
        out["summary"] = {"height": tree.height, "size": tree.size}
        out["sharp_summary"] = {"height": stree.height, "size": stree.size,
                                "unstable_per_branch": stree.max_unstable_per_branch()}
        log.info("%s", stree.render())
    if args.realize is not None:
        verdict = check_unbounded(inst)
        if not verdict.unbounded:
            raise UsageError("no unboundedness witness to realize")
        word, flow = realize_flow(verdict.witness, args.realize, inst)
        g = flow.global_flow(inst.n)
        out["realization"] = {"length": len(word), "tokens": g[inst.source][inst.target]}
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="seqflow", description="Sequential flow solver")
    p.add_argument("--verbose", "-v", action="store_true", help="traces on stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, variants=True):
        sp.add_argument("instance")
        sp.add_argument("--letters", help="comma-separated subset of capacities")
        if variants:
            sp.add_argument("--edges", help="fair edge set, e.g. 'v1,v4;v3,v4'")
            sp.add_argument("--nfa", help="automaton JSON file restricting the words")

    s = sub.add_parser("solve", help="optimal sequential flow")
    common(s)
    s.add_argument("--strategy", choices=["closure", "bounded"], default="closure")
    s.add_argument("--mode", choices=["bfs", "dichotomic"], default="bfs")
    s.add_argument("--paper-bound", action="store_true", help="binary search from the configured bound")
    s.add_argument("--bound", type=int, help="explicit bound for --paper-bound")
    s.add_argument("--word", action="store_true", help="also print a word attaining the value")
    s.set_defaults(func=cmd_solve)

    u = sub.add_parser("unbounded", help="decide unboundedness")
    common(u)
    u.add_argument("--strategy", choices=["closure", "bounded"], default="closure")
    u.add_argument("--witness", action="store_true", help="print the witness expression")
    u.add_argument("--height", type=int, help="height budget for the bounded strategy")
    u.add_argument("--strict-space", action="store_true", help="literal recursion, no memo table")
    u.set_defaults(func=cmd_unbounded)

    m = sub.add_parser("maxflow", help="max flow of one capacity word")
    common(m, variants=False)
    m.add_argument("--word", required=True, help="comma-separated letters")
    m.add_argument("--cut", action="store_true")
    m.add_argument("--tokens", type=int, help="extract a token flow of this value")
    m.set_defaults(func=cmd_maxflow)

    o = sub.add_parser("oracle", help="brute force over short words")
    common(o)
    o.add_argument("--max-len", type=int, default=5)
    o.set_defaults(func=cmd_oracle)

    a = sub.add_parser("analyze", help="flow semigroup statistics")
    common(a, variants=False)
    a.add_argument("--word", help="summarize this comma-separated word")
    a.add_argument("--realize", type=int, help="realize the witness with this many tokens")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing command")
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(message)s"))
        log.handlers[:] = [handler]
        log.propagate = False
        log.setLevel(logging.INFO if args.verbose else logging.WARNING)
        out = args.func(args)
    except SeqflowError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return exc.exit_code
    except OSError as exc:
        print(json.dumps({"error": "ParseError", "message": str(exc)}))
        return 1
    print(json.dumps(out, default=lambda v: "omega" if v is OMEGA else str(v)))
    return 0


if __name__ == "__main__":
    sys.exit(main())

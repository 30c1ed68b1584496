"""Command-line surface.

Instance text format: optional '#' comment lines, then a header line
"n m", then m lines "u v" with 1-based endpoints.  The --edges flag fixes
the semantics of those pairs (cover edges closed transitively, a full
closure validated as such, arbitrary digraph edges, or relation pairs that
may include self-pairs).

Exit codes: 0 ok, 2 usage or parse error, 3 validation failure,
4 corrupt container.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import opcount
from .container import ContainerError, load, mode_of, save
from .gen import GenSpec, SplitMix64, instance
from .oracle import (
    ReachabilityOracle,
    ReductionIndex,
    SuccinctPoset,
    TransitiveRelationOracle,
    build_reachability,
    build_reduction_index,
    build_succinct_poset,
    build_transitive_relation,
    precedes,
    reachable,
    reduction_edge,
    relation_query,
    space_report,
)
from .order import (
    ClosureMatrix,
    Digraph,
    InvalidPosetError,
    NotADagError,
    transitive_closure,
    transitive_reduction,
    validate_poset,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_CORRUPT = 4

log = logging.getLogger("sposet")


class ParseError(ValueError):
    pass


def read_instance(path):
    """Parse the text instance format; returns (n, edge list)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    data = [ln for ln in lines if ln and not ln.startswith("#")]
    if not data:
        raise ParseError(f"{path}: empty instance file")
    try:
        n, m = (int(tok) for tok in data[0].split())
    except ValueError as exc:
        raise ParseError(f"{path}: bad header line {data[0]!r}") from exc
    if len(data) - 1 != m:
        raise ParseError(f"{path}: header promises {m} edges, found {len(data) - 1}")
    edges = []
    for ln in data[1:]:
        try:
            u, v = (int(tok) for tok in ln.split())
        except ValueError as exc:
            raise ParseError(f"{path}: bad edge line {ln!r}") from exc
        edges.append((u, v))
    return n, edges


def write_instance(path, n, edges, header=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(header + "\n")
        fh.write(f"{n} {len(edges)}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def closure_from_pairs(n, pairs):
    bits = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        if not (1 <= a <= n and 1 <= b <= n):
            raise ParseError(f"edge ({a}, {b}) out of range for n={n}")
        if a == b:
            raise InvalidPosetError(f"closure contains a self-pair ({a}, {a})")
        bits[a - 1, b - 1] = True
    return ClosureMatrix(n, bits)


def build_oracle(n, edges, edge_kind, mode):
    if mode == "poset":
        if edge_kind == "cover":
            closure = transitive_closure(Digraph(n, tuple(edges)))
        elif edge_kind == "closure":
            closure = closure_from_pairs(n, edges)
        else:
            raise ParseError("mode poset accepts --edges cover or closure")
        return build_succinct_poset(closure)
    if mode == "reduction":
        if edge_kind != "cover":
            raise ParseError("mode reduction requires --edges cover")
        return build_reduction_index(Digraph(n, tuple(edges)))
    if mode == "digraph":
        if edge_kind != "digraph":
            raise ParseError("mode digraph requires --edges digraph")
        return build_reachability(Digraph(n, tuple(edges), allow_loops=True))
    if mode == "relation":
        if edge_kind != "relation":
            raise ParseError("mode relation requires --edges relation")
        return build_transitive_relation(set(edges), n)
    raise ParseError(f"unknown mode {mode!r}")


def query_fn(oracle):
    if isinstance(oracle, SuccinctPoset):
        return lambda a, b: precedes(oracle, a, b)
    if isinstance(oracle, ReductionIndex):
        return lambda a, b: reduction_edge(oracle, a, b)
    if isinstance(oracle, ReachabilityOracle):
        return lambda a, b: reachable(oracle, a, b)
    if isinstance(oracle, TransitiveRelationOracle):
        return lambda a, b: relation_query(oracle, a, b)
    raise TypeError(type(oracle).__name__)


def oracle_n(oracle):
    return oracle.n


# -- subcommands -------------------------------------------------------------


def cmd_gen(args):
    spec = GenSpec(kind=args.kind, n=args.n, p=args.p, seed=args.seed,
                   rows=args.rows, cols=args.cols)
    try:
        inst = instance(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(inst, ClosureMatrix):
        edges = transitive_reduction(inst).edges
        n = inst.n
    elif isinstance(inst, Digraph):
        edges = inst.edges
        n = inst.n
    else:  # relation matrix
        edges = tuple((int(a) + 1, int(b) + 1) for a, b in np.argwhere(inst))
        n = inst.shape[0]
    write_instance(args.out, n, edges, header=spec.header())
    log.info("wrote %s (%d vertices, %d edges)", args.out, n, len(edges))
    return EXIT_OK


def cmd_build(args):
    try:
        n, edges = read_instance(args.infile)
        oracle = build_oracle(n, edges, args.edges, args.mode)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotADagError, InvalidPosetError, ValueError) as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    blob = save(oracle, args.out)
    rep = space_report(oracle)
    rep["container_bytes"] = len(blob)
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        print(f"mode: {mode_of(oracle)}")
        print(f"elements: {oracle_n(oracle)}")
        print(f"structure bits: {rep['total_bits']:.0f}")
        print(f"container bytes: {len(blob)}")
        if "quarter_square_bits" in rep:
            print(f"n^2/4 bits: {rep['quarter_square_bits']:.0f}")
        if "triangular_bits" in rep:
            print(f"n(n-1)/2 bits: {rep['triangular_bits']:.0f}")
    return EXIT_OK


def _load_or_exit(path):
    try:
        return load(path), EXIT_OK
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_USAGE
    except ContainerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_CORRUPT


def cmd_query(args):
    oracle, rc = _load_or_exit(args.container)
    if oracle is None:
        return rc
    fn = query_fn(oracle)
    n = oracle_n(oracle)

    def emit(a, b):
        print("yes" if fn(a, b) else "no")

    try:
        if args.all:
            for a in range(1, n + 1):
                for b in range(1, n + 1):
                    emit(a, b)
        elif args.stdin:
            for line in sys.stdin:
                line = line.strip()
                if not line:
                    continue
                a, b = (int(tok) for tok in line.split())
                emit(a, b)
        else:
            if args.a is None or args.b is None:
                print("error: provide two elements, --all, or --stdin", file=sys.stderr)
                return EXIT_USAGE
            emit(args.a, args.b)
    except (IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_stats(args):
    oracle, rc = _load_or_exit(args.container)
    if oracle is None:
        return rc
    rep = space_report(oracle)
    rep["mode"] = mode_of(oracle)
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        def walk(d, indent=0):
            for k in sorted(d):
                v = d[k]
                if isinstance(v, dict):
                    print(" " * indent + f"{k}:")
                    walk(v, indent + 2)
                elif isinstance(v, float):
                    print(" " * indent + f"{k}: {v:.1f}")
                else:
                    print(" " * indent + f"{k}: {v}")
        walk(rep)
    return EXIT_OK


def cmd_verify(args):
    try:
        n, edges = read_instance(args.infile)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.edges == "closure":
            v = validate_poset(closure_from_pairs(n, edges))
            if not v:
                print(f"invalid: {v.describe()}")
                return EXIT_VALIDATION
        elif args.edges == "cover":
            transitive_closure(Digraph(n, tuple(edges)))
        elif args.edges == "digraph":
            Digraph(n, tuple(edges), allow_loops=True)
        else:
            rel = np.zeros((n, n), dtype=bool)
            for a, b in edges:
                rel[a - 1, b - 1] = True
            comp = np.zeros_like(rel)
            for k in range(n):
                comp |= np.outer(rel[:, k], rel[k, :])
            bad = comp & ~rel
            if bad.any():
                a, c = np.argwhere(bad)[0]
                print(f"invalid: transitivity violation ({int(a) + 1}, ?, {int(c) + 1})")
                return EXIT_VALIDATION
    except (NotADagError, InvalidPosetError) as exc:
        print(f"invalid: {exc}")
        return EXIT_VALIDATION
    except (ParseError, IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("ok")
    return EXIT_OK


def cmd_bench(args):
    oracle, rc = _load_or_exit(args.container)
    if oracle is None:
        return rc
    fn = query_fn(oracle)
    n = oracle_n(oracle)
    rng = SplitMix64(args.seed)
    pairs = []
    while len(pairs) < args.pairs:
        a = 1 + rng.next_u64() % n
        b = 1 + rng.next_u64() % n
        pairs.append((a, b))
    counts = []
    t0 = time.perf_counter()
    for a, b in pairs:
        opcount.reset()
        fn(a, b)
        counts.append(opcount.snapshot())
    elapsed = time.perf_counter() - t0
    rep = {
        "pairs": len(pairs),
        "ns_per_query": elapsed / len(pairs) * 1e9,
        "ops_mean": sum(counts) / len(counts),
        "ops_max": max(counts),
    }
    if args.json:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        print(f"pairs: {rep['pairs']}")
        print(f"ns/query: {rep['ns_per_query']:.0f}")
        print(f"primitive ops mean: {rep['ops_mean']:.2f} max: {rep['ops_max']}")
    return EXIT_OK


def cmd_report(args):
    from .report import run_report

    sizes = [int(tok) for tok in args.sizes.split(",") if tok]
    run_report(args.out_dir, kind=args.kind, sizes=sizes, seeds=args.seeds,
               base_seed=args.seed)
    print(f"report written to {args.out_dir}")
    return EXIT_OK


def make_parser():
    ap = argparse.ArgumentParser(
        prog="sposet",
        description="Succinct poset / reachability oracles: build, query, measure.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a deterministic instance file")
    g.add_argument("--kind", required=True,
                   choices=["chain", "antichain", "grid", "random_dag",
                            "random_layered", "random_digraph", "random_relation"])
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--rows", type=int, default=0)
    g.add_argument("--cols", type=int, default=0)
    g.add_argument("--p", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_gen)

    b = sub.add_parser("build", help="build an oracle container from an instance")
    b.add_argument("--in", dest="infile", required=True)
    b.add_argument("--edges", required=True,
                   choices=["cover", "closure", "relation", "digraph"])
    b.add_argument("--mode", required=True,
                   choices=["poset", "reduction", "digraph", "relation"])
    b.add_argument("--out", required=True)
    b.add_argument("--json", action="store_true")
    b.set_defaults(fn=cmd_build)

    q = sub.add_parser("query", help="answer queries from a container")
    q.add_argument("container")
    q.add_argument("a", nargs="?", type=int)
    q.add_argument("b", nargs="?", type=int)
    q.add_argument("--all", action="store_true",
                   help="stream all n^2 answers in row-major order")
    q.add_argument("--stdin", action="store_true",
                   help="read 'a b' pairs from standard input")
    q.set_defaults(fn=cmd_query)

    s = sub.add_parser("stats", help="space report for a container")
    s.add_argument("container")
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_stats)

    v = sub.add_parser("verify", help="check instance axioms without building")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--edges", default="closure",
                   choices=["cover", "closure", "relation", "digraph"])
    v.set_defaults(fn=cmd_verify)

    be = sub.add_parser("bench", help="time queries and count primitive ops")
    be.add_argument("container")
    be.add_argument("--pairs", type=int, default=10000)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--json", action="store_true")
    be.set_defaults(fn=cmd_bench)

    r = sub.add_parser("report", help="size sweep: CSV plus rendered figures")
    r.add_argument("--kind", default="random_layered",
                   choices=["random_layered", "random_dag"])
    r.add_argument("--sizes", default="128,256,512")
    r.add_argument("--seeds", type=int, default=3)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out-dir", default="reports")
    r.set_defaults(fn=cmd_report)
    return ap


def main(argv=None):
    level = os.environ.get("SPOSET_LOG", "").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = make_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

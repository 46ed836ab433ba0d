"""Command-line front end and benchmark harness."""

from __future__ import annotations

import argparse
import sys
import time

from . import bench as bench_mod
from .config import Params
from .errors import (KeywordUnknown, MalformedLine, NotFound, UnknownSubFilter,
                     VictimNotFound)
from .ingest import parse_names, parse_snap
from .system import GraphSearchSystem, mode_for

_NOT_FOUND_ERRORS = (NotFound, KeywordUnknown, VictimNotFound, UnknownSubFilter)


def _add_param_flags(p: argparse.ArgumentParser):
    p.add_argument("--fingerprint-bits", type=int, default=16)
    p.add_argument("--subfilter-capacity", type=int, default=10_000)
    p.add_argument("--bucket-size", type=int, default=4)
    p.add_argument("--variant", choices=["base", "g", "p", "a"], default="base")
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--cache-mb", type=int, default=128)
    p.add_argument("--hardened-pad", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def _params_from(args, mode: int = 0) -> Params:
    base = Params(fingerprint_bits=args.fingerprint_bits,
                  subfilter_capacity=args.subfilter_capacity,
                  bucket_size=args.bucket_size,
                  hardened_pad=args.hardened_pad,
                  mode=mode,
                  cache_bytes=args.cache_mb * 1024 * 1024,
                  threads=args.threads)
    return base.with_variant(args.variant)


def _print_result(result):
    for vid, weight in result.entries:
        print(f"{vid}\t{weight}")
    print(f"# {len(result.entries)} result(s)", file=sys.stderr)


def cmd_build(args) -> int:
    params = _params_from(args, mode_for(True, args.names is not None))
    system = GraphSearchSystem.create(params)
    start = time.perf_counter()
    count = 0
    for triple in parse_snap(args.dataset, args.edge_type, args.directed,
                             args.random_weights, args.seed):
        system.insert(triple.w, triple.id_in, triple.weight)
        count += 1
    if args.names:
        for record in parse_names(args.names):
            system.ingest_names([record], s=args.gram_length)
            count += 1
    elapsed = time.perf_counter() - start
    system.save(args.out, args.state)
    tset, itset, xset = system.server.store_sizes()
    print(f"inserted {count} update(s) in {elapsed:.2f}s "
          f"({count / elapsed:.0f}/s); |TSet|={tset} |ITSet|={itset} "
          f"sub-filters={xset}", file=sys.stderr)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _load(args) -> GraphSearchSystem:
    params = None
    if args.variant != "base" or args.hardened_pad:
        # variant/cache knobs may differ from what was stored
        import dataclasses
        from .edb import load_edb
        stored = load_edb(args.edb).params
        params = dataclasses.replace(
            stored, cache_bytes=args.cache_mb * 1024 * 1024,
            threads=args.threads).with_variant(args.variant)
    return GraphSearchSystem.load(args.edb, args.state, params)


def cmd_search(args) -> int:
    system = _load(args)
    result = system.search(args.keywords, top_k=args.topk)
    _print_result(result)
    return 0


def cmd_fuzzy(args) -> int:
    system = _load(args)
    result = system.fuzzy_search(args.pattern, s=args.gram_length,
                                 top_k=args.topk)
    _print_result(result)
    return 0


def cmd_insert(args) -> int:
    system = _load(args)
    system.insert(args.keyword, args.id, args.weight)
    system.save(args.edb, args.state)
    print("ok", file=sys.stderr)
    return 0


def cmd_delete(args) -> int:
    system = _load(args)
    system.delete(args.keyword, args.id)
    system.save(args.edb, args.state)
    print("ok", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    params = _params_from(args)
    if args.dataset:
        triples = list(parse_snap(args.dataset, args.edge_type, args.directed,
                                  args.random_weights, args.seed))
        dataset_name = args.dataset
    else:
        vertices, edges = (int(x) for x in args.synthetic.split(","))
        triples = bench_mod.random_graph(vertices, edges, seed=args.seed)
        dataset_name = f"synthetic-{vertices}v-{edges}e"
    n_values = range(args.n_min, args.n_max + 1)
    queries = []
    for n in n_values:
        queries.extend(bench_mod.random_queries(
            triples, args.queries, seed=args.seed + n, n_range=(n, n)))
    variants = args.variants.split(",")
    records = bench_mod.run_query_grid(triples, queries, variants, params,
                                       dataset_name)
    bench_mod.write_csv(args.out, records)
    print(bench_mod.summary_table(records))
    print(f"wrote {len(records)} record(s) to {args.out}", file=sys.stderr)
    if args.sweep:
        sizes = [int(s) for s in args.sweep.split(",")]
        sweep_records = bench_mod.sweep_subfilter_sizes(
            triples, queries[:args.queries], sizes, params, dataset_name)
        sweep_csv = args.out.rsplit(".", 1)[0] + "_sweep.csv"
        bench_mod.write_csv(sweep_csv, sweep_records,
                            header=["dataset", "subfilter_size",
                                    "total_search_ms", "subfilters"])
        print(f"wrote sweep to {sweep_csv}", file=sys.stderr)
    if args.figures:
        from . import plots
        written = plots.render_bench_figures(records, args.figures)
        if args.sweep:
            written.append(plots.render_sweep_figure(sweep_records, args.figures))
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secgraph",
        description="Encrypted dynamic graph search over a simulated "
                    "enclave boundary")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="ingest a dataset into a new EDB file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--names")
    p.add_argument("--edge-type", default="friendship")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--random-weights", action="store_true")
    p.add_argument("--gram-length", type=int, default=2)
    p.add_argument("--out", required=True)
    p.add_argument("--state", help="client state file (default: <out>.enclave)")
    _add_param_flags(p)
    p.set_defaults(func=cmd_build)

    for name, func in [("search", cmd_search), ("fuzzy", cmd_fuzzy),
                       ("insert", cmd_insert), ("delete", cmd_delete)]:
        p = sub.add_parser(name)
        p.add_argument("--edb", required=True)
        p.add_argument("--state")
        p.add_argument("--topk", type=int)
        _add_param_flags(p)
        if name == "search":
            p.add_argument("keywords", nargs="+")
        elif name == "fuzzy":
            p.add_argument("pattern")
            p.add_argument("--gram-length", type=int, default=2)
        else:
            p.add_argument("--keyword", required=True)
            p.add_argument("--id", type=int, required=True)
            if name == "insert":
                p.add_argument("--weight", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("bench", help="run the query grid and emit CSV metrics")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dataset")
    group.add_argument("--synthetic", metavar="V,E",
                       help="seeded random graph, e.g. 1000,10000")
    p.add_argument("--edge-type", default="friendship")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--random-weights", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--figures", help="directory for rendered figures")
    p.add_argument("--queries", type=int, default=20,
                   help="queries per keyword count")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--variants", default="base,g,p,a,oxt")
    p.add_argument("--sweep", metavar="SIZES",
                   help="comma-separated sub-filter capacities to sweep")
    _add_param_flags(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _NOT_FOUND_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MalformedLine as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

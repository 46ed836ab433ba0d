"""Benchmark harness: seeded workloads, plaintext oracle, CSV metrics."""

from __future__ import annotations

import csv
import random
import time

from .config import Params
from .ingest import EdgeTriple
from .oxt import OxtClient
from .system import GraphSearchSystem

CSV_HEADER = ["variant", "dataset", "n", "query", "wall_time_ms", "ocalls",
              "subfilters_loaded", "bytes_cached", "roundtrips",
              "result_size", "fp_count"]

VARIANTS = ["base", "g", "p", "a"]


def random_graph(num_vertices: int, num_edges: int, seed: int = 0,
                 edge_type: str = "friendship",
                 weight_range: tuple[int, int] = (1, 10)) -> list[EdgeTriple]:
    """Seeded directed multigraph-free edge sample as keyword triples."""
    rng = random.Random(seed)
    seen = set()
    triples = []
    while len(triples) < num_edges:
        u = rng.randrange(1, num_vertices + 1)
        v = rng.randrange(1, num_vertices + 1)
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        triples.append(EdgeTriple(f"{u}:{edge_type}", v,
                                  rng.randint(*weight_range)))
    return triples


class PlaintextOracle:
    """Brute-force posting lists for exact-result comparison."""

    def __init__(self):
        self.postings: dict[str, dict[int, int]] = {}

    def insert(self, w: str, vertex_id: int, weight: int):
        self.postings.setdefault(w, {})[vertex_id] = weight

    def delete(self, w: str, vertex_id: int):
        self.postings[w].pop(vertex_id)
        if not self.postings[w]:
            del self.postings[w]

    def search(self, keywords: list[str], top_k: int | None = None):
        if keywords[0] not in self.postings:
            return []
        base = self.postings[keywords[0]]
        ids = set(base)
        for w in keywords[1:]:
            ids &= set(self.postings.get(w, {}))
        entries = sorted(((vid, base[vid]) for vid in ids),
                         key=lambda e: (-e[1], e[0]))
        return entries[:top_k] if top_k is not None else entries

    def substring_search(self, names: dict[int, str], pattern: str) -> set[int]:
        folded = pattern.lower()
        return {vid for vid, name in names.items() if folded in name.lower()}


def random_queries(triples: list[EdgeTriple], count: int, seed: int = 1,
                   n_range: tuple[int, int] = (2, 5)) -> list[list[str]]:
    """Conjunctive queries whose first keyword is guaranteed non-empty."""
    rng = random.Random(seed)
    keywords = sorted({t.w for t in triples})
    queries = []
    for _ in range(count):
        n = rng.randint(*n_range)
        queries.append(rng.sample(keywords, n))
    return queries


def build_system(triples: list[EdgeTriple], params: Params) -> GraphSearchSystem:
    system = GraphSearchSystem.create(params)
    system.ingest_edges(triples)
    return system


def run_query_grid(triples: list[EdgeTriple], queries: list[list[str]],
                   variants: list[str], params: Params,
                   dataset_name: str = "synthetic",
                   oracle: PlaintextOracle | None = None) -> list[dict]:
    """One record per (variant, query) over pre-built per-variant systems."""
    if oracle is None:
        oracle = PlaintextOracle()
        for t in triples:
            oracle.insert(t.w, t.id_in, t.weight)
    records = []
    for variant in variants:
        if variant == "oxt":
            records.extend(_run_oxt(triples, queries, dataset_name, oracle))
            continue
        system = build_system(triples, params.with_variant(variant))
        for qi, keywords in enumerate(queries):
            start = time.perf_counter()
            result = system.search(keywords)
            elapsed = (time.perf_counter() - start) * 1000
            stats = system.boundary.current
            expected = {vid for vid, _ in oracle.search(keywords)}
            got = result.id_set()
            records.append({
                "variant": variant, "dataset": dataset_name,
                "n": len(keywords), "query": qi,
                "wall_time_ms": round(elapsed, 3),
                "ocalls": stats.ocalls,
                "subfilters_loaded": stats.subfilters_loaded,
                "bytes_cached": system.enclave.cache.bytes_used,
                "roundtrips": stats.token_roundtrips,
                "result_size": len(result.entries),
                "fp_count": len(got - expected),
            })
    return records


def _run_oxt(triples, queries, dataset_name, oracle) -> list[dict]:
    corpus: dict[str, list[tuple[int, int]]] = {}
    for t in triples:
        corpus.setdefault(t.w, []).append((t.id_in, t.weight))
    client = OxtClient()
    client.build(corpus)
    records = []
    for qi, keywords in enumerate(queries):
        start = time.perf_counter()
        entries = client.search(keywords)
        elapsed = (time.perf_counter() - start) * 1000
        expected = {vid for vid, _ in oracle.search(keywords)}
        got = {vid for vid, _ in entries}
        records.append({
            "variant": "oxt", "dataset": dataset_name,
            "n": len(keywords), "query": qi,
            "wall_time_ms": round(elapsed, 3),
            "ocalls": 0, "subfilters_loaded": 0, "bytes_cached": 0,
            "roundtrips": client.last_roundtrips,
            "result_size": len(entries),
            "fp_count": len(got - expected),
        })
    return records


def sweep_subfilter_sizes(triples: list[EdgeTriple], queries: list[list[str]],
                          sizes: list[int], params: Params,
                          dataset_name: str = "synthetic") -> list[dict]:
    """Search-time sweep over sub-filter capacities."""
    records = []
    for size in sizes:
        sized = Params(fingerprint_bits=params.fingerprint_bits,
                       subfilter_capacity=size,
                       bucket_size=params.bucket_size,
                       hardened_pad=params.hardened_pad)
        system = build_system(triples, sized)
        start = time.perf_counter()
        for keywords in queries:
            system.search(keywords)
        elapsed = (time.perf_counter() - start) * 1000
        records.append({"dataset": dataset_name, "subfilter_size": size,
                        "total_search_ms": round(elapsed, 3),
                        "subfilters": len(system.server.xset)})
    return records


def write_csv(path: str, records: list[dict], header: list[str] | None = None):
    header = header or CSV_HEADER
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(records)


def summary_table(records: list[dict]) -> str:
    """Plain-text mean wall time and loads per (variant, n)."""
    groups: dict[tuple, list[dict]] = {}
    for r in records:
        groups.setdefault((r["variant"], r["n"]), []).append(r)
    lines = [f"{'variant':<8}{'n':>3}{'mean_ms':>10}{'mean_loads':>12}"
             f"{'roundtrips':>12}"]
    for (variant, n), rows in sorted(groups.items()):
        mean_ms = sum(r["wall_time_ms"] for r in rows) / len(rows)
        mean_loads = sum(r["subfilters_loaded"] for r in rows) / len(rows)
        rts = rows[0]["roundtrips"]
        lines.append(f"{variant:<8}{n:>3}{mean_ms:>10.2f}{mean_loads:>12.2f}"
                     f"{rts:>12}")
    return "\n".join(lines)

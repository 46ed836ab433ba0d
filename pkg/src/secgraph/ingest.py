"""Dataset parsing and keyword extraction.

Edge lists in the SNAP plain-text format become (keyword, neighbor id,
weight) triples with keyword "id_out:type"; vertex names become
fixed-length positional sub-strings for the fuzzy index.  Names are folded
to lowercase at ingestion and queries are folded the same way.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator

from .errors import MalformedLine, NameTooShort, PatternTooShort

START_SENTINEL = "#"
END_SENTINEL = "$"


@dataclass(frozen=True)
class EdgeTriple:
    w: str
    id_in: int
    weight: int


@dataclass(frozen=True)
class NameRecord:
    id: int
    name: str


@dataclass(frozen=True)
class SGram:
    sub: str
    pos: int  # 1-based


def parse_snap(path: str, edge_type: str = "friendship", directed: bool = False,
               random_weights: bool = False, seed: int = 0,
               weight_range: tuple[int, int] = (1, 10)) -> Iterator[EdgeTriple]:
    """Stream edge triples from a SNAP edge list.

    Lines are whitespace-separated integer pairs with an optional third
    integer weight column; '#' lines are comments.  Undirected inputs emit
    both directions of every edge.
    """
    rng = random.Random(seed)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise MalformedLine(f"{path}:{lineno}: expected 2 or 3 columns")
            try:
                u, v = int(parts[0]), int(parts[1])
                weight = int(parts[2]) if len(parts) == 3 else None
            except ValueError:
                raise MalformedLine(
                    f"{path}:{lineno}: non-integer field") from None
            if weight is None:
                weight = rng.randint(*weight_range) if random_weights else 1
            yield EdgeTriple(f"{u}:{edge_type}", v, weight)
            if not directed:
                yield EdgeTriple(f"{v}:{edge_type}", u, weight)


def parse_names(path: str) -> Iterator[NameRecord]:
    """One "id<TAB>name" record per line, UTF-8."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                raw_id, name = line.split("\t", 1)
                yield NameRecord(int(raw_id), name)
            except ValueError:
                raise MalformedLine(f"{path}:{lineno}: bad name record") from None


def split_name(name: str, s: int) -> list[SGram]:
    """Sentinel-delimited length-s windows of the folded name, 1-based."""
    if s < 2:
        raise ValueError("sub-string length must be at least 2")
    folded = name.lower()
    if not folded or len(folded) + 2 < s:
        raise NameTooShort(f"name too short for {s}-grams")
    decorated = START_SENTINEL + folded + END_SENTINEL
    return [SGram(decorated[i:i + s], i + 1)
            for i in range(len(decorated) - s + 1)]


def query_grams(pattern: str, s: int) -> tuple[str, list[tuple[str, int]]]:
    """Anchor gram and (sub-string, relative offset) companions for a
    sub-string pattern.  Patterns get no sentinels: a pattern is a
    substring of a name, not a whole name."""
    folded = pattern.lower()
    if len(folded) < s:
        raise PatternTooShort(f"pattern shorter than {s}")
    windows = [folded[i:i + s] for i in range(len(folded) - s + 1)]
    anchor = windows[0]
    companions = [(sub, i) for i, sub in enumerate(windows) if i > 0]
    return anchor, companions

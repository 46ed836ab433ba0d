"""Plaintext client-side query and result types."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class SearchQuery:
    """A conjunctive query.

    Exact mode: `keywords` is the conjunction, least-frequent first.
    Fuzzy mode: `offsets` holds the relative position of each keyword after
    the first (one entry per companion sub-string).
    """

    keywords: list[str]
    offsets: list[int] | None = None
    top_k: int | None = None

    def __post_init__(self):
        if not self.keywords:
            raise ValueError("a query needs at least one keyword")
        if self.offsets is not None and len(self.offsets) != len(self.keywords) - 1:
            raise ValueError("one offset per companion sub-string required")

    @property
    def fuzzy(self) -> bool:
        return self.offsets is not None


@dataclass
class RankedResult:
    """Search output: (id, weight) pairs, weight-descending, id-ascending ties."""

    entries: list[tuple[int, int]] = field(default_factory=list)

    def ids(self) -> list[int]:
        return [vid for vid, _ in self.entries]

    def id_set(self) -> set[int]:
        return {vid for vid, _ in self.entries}

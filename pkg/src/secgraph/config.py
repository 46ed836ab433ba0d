"""Scheme parameters shared by the trusted and untrusted components."""

from __future__ import annotations

from dataclasses import dataclass, replace

MODE_EXACT = 0
MODE_FUZZY = 1
MODE_MIXED = 2

_FLAG_GROUPING = 0x01
_FLAG_PARALLEL = 0x02
_FLAG_HARDENED_PAD = 0x04


@dataclass(frozen=True)
class Params:
    fingerprint_bits: int = 16
    subfilter_capacity: int = 10_000
    bucket_size: int = 4
    grouping: bool = False
    parallel: bool = False
    group_bits: int = 8
    hardened_pad: bool = False
    mode: int = MODE_EXACT
    cache_bytes: int = 128 * 1024 * 1024
    threads: int = 4

    def __post_init__(self):
        if self.grouping and not 0 < self.group_bits < self.fingerprint_bits:
            raise ValueError("group_bits must lie strictly between 0 and the "
                             "fingerprint width")

    def with_variant(self, variant: str) -> "Params":
        """Apply one of the named variants: base, g, p, or a."""
        variant = variant.lower()
        if variant == "base":
            return replace(self, grouping=False, parallel=False)
        if variant == "g":
            return replace(self, grouping=True, parallel=False)
        if variant == "p":
            return replace(self, grouping=False, parallel=True)
        if variant == "a":
            return replace(self, grouping=True, parallel=True)
        raise ValueError(f"unknown variant '{variant}'")

    def flags_byte(self) -> int:
        flags = 0
        if self.grouping:
            flags |= _FLAG_GROUPING
        if self.parallel:
            flags |= _FLAG_PARALLEL
        if self.hardened_pad:
            flags |= _FLAG_HARDENED_PAD
        return flags

    @classmethod
    def from_wire(cls, mode: int, fingerprint_bits: int, capacity: int,
                  bucket_size: int, flags: int, group_bits: int) -> "Params":
        return cls(fingerprint_bits=fingerprint_bits,
                   subfilter_capacity=capacity,
                   bucket_size=bucket_size,
                   grouping=bool(flags & _FLAG_GROUPING),
                   parallel=bool(flags & _FLAG_PARALLEL),
                   group_bits=group_bits,
                   hardened_pad=bool(flags & _FLAG_HARDENED_PAD),
                   mode=mode)

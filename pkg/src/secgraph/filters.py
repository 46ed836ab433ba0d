"""Cuckoo filter and its logarithmic-dynamic extension.

A SubFilter is one fixed-capacity cuckoo filter holding fingerprint
suffixes: the leading `level` bits of every fingerprint it stores are
implied by its position in the split trie and are not stored.  The
IndexTree is the binary trie of split decisions; its leaves form a
prefix-free cover of the fingerprint space, so every fingerprint routes to
exactly one sub-filter.

Fingerprints are odd by construction (see crypto.hash_h2), which keeps
every stored suffix non-zero; zero is the empty-slot sentinel.
"""

from __future__ import annotations

import enum
import struct

from .crypto import hash_h1
from .errors import MalformedRecord, MaxDepthReached, PrefixMismatch

MAX_KICKS = 500
SPLIT_OCCUPANCY = 0.95

_MAGIC = b"SGXF"
_VERSION = 1


def fingerprint_bytes(delta: int, bits: int) -> bytes:
    """Canonical big-endian encoding of a fingerprint value."""
    return delta.to_bytes((bits + 7) // 8, "big")


def fingerprint_prefix(delta: int, bits: int, length: int) -> str:
    """The top `length` bits of delta as a '0'/'1' string, MSB first."""
    return format(delta, f"0{bits}b")[:length]


def bucket_count_for(capacity: int, bucket_size: int) -> int:
    """Nearest power of two to capacity / bucket_size (ties round up)."""
    target = max(1, capacity // bucket_size)
    m = 1
    while m < target:
        m *= 2
    if m > 1 and (m - target) > (target - m // 2):
        m //= 2
    return m


class InsertOutcome(enum.Enum):
    STORED = "stored"
    NEEDS_SPLIT = "needs-split"


class SubFilter:
    """One cuckoo filter leaf: m buckets of b slots of fingerprint suffixes."""

    def __init__(self, fingerprint_bits: int, capacity: int, bucket_size: int,
                 prefix: str = ""):
        self.bits = fingerprint_bits
        self.b = bucket_size
        self.m = bucket_count_for(capacity, bucket_size)
        self.prefix = prefix
        self.slots = [0] * (self.m * self.b)
        self.count = 0
        self._nominal_capacity = capacity

    @property
    def level(self) -> int:
        return len(self.prefix)

    @property
    def capacity(self) -> int:
        return self.m * self.b

    @property
    def suffix_bits(self) -> int:
        return self.bits - self.level

    def _check_prefix(self, delta: int):
        if fingerprint_prefix(delta, self.bits, self.level) != self.prefix:
            raise PrefixMismatch(
                f"fingerprint {delta:#x} does not carry prefix '{self.prefix}'")

    def _suffix(self, delta: int) -> int:
        return delta & ((1 << self.suffix_bits) - 1)

    def _reconstruct(self, suffix: int) -> int:
        if self.level == 0:
            return suffix
        return (int(self.prefix, 2) << self.suffix_bits) | suffix

    def _alt(self, bucket: int, suffix: int) -> int:
        delta = self._reconstruct(suffix)
        return bucket ^ (hash_h1(fingerprint_bytes(delta, self.bits)) % self.m)

    def _bucket_slots(self, bucket: int):
        base = bucket * self.b
        return range(base, base + self.b)

    def _free_slot(self, bucket: int) -> int | None:
        for i in self._bucket_slots(bucket):
            if self.slots[i] == 0:
                return i
        return None

    def insert(self, delta: int, mu0: int) -> InsertOutcome:
        self._check_prefix(delta)
        if self.count >= SPLIT_OCCUPANCY * self.capacity:
            return InsertOutcome.NEEDS_SPLIT
        suffix = self._suffix(delta)
        mu = mu0 % self.m
        nu = self._alt(mu, suffix)
        for bucket in (mu, nu):
            slot = self._free_slot(bucket)
            if slot is not None:
                self.slots[slot] = suffix
                self.count += 1
                return InsertOutcome.STORED
        # Cuckoo eviction; the swap trail is recorded so a failed run can be
        # rolled back without corrupting the filter.
        cur = nu
        item = suffix
        trail = []
        for kick in range(MAX_KICKS):
            victim_slot = cur * self.b + (kick % self.b)
            trail.append((victim_slot, self.slots[victim_slot]))
            self.slots[victim_slot], item = item, self.slots[victim_slot]
            cur = self._alt(cur, item)
            slot = self._free_slot(cur)
            if slot is not None:
                self.slots[slot] = item
                self.count += 1
                return InsertOutcome.STORED
        for slot, value in reversed(trail):
            self.slots[slot] = value
        return InsertOutcome.NEEDS_SPLIT

    def check(self, delta: int, mu0: int) -> bool:
        self._check_prefix(delta)
        suffix = self._suffix(delta)
        mu = mu0 % self.m
        nu = self._alt(mu, suffix)
        for i in self._bucket_slots(mu):
            if self.slots[i] == suffix:
                return True
        if nu != mu:
            for i in self._bucket_slots(nu):
                if self.slots[i] == suffix:
                    return True
        return False

    def delete(self, delta: int, mu0: int) -> bool:
        self._check_prefix(delta)
        suffix = self._suffix(delta)
        mu = mu0 % self.m
        nu = self._alt(mu, suffix)
        buckets = (mu,) if nu == mu else (mu, nu)
        for bucket in buckets:
            for i in self._bucket_slots(bucket):
                if self.slots[i] == suffix:
                    self.slots[i] = 0
                    self.count -= 1
                    return True
        return False

    def split(self) -> tuple["SubFilter", "SubFilter"]:
        """Divide into two children, distributing suffixes by their top bit.

        Slot positions are preserved, so bucket reachability is unchanged:
        the candidate buckets of an entry depend only on the reconstructed
        fingerprint, which survives the prefix extension.
        """
        if self.level >= self.bits - 1:
            raise MaxDepthReached(
                f"sub-filter '{self.prefix}' is at the deepest level for "
                f"{self.bits}-bit fingerprints; raise the fingerprint width")
        left = SubFilter(self.bits, self._nominal_capacity, self.b, self.prefix + "0")
        right = SubFilter(self.bits, self._nominal_capacity, self.b, self.prefix + "1")
        top = 1 << (self.suffix_bits - 1)
        for i, suffix in enumerate(self.slots):
            if suffix == 0:
                continue
            child = right if suffix & top else left
            child.slots[i] = suffix & (top - 1)
            child.count += 1
        return left, right

    # --- at-rest record -------------------------------------------------

    def serialize(self) -> bytes:
        prefix_bytes = b""
        if self.level:
            padded = self.prefix.ljust((self.level + 7) // 8 * 8, "0")
            prefix_bytes = int(padded, 2).to_bytes(len(padded) // 8, "big")
        header = _MAGIC + struct.pack(
            ">BBB", _VERSION, self.bits, self.level) + prefix_bytes
        header += struct.pack(">IBI", self.m, self.b, self.count)
        width = (self.suffix_bits + 7) // 8
        body = b"".join(s.to_bytes(width, "big") for s in self.slots)
        return header + body

    @classmethod
    def deserialize(cls, data: bytes) -> "SubFilter":
        try:
            if data[:4] != _MAGIC:
                raise MalformedRecord("bad magic")
            version, bits, level = struct.unpack(">BBB", data[4:7])
            if version != _VERSION:
                raise MalformedRecord(f"unsupported record version {version}")
            offset = 7
            prefix = ""
            if level:
                nbytes = (level + 7) // 8
                raw = int.from_bytes(data[offset:offset + nbytes], "big")
                prefix = format(raw, f"0{nbytes * 8}b")[:level]
                offset += nbytes
            m, b, count = struct.unpack(">IBI", data[offset:offset + 9])
            offset += 9
            f = cls.__new__(cls)
            f.bits = bits
            f.b = b
            f.m = m
            f.prefix = prefix
            f.count = count
            f._nominal_capacity = m * b
            width = (bits - level + 7) // 8
            expected = m * b * width
            body = data[offset:offset + expected]
            if len(body) != expected:
                raise MalformedRecord("truncated slot area")
            f.slots = [int.from_bytes(body[i:i + width], "big")
                       for i in range(0, expected, width)]
            if sum(1 for s in f.slots if s) != count:
                raise MalformedRecord("count does not match occupied slots")
            return f
        except (struct.error, IndexError) as exc:
            raise MalformedRecord(str(exc)) from exc

    def __eq__(self, other):
        return (isinstance(other, SubFilter)
                and self.bits == other.bits and self.b == other.b
                and self.m == other.m and self.prefix == other.prefix
                and self.slots == other.slots)


class IndexTree:
    """Binary split trie; leaves identify sub-filters by their prefix."""

    def __init__(self, fingerprint_bits: int):
        self.bits = fingerprint_bits
        self.leaves: set[str] = {""}
        self.version = 0

    def locate(self, delta: int) -> str:
        path = format(delta, f"0{self.bits}b")
        prefix = ""
        for bit in path:
            if prefix in self.leaves:
                return prefix
            prefix += bit
        if prefix in self.leaves:
            return prefix
        raise KeyError(f"no leaf covers fingerprint {delta:#x}")

    def apply_split(self, prefix: str):
        if prefix not in self.leaves:
            raise KeyError(f"'{prefix}' is not a leaf")
        self.leaves.remove(prefix)
        self.leaves.add(prefix + "0")
        self.leaves.add(prefix + "1")
        self.version += 1

    def replace(self, leaves: set[str], version: int):
        self.leaves = set(leaves)
        self.version = version

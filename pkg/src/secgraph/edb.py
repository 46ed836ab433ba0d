"""The untrusted server's encrypted database.

Three stores: TSet (stag -> encrypted posting entry), ITSet (ind ->
encrypted counter locator), and XSet (sub-filter id -> cuckoo sub-filter).
The server only ever sees PRF outputs, ciphertexts, fingerprints, and
structural ids; it applies updates mechanically and answers lookups.
"""

from __future__ import annotations

import struct

from .config import Params
from .errors import DuplicateStag, MalformedRecord, NotFound, UnknownSubFilter
from .filters import InsertOutcome, SubFilter, fingerprint_prefix

_MAGIC = b"SGDB"
_FORMAT_VERSION = 1


class EdbServer:
    """Holds the three encrypted stores and the server half of the protocols."""

    def __init__(self, params: Params):
        self.params = params
        self.tset: dict[bytes, bytes] = {}
        self.itset: dict[bytes, bytes] = {}
        self.xset: dict[str, SubFilter] = {
            "": SubFilter(params.fingerprint_bits, params.subfilter_capacity,
                          params.bucket_size)
        }

    # --- lookups --------------------------------------------------------

    def tset_get(self, stag: bytes) -> bytes | None:
        return self.tset.get(stag)

    def itset_get(self, ind: bytes) -> bytes | None:
        return self.itset.get(ind)

    def tset_batch_get(self, stoken_list: list[bytes]) -> list[bytes | None]:
        return [self.tset.get(stag) for stag in stoken_list]

    def load_subfilter(self, sub_filter_id: str) -> bytes:
        try:
            return self.xset[sub_filter_id].serialize()
        except KeyError:
            raise UnknownSubFilter(f"no sub-filter '{sub_filter_id}'") from None

    # --- update protocol, server side -----------------------------------

    def apply_insert(self, sub_filter_id: str, stag: bytes, c_id: bytes,
                     ind: bytes, c_stag: bytes, delta: int, mu: int) -> list[str]:
        """Apply one insert; returns the prefixes split along the way."""
        if stag in self.tset:
            raise DuplicateStag("stag already present; store corrupted")
        self.tset[stag] = c_id
        self.itset[ind] = c_stag
        return self._filter_insert(sub_filter_id, delta, mu)

    def _filter_insert(self, prefix: str, delta: int, mu: int) -> list[str]:
        bits = self.params.fingerprint_bits
        splits = []
        while True:
            f = self.xset[prefix]
            if f.insert(delta, mu) is InsertOutcome.STORED:
                return splits
            left, right = f.split()
            del self.xset[prefix]
            self.xset[left.prefix] = left
            self.xset[right.prefix] = right
            splits.append(prefix)
            prefix = fingerprint_prefix(delta, bits, len(prefix) + 1)

    def apply_delete(self, sub_filter_id: str, stag: bytes, stag_prev: bytes,
                     ind: bytes, ind_prev: bytes, delta: int, mu: int,
                     replacement_c_id: bytes | None = None) -> bool:
        """Swap-last deletion; returns whether the fingerprint was found."""
        if stag_prev not in self.tset or ind not in self.itset:
            raise NotFound("delete references entries the store does not hold")
        if stag == stag_prev:
            # deleting the latest entry for the keyword
            del self.tset[stag]
            del self.itset[ind]
        else:
            self.tset[stag] = (replacement_c_id if replacement_c_id is not None
                               else self.tset[stag_prev])
            del self.tset[stag_prev]
            self.itset[ind_prev] = self.itset[ind]
            del self.itset[ind]
        if sub_filter_id not in self.xset:
            raise UnknownSubFilter(f"no sub-filter '{sub_filter_id}'")
        return self.xset[sub_filter_id].delete(delta, mu)

    def store_sizes(self) -> tuple[int, int, int]:
        return len(self.tset), len(self.itset), len(self.xset)


# --- EDB file format ---------------------------------------------------------

def _pack_kv_section(store: dict[bytes, bytes]) -> bytes:
    body = b"".join(
        key + len(value).to_bytes(2, "big") + value
        for key, value in sorted(store.items()))
    return len(body).to_bytes(8, "big") + body


def _unpack_kv_section(data: bytes, offset: int) -> tuple[dict[bytes, bytes], int]:
    length = int.from_bytes(data[offset:offset + 8], "big")
    offset += 8
    end = offset + length
    store = {}
    while offset < end:
        key = data[offset:offset + 32]
        vlen = int.from_bytes(data[offset + 32:offset + 34], "big")
        value = data[offset + 34:offset + 34 + vlen]
        if len(key) != 32 or len(value) != vlen:
            raise MalformedRecord("truncated key-value record")
        store[key] = value
        offset += 34 + vlen
    return store, end


def save_edb(path: str, server: EdbServer):
    p = server.params
    header = _MAGIC + struct.pack(
        ">HBBIBBB", _FORMAT_VERSION, p.mode, p.fingerprint_bits,
        p.subfilter_capacity, p.bucket_size, p.flags_byte(), p.group_bits)
    xbody = b""
    for prefix in sorted(server.xset):
        record = server.xset[prefix].serialize()
        prefix_bytes = b""
        if prefix:
            padded = prefix.ljust((len(prefix) + 7) // 8 * 8, "0")
            prefix_bytes = int(padded, 2).to_bytes(len(padded) // 8, "big")
        xbody += bytes([len(prefix)]) + prefix_bytes + record
    blob = (header
            + _pack_kv_section(server.tset)
            + _pack_kv_section(server.itset)
            + len(xbody).to_bytes(8, "big") + xbody)
    with open(path, "wb") as fh:
        fh.write(blob)


def load_edb(path: str) -> EdbServer:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise MalformedRecord("not an EDB file")
    version, mode, bits, capacity, b, flags, g = struct.unpack(
        ">HBBIBBB", data[4:15])
    if version != _FORMAT_VERSION:
        raise MalformedRecord(f"unsupported EDB version {version}")
    params = Params.from_wire(mode, bits, capacity, b, flags, g)
    server = EdbServer(params)
    offset = 15
    server.tset, offset = _unpack_kv_section(data, offset)
    server.itset, offset = _unpack_kv_section(data, offset)
    xlen = int.from_bytes(data[offset:offset + 8], "big")
    offset += 8
    end = offset + xlen
    server.xset = {}
    while offset < end:
        plen = data[offset]
        offset += 1
        prefix = ""
        if plen:
            nbytes = (plen + 7) // 8
            raw = int.from_bytes(data[offset:offset + nbytes], "big")
            prefix = format(raw, f"0{nbytes * 8}b")[:plen]
            offset += nbytes
        f = SubFilter.deserialize(data[offset:])
        record_len = len(f.serialize())
        offset += record_len
        server.xset[prefix] = f
    if offset != end:
        raise MalformedRecord("XSet section length mismatch")
    return server

"""The simulated trusted/untrusted boundary.

Every message between client, enclave, and server passes through one
Boundary object, which serializes traffic, appends an observable-leakage
record for each message, and keeps per-operation roundtrip counters.
Client-to-enclave payloads travel sealed under a channel key established
during the setup handshake, so the log never holds plaintext keywords,
identifiers, or key material.
"""

from __future__ import annotations

import secrets
import struct
from dataclasses import dataclass, field

from .crypto import xor_pad
from .errors import MalformedMessage, NotEstablished

OP_INSERT = 0
OP_DELETE = 1


# --- ecall messages (client or server -> enclave) ---------------------------

@dataclass
class SetupEcall:
    sealed: bytes
    nonce: bytes  # reserved for a real attestation handshake


@dataclass
class UpdateEcall:
    sealed: bytes


@dataclass
class SearchEcall:
    sealed: bytes


@dataclass
class IndexTreeSync:
    split_paths: list[str]


# --- ocall messages (enclave -> server) --------------------------------------

@dataclass
class TSetGet:
    stag: bytes


@dataclass
class ITSetGet:
    ind: bytes


@dataclass
class TSetBatchGet:
    stoken_list: list[bytes]


@dataclass
class LoadSubFilter:
    sub_filter_id: str


@dataclass
class ApplyInsert:
    sub_filter_id: str
    stag: bytes
    c_id: bytes
    ind: bytes
    c_stag: bytes
    delta: int
    mu: int


@dataclass
class ApplyDelete:
    sub_filter_id: str
    stag: bytes
    stag_prev: bytes
    ind: bytes
    ind_prev: bytes
    delta: int
    mu: int
    replacement_c_id: bytes | None = None


_ECALLS = (SetupEcall, UpdateEcall, SearchEcall, IndexTreeSync)
_OCALLS = (TSetGet, ITSetGet, TSetBatchGet, LoadSubFilter, ApplyInsert, ApplyDelete)


class Channel:
    """Secure-channel simulation: an XOR-pad seal under a shared key."""

    def __init__(self, key: bytes):
        self._key = key
        self._counter = 0

    def seal(self, payload: bytes) -> bytes:
        ctr = self._counter.to_bytes(8, "big")
        self._counter += 1
        return ctr + xor_pad(self._key, ctr, payload)

    def unseal(self, blob: bytes) -> bytes:
        ctr, body = blob[:8], blob[8:]
        return xor_pad(self._key, ctr, body)


@dataclass
class LogRecord:
    seq: int
    op_index: int
    op_kind: str
    msg_kind: str
    fields: dict

    def flat_bytes(self) -> bytes:
        """All byte-valued content of the record, for canary scans."""
        out = [self.op_kind.encode(), self.msg_kind.encode()]
        for value in self.fields.values():
            out.append(_flatten(value))
        return b"|".join(out)


def _flatten(value) -> bytes:
    if isinstance(value, bytes):
        return value
    if isinstance(value, (list, tuple)):
        return b",".join(_flatten(v) for v in value)
    if value is None:
        return b""
    return str(value).encode()


class LeakageLog:
    """Append-only record of every boundary message, replayable."""

    def __init__(self):
        self.records: list[LogRecord] = []
        self._seq = 0

    def append(self, op_index: int, op_kind: str, msg_kind: str, fields: dict):
        self.records.append(LogRecord(self._seq, op_index, op_kind, msg_kind, fields))
        self._seq += 1

    def scan(self, needle: bytes) -> list[LogRecord]:
        return [r for r in self.records if needle in r.flat_bytes()]

    def for_op(self, op_index: int) -> list[LogRecord]:
        return [r for r in self.records if r.op_index == op_index]


@dataclass
class OpStats:
    kind: str
    token_roundtrips: int = 0
    ocalls: int = 0
    subfilters_loaded: int = 0
    tokens: dict = field(default_factory=dict)


class Boundary:
    """Routes boundary messages, logging and counting each one."""

    def __init__(self, server):
        self.server = server
        self.enclave = None
        self.log = LeakageLog()
        self.ops: list[OpStats] = []
        self.current: OpStats | None = None
        self.established = False
        self._channel_key: bytes | None = None

    def attach_enclave(self, enclave):
        self.enclave = enclave

    # --- setup handshake -------------------------------------------------

    def handshake(self) -> Channel:
        """Simulated attestation: provisions a shared channel key and hands
        the client its end of the channel."""
        self._channel_key = secrets.token_bytes(32)
        self.enclave.provision_channel(Channel(self._channel_key))
        return Channel(self._channel_key)

    # --- operation bookkeeping -------------------------------------------

    def begin_operation(self, kind: str) -> int:
        self.current = OpStats(kind)
        self.ops.append(self.current)
        return len(self.ops) - 1

    @property
    def op_index(self) -> int:
        return len(self.ops) - 1

    # --- transport -------------------------------------------------------

    def call(self, msg):
        if isinstance(msg, _ECALLS):
            return self._ecall(msg)
        if isinstance(msg, _OCALLS):
            return self._ocall(msg)
        raise MalformedMessage(f"unknown message type {type(msg).__name__}")

    def _log(self, msg_kind: str, fields: dict):
        op_kind = self.current.kind if self.current else "-"
        self.log.append(self.op_index, op_kind, msg_kind, fields)

    def _ecall(self, msg):
        if isinstance(msg, SetupEcall):
            self._log("SetupEcall", {"sealed": msg.sealed, "nonce": msg.nonce})
            response = self.enclave.on_setup(msg.sealed)
            self.established = True
            return response
        if not self.established:
            raise NotEstablished("setup handshake has not completed")
        if isinstance(msg, UpdateEcall):
            self._log("UpdateEcall", {"sealed": msg.sealed})
            response = self.enclave.on_update(msg.sealed)
            self._log("UpdateResponse", {"sealed": response})
            return response
        if isinstance(msg, SearchEcall):
            self._log("SearchEcall", {"sealed": msg.sealed})
            self.current.token_roundtrips += 1
            response = self.enclave.on_search(msg.sealed)
            self._log("SearchResponse", {"sealed": response})
            return response
        if isinstance(msg, IndexTreeSync):
            self._log("IndexTreeSync", {"split_paths": msg.split_paths})
            return self.enclave.on_index_tree_sync(msg.split_paths)
        raise MalformedMessage(f"unroutable ecall {type(msg).__name__}")

    def _ocall(self, msg):
        if not self.established:
            raise NotEstablished("setup handshake has not completed")
        self.current.ocalls += 1
        if isinstance(msg, TSetGet):
            value = self.server.tset_get(msg.stag)
            self._log("TSetGet", {"stag": msg.stag, "value": value})
            return value
        if isinstance(msg, ITSetGet):
            value = self.server.itset_get(msg.ind)
            self._log("ITSetGet", {"ind": msg.ind, "value": value})
            return value
        if isinstance(msg, TSetBatchGet):
            values = self.server.tset_batch_get(msg.stoken_list)
            self._log("TSetBatchGet",
                      {"stoken_list": list(msg.stoken_list), "values": values})
            self.current.tokens["stoken_list"] = list(msg.stoken_list)
            return values
        if isinstance(msg, LoadSubFilter):
            record = self.server.load_subfilter(msg.sub_filter_id)
            self._log("LoadSubFilter",
                      {"sub_filter_id": msg.sub_filter_id, "bytes": len(record)})
            self.current.subfilters_loaded += 1
            self.current.tokens.setdefault("subfilter_ids", []).append(
                msg.sub_filter_id)
            return record
        if isinstance(msg, ApplyInsert):
            splits = self.server.apply_insert(
                msg.sub_filter_id, msg.stag, msg.c_id, msg.ind, msg.c_stag,
                msg.delta, msg.mu)
            self._log("ApplyInsert", {
                "sub_filter_id": msg.sub_filter_id, "stag": msg.stag,
                "c_id": msg.c_id, "ind": msg.ind, "c_stag": msg.c_stag,
                "delta": msg.delta, "mu": msg.mu})
            if splits:
                # server-initiated ecall propagating the split state
                self.call(IndexTreeSync(split_paths=splits))
            return splits
        if isinstance(msg, ApplyDelete):
            found = self.server.apply_delete(
                msg.sub_filter_id, msg.stag, msg.stag_prev, msg.ind,
                msg.ind_prev, msg.delta, msg.mu, msg.replacement_c_id)
            self._log("ApplyDelete", {
                "sub_filter_id": msg.sub_filter_id, "stag": msg.stag,
                "stag_prev": msg.stag_prev, "ind": msg.ind,
                "ind_prev": msg.ind_prev, "delta": msg.delta, "mu": msg.mu,
                "replacement_c_id": msg.replacement_c_id})
            return found
        raise MalformedMessage(f"unroutable ocall {type(msg).__name__}")

    # --- leakage summaries ----------------------------------------------

    def leakage_report(self, op_indices=None) -> list[dict]:
        """Per-operation leakage tuples: updates leak the operation kind and
        ciphertext lengths, searches leak the stoken list, the TSet access
        pattern, and the sub-filter ids loaded."""
        if op_indices is None:
            op_indices = range(len(self.ops))
        report = []
        for i in op_indices:
            op = self.ops[i]
            records = self.log.for_op(i)
            if op.kind == "update":
                entry = {"op": "update"}
                for r in records:
                    if r.msg_kind == "ApplyInsert":
                        entry.update(op="insert",
                                     tset_len=len(r.fields["c_id"]),
                                     itset_len=len(r.fields["c_stag"]),
                                     sub_filter_id=r.fields["sub_filter_id"])
                    elif r.msg_kind == "ApplyDelete":
                        entry.update(op="delete",
                                     sub_filter_id=r.fields["sub_filter_id"])
                report.append(entry)
            elif op.kind == "search":
                report.append({
                    "op": "search",
                    "stoken_list": op.tokens.get("stoken_list", []),
                    "ap_tset": op.tokens.get("stoken_list", []),
                    "ap_xset": op.tokens.get("subfilter_ids", []),
                })
            else:
                report.append({"op": op.kind})
        return report


# --- ecall payload codecs ----------------------------------------------------

def encode_setup_payload(keys) -> bytes:
    return keys.k_t + keys.k_z + keys.k_x


def decode_setup_payload(payload: bytes):
    from .crypto import SecretKeys
    if len(payload) != 96:
        raise MalformedMessage("setup payload must be 96 bytes")
    return SecretKeys(payload[:32], payload[32:64], payload[64:96])


def encode_update_payload(op: int, fuzzy: bool, w: str, vertex_id: int,
                          value: int) -> bytes:
    from .crypto import encode_id, encode_keyword, encode_u32
    return (bytes([op, 1 if fuzzy else 0]) + encode_keyword(w)
            + encode_id(vertex_id) + encode_u32(value))


def decode_update_payload(payload: bytes):
    from .crypto import decode_keyword
    op, fuzzy = payload[0], bool(payload[1])
    w, rest = decode_keyword(payload[2:])
    if len(rest) != 12:
        raise MalformedMessage("bad update payload")
    return op, fuzzy, w, int.from_bytes(rest[:8], "big"), int.from_bytes(rest[8:], "big")


def encode_search_payload(query) -> bytes:
    from .crypto import encode_keyword
    flags = 0
    if query.fuzzy:
        flags |= 1
    if query.top_k is not None:
        flags |= 2
    out = bytes([flags])
    out += struct.pack(">I", query.top_k or 0)
    out += struct.pack(">H", len(query.keywords))
    offsets = query.offsets or []
    for i, w in enumerate(query.keywords):
        out += encode_keyword(w)
        delta = offsets[i - 1] if query.fuzzy and i >= 1 else 0
        out += struct.pack(">i", delta)
    return out


def decode_search_payload(payload: bytes):
    from .crypto import decode_keyword
    from .types import SearchQuery
    flags = payload[0]
    top_k = struct.unpack(">I", payload[1:5])[0] if flags & 2 else None
    count = struct.unpack(">H", payload[5:7])[0]
    rest = payload[7:]
    keywords, offsets = [], []
    for i in range(count):
        w, rest = decode_keyword(rest)
        (delta,) = struct.unpack(">i", rest[:4])
        rest = rest[4:]
        keywords.append(w)
        if i >= 1:
            offsets.append(delta)
    return SearchQuery(keywords, offsets if flags & 1 else None, top_k)


def encode_result_payload(entries: list[tuple[int, int]]) -> bytes:
    out = struct.pack(">I", len(entries))
    for vid, weight in entries:
        out += struct.pack(">QI", vid, weight)
    return out


def decode_result_payload(payload: bytes) -> list[tuple[int, int]]:
    (count,) = struct.unpack(">I", payload[:4])
    entries = []
    offset = 4
    for _ in range(count):
        vid, weight = struct.unpack(">QI", payload[offset:offset + 12])
        entries.append((vid, weight))
        offset += 12
    return entries

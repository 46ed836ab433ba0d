"""Client-side assembly of enclave, server, and boundary.

A GraphSearchSystem is one client talking to one simulated SGX server:
it owns the secure channel, drives setup, and wraps the update and search
protocols in plain-Python calls.  Persistence writes the encrypted
database for the server side and a separate client-held state file for
the keys, counters, and split trie.
"""

from __future__ import annotations

import json
import os

from . import boundary as bnd
from .config import MODE_EXACT, MODE_FUZZY, MODE_MIXED, Params
from .crypto import SecretKeys
from .edb import EdbServer, load_edb, save_edb
from .enclave import Enclave
from .ingest import EdgeTriple, NameRecord, query_grams, split_name
from .types import RankedResult, SearchQuery


class GraphSearchSystem:
    def __init__(self, boundary: bnd.Boundary, enclave: Enclave,
                 server: EdbServer, channel: bnd.Channel):
        self.boundary = boundary
        self.enclave = enclave
        self.server = server
        self.channel = channel

    @classmethod
    def create(cls, params: Params | None = None,
               keys: SecretKeys | None = None) -> "GraphSearchSystem":
        params = params or Params()
        server = EdbServer(params)
        boundary = bnd.Boundary(server)
        enclave = Enclave(boundary, params)
        channel = boundary.handshake()
        system = cls(boundary, enclave, server, channel)
        keys = keys or SecretKeys.generate()
        boundary.begin_operation("setup")
        ack = boundary.call(bnd.SetupEcall(
            sealed=channel.seal(bnd.encode_setup_payload(keys)),
            nonce=os.urandom(16)))
        if channel.unseal(ack) != b"ready":
            raise RuntimeError("setup handshake failed")
        return system

    @property
    def params(self) -> Params:
        return self.server.params

    # --- updates ---------------------------------------------------------

    def _update(self, op: int, fuzzy: bool, w: str, vertex_id: int, value: int):
        self.boundary.begin_operation("update")
        payload = bnd.encode_update_payload(op, fuzzy, w, vertex_id, value)
        ack = self.boundary.call(bnd.UpdateEcall(sealed=self.channel.seal(payload)))
        if self.channel.unseal(ack) != b"ok":
            raise RuntimeError("update was not acknowledged")

    def insert(self, w: str, vertex_id: int, weight: int = 1):
        self._update(bnd.OP_INSERT, False, w, vertex_id, weight)

    def delete(self, w: str, vertex_id: int):
        self._update(bnd.OP_DELETE, False, w, vertex_id, 0)

    def insert_gram(self, sub: str, vertex_id: int, pos: int):
        self._update(bnd.OP_INSERT, True, sub, vertex_id, pos)

    def delete_gram(self, sub: str, vertex_id: int, pos: int):
        self._update(bnd.OP_DELETE, True, sub, vertex_id, pos)

    def ingest_edges(self, triples):
        for t in triples:
            if isinstance(t, EdgeTriple):
                self.insert(t.w, t.id_in, t.weight)
            else:
                self.insert(*t)

    def ingest_names(self, records, s: int = 2):
        for r in records:
            record = r if isinstance(r, NameRecord) else NameRecord(*r)
            for gram in split_name(record.name, s):
                self.insert_gram(gram.sub, record.id, gram.pos)

    # --- searches --------------------------------------------------------

    def run_query(self, query: SearchQuery) -> RankedResult:
        self.boundary.begin_operation("search")
        sealed = self.channel.seal(bnd.encode_search_payload(query))
        response = self.boundary.call(bnd.SearchEcall(sealed=sealed))
        entries = bnd.decode_result_payload(self.channel.unseal(response))
        return RankedResult(entries)

    def search(self, keywords: list[str], top_k: int | None = None) -> RankedResult:
        return self.run_query(SearchQuery(list(keywords), top_k=top_k))

    def fuzzy_search(self, pattern: str, s: int = 2,
                     top_k: int | None = None) -> RankedResult:
        anchor, companions = query_grams(pattern, s)
        keywords = [anchor] + [sub for sub, _ in companions]
        offsets = [delta for _, delta in companions]
        return self.run_query(SearchQuery(keywords, offsets, top_k=top_k))

    # --- persistence -----------------------------------------------------

    def save(self, edb_path: str, state_path: str | None = None):
        state_path = state_path or edb_path + ".enclave"
        save_edb(edb_path, self.server)
        state = self.enclave.export_state()
        with open(state_path, "w", encoding="utf-8") as fh:
            json.dump(state, fh)

    @classmethod
    def load(cls, edb_path: str, state_path: str | None = None,
             params_override: Params | None = None) -> "GraphSearchSystem":
        state_path = state_path or edb_path + ".enclave"
        server = load_edb(edb_path)
        params = params_override or server.params
        boundary = bnd.Boundary(server)
        enclave = Enclave(boundary, params)
        with open(state_path, "r", encoding="utf-8") as fh:
            enclave.restore_state(json.load(fh))
        channel = boundary.handshake()
        boundary.established = True  # re-attestation of an existing database
        boundary.begin_operation("reload")
        return cls(boundary, enclave, server, channel)


def mode_for(exact: bool, fuzzy: bool) -> int:
    if exact and fuzzy:
        return MODE_MIXED
    return MODE_FUZZY if fuzzy else MODE_EXACT

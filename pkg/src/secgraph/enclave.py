"""The trusted proxy.

Holds the secret keys, the per-keyword update counters, the split trie,
and a byte-budgeted sub-filter cache.  Implements proxy-token generation
and the trusted halves of the update and search protocols, plus the
fingerprint-grouping and check-parallelization variants.
"""

from __future__ import annotations

from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

from . import boundary as bnd
from .config import Params
from .crypto import (decode_id, decode_keyword, decode_u32, encode_id,
                     encode_keyword, encode_u32, hash_h1, hash_h2, prf,
                     xor_pad)
from .errors import (AlreadyInitialized, CacheOverflowUnsatisfiable,
                     CounterOverflow, KeywordUnknown, NotSetUp, PadCorruption,
                     ProtocolCorruption, VictimNotFound)
from .filters import IndexTree, SubFilter
from .types import RankedResult, SearchQuery

_COUNTER_MAX = 2**32 - 1


class SubFilterCache:
    """LRU cache of deserialized sub-filters under a byte budget.

    Entries pinned by the running search are never evicted until the search
    finishes; the budget may be exceeded transiently by the pinned working
    set and is trimmed back afterwards.
    """

    def __init__(self, byte_budget: int):
        self.byte_budget = byte_budget
        self.bytes_used = 0
        self.load_count = 0
        self._entries: "OrderedDict[str, tuple[SubFilter, int]]" = OrderedDict()
        self._pinned: set[str] = set()

    def get(self, sub_filter_id: str) -> SubFilter | None:
        entry = self._entries.get(sub_filter_id)
        if entry is None:
            return None
        self._entries.move_to_end(sub_filter_id)
        return entry[0]

    def put(self, sub_filter_id: str, f: SubFilter, nbytes: int):
        if nbytes > self.byte_budget:
            raise CacheOverflowUnsatisfiable(
                f"sub-filter '{sub_filter_id}' ({nbytes} bytes) exceeds the "
                f"cache budget of {self.byte_budget} bytes")
        if sub_filter_id in self._entries:
            self.bytes_used -= self._entries.pop(sub_filter_id)[1]
        self._entries[sub_filter_id] = (f, nbytes)
        self.bytes_used += nbytes
        self._evict()

    def _evict(self):
        for key in list(self._entries):
            if self.bytes_used <= self.byte_budget:
                break
            if key in self._pinned:
                continue
            self.bytes_used -= self._entries.pop(key)[1]

    def pin(self, sub_filter_id: str):
        self._pinned.add(sub_filter_id)

    def unpin_all(self):
        self._pinned.clear()
        self._evict()

    def invalidate(self, sub_filter_id: str):
        entry = self._entries.pop(sub_filter_id, None)
        if entry is not None:
            self.bytes_used -= entry[1]


class Enclave:
    def __init__(self, boundary, params: Params):
        self.boundary = boundary
        self.params = params
        self.channel: bnd.Channel | None = None
        self.keys = None
        self.update_cnt: dict[str, int] = {}
        self.tree: IndexTree | None = None
        self.cache = SubFilterCache(params.cache_bytes)
        boundary.attach_enclave(self)

    def provision_channel(self, channel: bnd.Channel):
        self.channel = channel

    # --- ecall handlers --------------------------------------------------

    def on_setup(self, sealed: bytes) -> bytes:
        if self.keys is not None:
            raise AlreadyInitialized("setup already ran")
        payload = self.channel.unseal(sealed)
        self.keys = bnd.decode_setup_payload(payload)
        self.update_cnt = {}
        self.tree = IndexTree(self.params.fingerprint_bits)
        self.cache = SubFilterCache(self.params.cache_bytes)
        return self.channel.seal(b"ready")

    def on_update(self, sealed: bytes) -> bytes:
        self._require_setup()
        op, fuzzy, w, vertex_id, value = bnd.decode_update_payload(
            self.channel.unseal(sealed))
        if op == bnd.OP_INSERT:
            self._do_insert(w, vertex_id, value, fuzzy)
        else:
            self._do_delete(w, vertex_id, value, fuzzy)
        return self.channel.seal(b"ok")

    def on_search(self, sealed: bytes) -> bytes:
        self._require_setup()
        query = bnd.decode_search_payload(self.channel.unseal(sealed))
        result = self._do_search(query)
        return self.channel.seal(bnd.encode_result_payload(result.entries))

    def on_index_tree_sync(self, split_paths: list[str]):
        for path in split_paths:
            self.tree.apply_split(path)
            self.cache.invalidate(path)

    def _require_setup(self):
        if self.keys is None:
            raise NotSetUp("enclave holds no keys")

    # --- token derivation ------------------------------------------------

    def _xtag_bytes(self, w: str, vertex_id: int, pos: int | None = None) -> bytes:
        out = encode_keyword(w) + encode_id(vertex_id)
        if pos is not None:
            out += encode_u32(pos)
        return out

    def grouped_fingerprint(self, w: str, xtag: bytes) -> int:
        """High bits from the keyword, low bits from the pair, so one
        keyword's fingerprints co-locate in few sub-filters."""
        bits = self.params.fingerprint_bits
        g = self.params.group_bits
        top = hash_h2(encode_keyword(w), bits) >> (bits - g)
        low = hash_h2(xtag, bits) & ((1 << (bits - g)) - 1)
        value = (top << (bits - g)) | low
        return value | 1

    def _fingerprint(self, w: str, xtag: bytes) -> int:
        if self.params.grouping:
            return self.grouped_fingerprint(w, xtag)
        return hash_h2(xtag, self.params.fingerprint_bits)

    def _cid_label(self, w: str, c: int) -> bytes:
        if self.params.hardened_pad:
            return encode_keyword(w) + encode_u32(c)
        return encode_keyword(w)

    def derive_tokens(self, w: str, vertex_id: int, value: int,
                      fuzzy: bool = False):
        """Token tuple for an insert at the current (already incremented)
        counter: (stag, C_id, ind, C_stag, delta, mu)."""
        self._require_setup()
        c = self.update_cnt[w]
        stag = prf(self.keys.k_t, encode_keyword(w) + encode_u32(c))
        c_id = xor_pad(self.keys.k_z, self._cid_label(w, c),
                       encode_id(vertex_id) + encode_u32(value))
        pos = value if fuzzy else None
        ind = prf(self.keys.k_x, self._xtag_bytes(w, vertex_id, pos))
        c_stag = xor_pad(self.keys.k_z, encode_keyword(w),
                         encode_keyword(w) + encode_u32(c))
        xtag = self._xtag_bytes(w, vertex_id, pos)
        delta = self._fingerprint(w, xtag)
        mu = hash_h1(xtag)
        return stag, c_id, ind, c_stag, delta, mu

    # --- update protocol, trusted side -----------------------------------

    def _do_insert(self, w: str, vertex_id: int, value: int, fuzzy: bool):
        c = self.update_cnt.get(w, 0)
        if c >= _COUNTER_MAX:
            raise CounterOverflow(f"keyword counter saturated for '{w}'")
        self.update_cnt[w] = c + 1
        stag, c_id, ind, c_stag, delta, mu = self.derive_tokens(
            w, vertex_id, value, fuzzy)
        sub_filter_id = self.tree.locate(delta)
        self.cache.invalidate(sub_filter_id)
        self.boundary.call(bnd.ApplyInsert(
            sub_filter_id=sub_filter_id, stag=stag, c_id=c_id, ind=ind,
            c_stag=c_stag, delta=delta, mu=mu))

    def _do_delete(self, w: str, vertex_id: int, value: int, fuzzy: bool):
        c_cur = self.update_cnt.get(w, 0)
        if c_cur == 0:
            raise KeywordUnknown("no live entries for the keyword")
        kw = encode_keyword(w)
        stag_prev = prf(self.keys.k_t, kw + encode_u32(c_cur))
        c_id_prev = self.boundary.call(bnd.TSetGet(stag=stag_prev))
        if c_id_prev is None:
            raise ProtocolCorruption("latest posting entry missing from TSet")
        plain_prev = xor_pad(self.keys.k_z, self._cid_label(w, c_cur), c_id_prev)
        id_prev = decode_id(plain_prev)
        value_prev = decode_u32(plain_prev[8:])

        pos = value if fuzzy else None
        pos_prev = value_prev if fuzzy else None
        ind = prf(self.keys.k_x, self._xtag_bytes(w, vertex_id, pos))
        ind_prev = prf(self.keys.k_x, self._xtag_bytes(w, id_prev, pos_prev))

        c_stag = self.boundary.call(bnd.ITSetGet(ind=ind))
        if c_stag is None:
            raise VictimNotFound("pair not present in ITSet")
        plain = xor_pad(self.keys.k_z, kw, c_stag)
        w_check, rest = decode_keyword(plain)
        if w_check != w:
            raise PadCorruption("decrypted locator does not name this keyword")
        c_victim = decode_u32(rest)
        stag = prf(self.keys.k_t, kw + encode_u32(c_victim))

        self.update_cnt[w] = c_cur - 1
        if self.update_cnt[w] == 0:
            del self.update_cnt[w]

        replacement = None
        if self.params.hardened_pad and stag != stag_prev:
            replacement = xor_pad(self.keys.k_z, self._cid_label(w, c_victim),
                                  plain_prev)

        xtag = self._xtag_bytes(w, vertex_id, pos)
        delta = self._fingerprint(w, xtag)
        mu = hash_h1(xtag)
        sub_filter_id = self.tree.locate(delta)
        self.cache.invalidate(sub_filter_id)
        self.boundary.call(bnd.ApplyDelete(
            sub_filter_id=sub_filter_id, stag=stag, stag_prev=stag_prev,
            ind=ind, ind_prev=ind_prev, delta=delta, mu=mu,
            replacement_c_id=replacement))

    # --- search protocol, trusted side ------------------------------------

    def _fetch_subfilter(self, sub_filter_id: str) -> SubFilter:
        f = self.cache.get(sub_filter_id)
        self.cache.pin(sub_filter_id)
        if f is None:
            record = self.boundary.call(
                bnd.LoadSubFilter(sub_filter_id=sub_filter_id))
            f = SubFilter.deserialize(record)
            self.cache.put(sub_filter_id, f, len(record))
            self.cache.load_count += 1
        return f

    def _do_search(self, query: SearchQuery) -> RankedResult:
        w1 = query.keywords[0]
        count = self.update_cnt.get(w1, 0)
        if count == 0:
            return RankedResult([])
        kw1 = encode_keyword(w1)
        stoken_list = [prf(self.keys.k_t, kw1 + encode_u32(j))
                       for j in range(1, count + 1)]
        cid_list = self.boundary.call(bnd.TSetBatchGet(stoken_list=stoken_list))

        candidates = []
        for j, c_id in enumerate(cid_list, start=1):
            if c_id is None:
                raise ProtocolCorruption(
                    f"TSet returned no entry for counter slot {j}")
            plain = xor_pad(self.keys.k_z, self._cid_label(w1, j), c_id)
            candidates.append((decode_id(plain), decode_u32(plain[8:])))

        try:
            while True:
                version = self.tree.version
                accepted = self._check_candidates(query, candidates)
                if self.tree.version == version:
                    break
        finally:
            self.cache.unpin_all()
        return self._rank(query, accepted)

    def _check_candidates(self, query, candidates):
        n = len(query.keywords)
        if n == 1:
            return list(candidates)
        tasks = []  # (candidate index, delta or None for auto-reject)
        needed: "OrderedDict[str, None]" = OrderedDict()
        for idx, (vid, value) in enumerate(candidates):
            for i in range(1, n):
                w_i = query.keywords[i]
                if query.fuzzy:
                    target = value + query.offsets[i - 1]
                    if target < 1:
                        tasks.append((idx, None, 0))
                        continue
                    xtag = self._xtag_bytes(w_i, vid, target)
                else:
                    xtag = self._xtag_bytes(w_i, vid)
                delta = self._fingerprint(w_i, xtag)
                mu = hash_h1(xtag)
                tasks.append((idx, delta, mu))
                needed[self.tree.locate(delta)] = None

        filters = {sid: self._fetch_subfilter(sid) for sid in needed}

        def run_check(task):
            idx, delta, mu = task
            if delta is None:
                return idx, False
            f = filters[self.tree.locate(delta)]
            return idx, f.check(delta, mu)

        if self.params.parallel and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=self.params.threads) as pool:
                outcomes = list(pool.map(run_check, tasks))
        else:
            outcomes = [run_check(t) for t in tasks]

        rejected = {idx for idx, ok in outcomes if not ok}
        return [cand for idx, cand in enumerate(candidates)
                if idx not in rejected]

    def _rank(self, query: SearchQuery, accepted) -> RankedResult:
        if query.fuzzy:
            entries = [(vid, 0) for vid in sorted({vid for vid, _ in accepted})]
        else:
            entries = sorted(accepted, key=lambda e: (-e[1], e[0]))
        if query.top_k is not None:
            entries = entries[:query.top_k]
        return RankedResult(entries)

    # --- persistence of the trusted state ---------------------------------

    def export_state(self) -> dict:
        self._require_setup()
        return {
            "k_t": self.keys.k_t.hex(),
            "k_z": self.keys.k_z.hex(),
            "k_x": self.keys.k_x.hex(),
            "update_cnt": dict(self.update_cnt),
            "leaves": sorted(self.tree.leaves),
            "tree_version": self.tree.version,
        }

    def restore_state(self, state: dict):
        if self.keys is not None:
            raise AlreadyInitialized("setup already ran")
        from .crypto import SecretKeys
        self.keys = SecretKeys(bytes.fromhex(state["k_t"]),
                               bytes.fromhex(state["k_z"]),
                               bytes.fromhex(state["k_x"]))
        self.update_cnt = dict(state["update_cnt"])
        self.tree = IndexTree(self.params.fingerprint_bits)
        self.tree.replace(set(state["leaves"]), state["tree_version"])
        self.cache = SubFilterCache(self.params.cache_bytes)

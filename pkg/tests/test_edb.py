import os
import random

import pytest

from secgraph.config import Params
from secgraph.edb import EdbServer, load_edb, save_edb
from secgraph.errors import (DuplicateStag, MalformedRecord, NotFound,
                             UnknownSubFilter)
from secgraph.filters import SubFilter, fingerprint_prefix

RNG = random.Random(0)


def stag(n: int) -> bytes:
    return n.to_bytes(32, "big")


def odd_fp(rng) -> int:
    return rng.randrange(0, 1 << 16) | 1


def fresh_server(**overrides) -> EdbServer:
    return EdbServer(Params(**overrides))


def test_lookups_miss_return_none():
    server = fresh_server()
    assert server.tset_get(stag(1)) is None
    assert server.itset_get(stag(2)) is None
    assert server.tset_batch_get([stag(1), stag(2)]) == [None, None]


def test_insert_and_lookup():
    server = fresh_server()
    splits = server.apply_insert("", stag(1), b"cid", stag(10), b"cstag",
                                 0x0101, 7)
    assert splits == []
    assert server.tset_get(stag(1)) == b"cid"
    assert server.itset_get(stag(10)) == b"cstag"
    assert server.xset[""].check(0x0101, 7)
    assert server.store_sizes() == (1, 1, 1)


def test_duplicate_stag_rejected():
    server = fresh_server()
    server.apply_insert("", stag(1), b"a", stag(10), b"b", 0x0101, 0)
    with pytest.raises(DuplicateStag):
        server.apply_insert("", stag(1), b"a", stag(11), b"b", 0x0303, 0)


def test_batch_get_preserves_order():
    server = fresh_server()
    server.apply_insert("", stag(1), b"one", stag(10), b"x", 0x0101, 0)
    server.apply_insert("", stag(2), b"two", stag(11), b"y", 0x0103, 1)
    assert server.tset_batch_get([stag(2), stag(9), stag(1)]) == \
        [b"two", None, b"one"]


def test_load_subfilter_roundtrip_and_unknown():
    server = fresh_server()
    record = server.load_subfilter("")
    assert SubFilter.deserialize(record) == server.xset[""]
    with pytest.raises(UnknownSubFilter):
        server.load_subfilter("0110")


def test_filter_insert_splits_and_reports_prefixes():
    server = fresh_server(subfilter_capacity=8, bucket_size=1)
    rng = random.Random(3)
    split_log = []
    for i in range(200):
        fp = odd_fp(rng)
        prefix = next(p for p in server.xset
                      if fingerprint_prefix(fp, 16, len(p)) == p)
        split_log += server.apply_insert(
            prefix, stag(i), b"c", stag(1000 + i), b"s", fp, rng.randrange(2**32))
    assert split_log  # small capacity forces splits
    # every reported split prefix is now an internal node: absent from xset,
    # with both children (or their descendants) present
    for prefix in split_log:
        assert prefix not in server.xset
    assert all(
        any(leaf.startswith(prefix + bit) for leaf in server.xset)
        for prefix in split_log for bit in "01")


def test_delete_swaps_last_entry_into_place():
    server = fresh_server()
    server.apply_insert("", stag(1), b"first", stag(10), b"loc1", 0x0101, 0)
    server.apply_insert("", stag(2), b"last", stag(11), b"loc2", 0x0303, 1)
    # remove the first entry: the newest stag's payload moves into its slot
    found = server.apply_delete("", stag(1), stag(2), stag(10), stag(11),
                               0x0101, 0)
    assert found
    assert server.tset_get(stag(1)) == b"last"
    assert server.tset_get(stag(2)) is None
    assert server.itset_get(stag(11)) == b"loc1"
    assert server.itset_get(stag(10)) is None
    assert not server.xset[""].check(0x0101, 0)
    assert server.xset[""].check(0x0303, 1)


def test_delete_latest_entry_drops_both_records():
    server = fresh_server()
    server.apply_insert("", stag(1), b"only", stag(10), b"loc", 0x0101, 0)
    assert server.apply_delete("", stag(1), stag(1), stag(10), stag(10),
                               0x0101, 0)
    assert server.store_sizes() == (0, 0, 1)


def test_delete_with_replacement_ciphertext():
    server = fresh_server()
    server.apply_insert("", stag(1), b"first", stag(10), b"loc1", 0x0101, 0)
    server.apply_insert("", stag(2), b"last", stag(11), b"loc2", 0x0303, 1)
    server.apply_delete("", stag(1), stag(2), stag(10), stag(11), 0x0101, 0,
                        replacement_c_id=b"rewrapped")
    assert server.tset_get(stag(1)) == b"rewrapped"


def test_delete_unknown_references():
    server = fresh_server()
    with pytest.raises(NotFound):
        server.apply_delete("", stag(1), stag(2), stag(10), stag(11), 0x0101, 0)
    server.apply_insert("", stag(1), b"c", stag(10), b"s", 0x0101, 0)
    with pytest.raises(UnknownSubFilter):
        server.apply_delete("11", stag(1), stag(1), stag(10), stag(10),
                            0x0101, 0)


def test_delete_missing_fingerprint_returns_false():
    server = fresh_server()
    server.apply_insert("", stag(1), b"c", stag(10), b"s", 0x0101, 0)
    assert not server.apply_delete("", stag(1), stag(1), stag(10), stag(10),
                                   0x0909, 5)


# --- at-rest format ----------------------------------------------------------

def populated_server(n=300, **overrides) -> EdbServer:
    server = fresh_server(**overrides)
    rng = random.Random(9)
    for i in range(n):
        fp = odd_fp(rng)
        prefix = next(p for p in server.xset
                      if fingerprint_prefix(fp, 16, len(p)) == p)
        server.apply_insert(prefix, stag(i), rng.randbytes(20),
                            stag(10_000 + i), rng.randbytes(40), fp,
                            rng.randrange(2**32))
    return server


def test_save_load_roundtrip(tmp_path):
    server = populated_server(subfilter_capacity=64)
    path = os.path.join(tmp_path, "graph.edb")
    save_edb(path, server)
    loaded = load_edb(path)
    assert loaded.tset == server.tset
    assert loaded.itset == server.itset
    assert loaded.xset == server.xset
    assert loaded.params == server.params


def test_save_is_deterministic(tmp_path):
    server = populated_server(subfilter_capacity=64)
    p1 = os.path.join(tmp_path, "a.edb")
    p2 = os.path.join(tmp_path, "b.edb")
    save_edb(p1, server)
    save_edb(p2, server)
    with open(p1, "rb") as f1, open(p2, "rb") as f2:
        assert f1.read() == f2.read()


def test_load_rejects_wrong_magic(tmp_path):
    path = os.path.join(tmp_path, "bogus.edb")
    with open(path, "wb") as fh:
        fh.write(b"NOPE" + bytes(64))
    with pytest.raises(MalformedRecord):
        load_edb(path)


def test_load_rejects_truncated_file(tmp_path):
    server = populated_server(n=50)
    path = os.path.join(tmp_path, "graph.edb")
    save_edb(path, server)
    with open(path, "rb") as fh:
        blob = fh.read()
    with open(path, "wb") as fh:
        fh.write(blob[:len(blob) // 2])
    with pytest.raises(MalformedRecord):
        load_edb(path)


def test_params_survive_wire_format(tmp_path):
    server = fresh_server(fingerprint_bits=18, subfilter_capacity=2048,
                          bucket_size=8, grouping=True, group_bits=6,
                          hardened_pad=True, mode=2)
    path = os.path.join(tmp_path, "graph.edb")
    save_edb(path, server)
    loaded = load_edb(path)
    p = loaded.params
    assert (p.fingerprint_bits, p.subfilter_capacity, p.bucket_size) == (18, 2048, 8)
    assert p.grouping and p.hardened_pad and p.group_bits == 6 and p.mode == 2

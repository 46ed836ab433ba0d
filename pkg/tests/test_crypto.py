import os
import random

import pytest
from hypothesis import given, strategies as st
from scipy import stats

from secgraph.crypto import (SecretKeys, decode_keyword, encode_id,
                             encode_keyword, encode_u32, hash_h1, hash_h2,
                             prf, xor_pad)
from secgraph.errors import PlaintextTooLong

KEY = bytes(range(32))
KEY2 = bytes(range(1, 33))


def test_prf_deterministic():
    assert prf(KEY, b"a") == prf(KEY, b"a")
    assert len(prf(KEY, b"a")) == 32


def test_prf_distinct_inputs():
    rng = random.Random(0)
    seen = set()
    for _ in range(10_000):
        data = rng.randbytes(12)
        seen.add(prf(KEY, data))
    # 10^4 distinct inputs, 256-bit outputs: collisions would be a bug
    assert len(seen) == 10_000


def test_prf_key_separation():
    rng = random.Random(1)
    for _ in range(1000):
        data = rng.randbytes(8)
        assert prf(KEY, data) != prf(KEY2, data)


def test_prf_rejects_empty():
    with pytest.raises(ValueError):
        prf(KEY, b"")


def test_hash_h1_deterministic_and_rejects_empty():
    assert hash_h1(b"x") == hash_h1(b"x")
    assert 0 <= hash_h1(b"x") < 2**32
    with pytest.raises(ValueError):
        hash_h1(b"")


def test_hash_h1_bucket_uniformity():
    buckets = 1024
    counts = [0] * buckets
    rng = random.Random(2)
    n = 100_000
    for _ in range(n):
        counts[hash_h1(rng.randbytes(10)) % buckets] += 1
    _, p = stats.chisquare(counts)
    assert p > 0.01


def test_hash_h2_range_and_parity():
    rng = random.Random(3)
    for _ in range(5000):
        v = hash_h2(rng.randbytes(8))
        assert 1 <= v <= 2**16 - 1
        assert v & 1  # odd: no trie suffix is ever all-zero


def test_hash_h2_collision_rate_matches_birthday_bound():
    # effective space is 2^15 (values are odd); expected distinct count for
    # n draws is m * (1 - (1 - 1/m)^n)
    m = 2**15
    n = 2000
    expected = m * (1 - (1 - 1 / m) ** n)  # ~1940.6
    rng = random.Random(4)
    distinct = len({hash_h2(rng.randbytes(10)) for _ in range(n)})
    assert abs(distinct - expected) < 40  # > 5 sigma of the collision count


@given(st.binary(min_size=0, max_size=200), st.binary(min_size=1, max_size=30))
def test_xor_pad_involution(plaintext, label):
    assert xor_pad(KEY, label, xor_pad(KEY, label, plaintext)) == plaintext


def test_xor_pad_length_preservation():
    assert len(xor_pad(KEY, b"w", b"x" * 12)) == 12
    # block-iterated expansion past one hash output
    assert len(xor_pad(KEY, b"w", b"y" * 100)) == 100


def test_xor_pad_leaks_xor_relation_under_label_reuse():
    # pad reuse per label is the scheme's (documented) behaviour
    m1, m2 = b"A" * 16, b"B" * 16
    c1 = xor_pad(KEY, b"w", m1)
    c2 = xor_pad(KEY, b"w", m2)
    assert bytes(a ^ b for a, b in zip(c1, c2)) == \
        bytes(a ^ b for a, b in zip(m1, m2))


def test_xor_pad_rejects_oversize():
    with pytest.raises(PlaintextTooLong):
        xor_pad(KEY, b"w", b"z" * 4097)


def test_secret_keys_distinct_and_sized():
    keys = SecretKeys.generate()
    assert len({keys.k_t, keys.k_z, keys.k_x}) == 3
    with pytest.raises(ValueError):
        SecretKeys(b"short", os.urandom(32), os.urandom(32))


def test_keyword_encoding_roundtrip_and_injectivity():
    w, rest = decode_keyword(encode_keyword("a:friendship") + b"tail")
    assert w == "a:friendship" and rest == b"tail"
    # length prefix keeps concatenations unambiguous
    assert encode_keyword("ab") + encode_id(1) != encode_keyword("a") + encode_id(98)
    assert encode_u32(7) == b"\x00\x00\x00\x07"

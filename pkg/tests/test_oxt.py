import random

import pytest

from conftest import TOY_EDGES, build_toy_system
from secgraph.crypto import encode_id, encode_keyword, encode_u32
from secgraph.errors import NotBuilt
from secgraph.ingest import parse_snap
from secgraph.oxt import (GROUP_G, GROUP_P, GROUP_Q, OxtClient, OxtKeys,
                          _exponent)


def toy_corpus() -> dict[str, list[tuple[int, int]]]:
    corpus: dict[str, list[tuple[int, int]]] = {}
    for t in parse_snap(TOY_EDGES):
        corpus.setdefault(t.w, []).append((t.id_in, t.weight))
    return corpus


@pytest.fixture(scope="module")
def toy_client() -> OxtClient:
    client = OxtClient(OxtKeys.generate())
    client.build(toy_corpus())
    return client


def test_group_parameters():
    assert GROUP_P % 2 == 1 and GROUP_Q == (GROUP_P - 1) // 2
    # g generates the quadratic-residue subgroup: g^q = 1
    assert pow(GROUP_G, GROUP_Q, GROUP_P) == 1
    assert pow(GROUP_G, 2, GROUP_P) != 1


def test_exponent_range_and_determinism():
    key = bytes(32)
    rng = random.Random(0)
    for _ in range(200):
        data = rng.randbytes(8)
        e = _exponent(key, data)
        assert 1 <= e < GROUP_Q
        assert e == _exponent(key, data)


def test_blinded_token_recovers_cross_tag():
    # the algebra behind the second roundtrip: xtoken_j ^ y_j lands exactly
    # on the cross-tag of (w_i, id_j) when the pair exists
    keys = OxtKeys.generate()
    w1, w2, vid = "2:friendship", "3:friendship", 3
    fi = _exponent(keys.k_i, encode_id(vid))
    fx = _exponent(keys.k_x, encode_keyword(w2))
    fz = _exponent(keys.k_z, encode_keyword(w1) + encode_u32(1))
    y = (fi * pow(fz, -1, GROUP_Q)) % GROUP_Q
    xtoken = pow(GROUP_G, (fz * fx) % GROUP_Q, GROUP_P)
    xtag = pow(GROUP_G, (fx * fi) % GROUP_Q, GROUP_P)
    assert pow(xtoken, y, GROUP_P) == xtag


def test_search_before_build_rejected():
    with pytest.raises(NotBuilt):
        OxtClient().search(["w"])


def test_single_keyword_search(toy_client):
    assert toy_client.search(["2:friendship"]) == [(1, 5), (5, 4), (3, 3)]
    assert toy_client.last_roundtrips == 1


def test_conjunctive_search(toy_client):
    assert [vid for vid, _ in toy_client.search(
        ["3:friendship", "5:friendship"])] == [2]
    assert toy_client.last_roundtrips == 2


def test_empty_results_still_two_roundtrips(toy_client):
    assert toy_client.search(["1:friendship", "6:friendship"]) == []
    assert toy_client.last_roundtrips == 2
    assert toy_client.search(["99:friendship", "1:friendship"]) == []
    assert toy_client.last_roundtrips == 2


def test_exponentiation_counter_advances(toy_client):
    before = toy_client.server.exponentiations
    toy_client.search(["2:friendship", "3:friendship"])
    # the server performs at most one exponentiation per (entry, keyword)
    done = toy_client.server.exponentiations - before
    assert 0 < done <= 3


def test_matches_encrypted_graph_scheme_on_toy_corpus(toy_client):
    system = build_toy_system()
    for query in (["1:friendship"], ["2:friendship", "3:friendship"],
                  ["4:friendship", "6:friendship"],
                  ["1:friendship", "2:friendship", "4:friendship"]):
        assert toy_client.search(query) == system.search(query).entries

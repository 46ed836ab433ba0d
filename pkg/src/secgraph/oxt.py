"""Reference two-roundtrip conjunctive search protocol (the baseline).

Cross-tags live in a prime-order group as exponentiations; the search
sends blinded intersection tokens in a second roundtrip.  Used as a
filter-free correctness reference and as the cost baseline for the
exponentiation-versus-membership-check comparison.

Group: the 2048-bit MODP group from RFC 3526.  g = 2 generates the
prime-order subgroup of quadratic residues of order q = (p - 1) / 2;
PRF outputs map to exponents by big-endian reduction into [1, q - 1].
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from .crypto import encode_id, encode_keyword, encode_u32, prf, xor_pad
from .errors import NotBuilt

# RFC 3526, group 14 (2048-bit MODP); a safe prime.
GROUP_P = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16)
GROUP_G = 2
GROUP_Q = (GROUP_P - 1) // 2


def _exponent(key: bytes, data: bytes) -> int:
    """PRF output as a non-zero exponent modulo the subgroup order."""
    value = int.from_bytes(prf(key, data), "big") % GROUP_Q
    return value if value else 1


@dataclass
class OxtKeys:
    k_i: bytes
    k_x: bytes
    k_t: bytes
    k_z: bytes

    @classmethod
    def generate(cls) -> "OxtKeys":
        return cls(*(secrets.token_bytes(32) for _ in range(4)))


@dataclass
class OxtServer:
    """The untrusted half: TSet entries under stag labels, XSet of xtags."""

    tset: dict[bytes, list[tuple[bytes, int]]] = field(default_factory=dict)
    xset: set[int] = field(default_factory=set)
    exponentiations: int = 0

    def fetch(self, stag: bytes) -> list[tuple[bytes, int]]:
        return list(self.tset.get(stag, []))

    def filter_with_xtokens(self, entries, xtoken_rows) -> list[bytes]:
        """Second roundtrip: keep entry j iff every xtoken_{i,j}^{y_j} is in
        the XSet."""
        accepted = []
        for j, (c_fid, y) in enumerate(entries):
            ok = True
            for row in xtoken_rows:
                self.exponentiations += 1
                if pow(row[j], y, GROUP_P) not in self.xset:
                    ok = False
                    break
            if ok:
                accepted.append(c_fid)
        return accepted


class OxtClient:
    """Builds the static encrypted index and runs two-roundtrip searches."""

    def __init__(self, keys: OxtKeys | None = None):
        self.keys = keys or OxtKeys.generate()
        self.server: OxtServer | None = None
        self.last_roundtrips = 0

    def build(self, corpus: dict[str, list[tuple[int, int]]]):
        """corpus maps keyword -> [(vertex id, weight)]."""
        server = OxtServer()
        for w, postings in corpus.items():
            stag = prf(self.keys.k_t, encode_keyword(w))
            fx_w = _exponent(self.keys.k_x, encode_keyword(w))
            entries = []
            for i, (vid, weight) in enumerate(postings, start=1):
                fid = encode_id(vid) + encode_u32(weight)
                c_fid = xor_pad(self.keys.k_z, encode_keyword(w), fid)
                fi = _exponent(self.keys.k_i, encode_id(vid))
                fz = _exponent(self.keys.k_z, encode_keyword(w) + encode_u32(i))
                y = (fi * pow(fz, -1, GROUP_Q)) % GROUP_Q
                entries.append((c_fid, y))
                server.xset.add(pow(GROUP_G, (fx_w * fi) % GROUP_Q, GROUP_P))
            server.tset[stag] = entries
        self.server = server

    def search(self, keywords: list[str]) -> list[tuple[int, int]]:
        """Conjunctive search; two roundtrips for n >= 2, one for n = 1."""
        if self.server is None:
            raise NotBuilt("build the index first")
        w1 = keywords[0]
        kw1 = encode_keyword(w1)
        stag = prf(self.keys.k_t, kw1)
        entries = self.server.fetch(stag)  # roundtrip 1
        self.last_roundtrips = 1
        if len(keywords) > 1:
            xtoken_rows = []
            for w_i in keywords[1:]:
                fx = _exponent(self.keys.k_x, encode_keyword(w_i))
                row = []
                for j in range(1, len(entries) + 1):
                    fz = _exponent(self.keys.k_z, kw1 + encode_u32(j))
                    row.append(pow(GROUP_G, (fz * fx) % GROUP_Q, GROUP_P))
                xtoken_rows.append(row)
            accepted = self.server.filter_with_xtokens(entries, xtoken_rows)
            self.last_roundtrips = 2
        else:
            accepted = [c_fid for c_fid, _ in entries]
        results = []
        for c_fid in accepted:
            plain = xor_pad(self.keys.k_z, kw1, c_fid)
            results.append((int.from_bytes(plain[:8], "big"),
                            int.from_bytes(plain[8:12], "big")))
        return sorted(results, key=lambda e: (-e[1], e[0]))

"""Keyed PRFs, hash truncations, and the XOR-pad cipher.

Everything here is stateless.  The PRF is HMAC-SHA-256; the two hash
functions are domain-separated SHA-256 truncations so the bucket index and
the fingerprint of the same input stay uncorrelated.  Fixed-width byte
encodings for ids, counters, and keywords make every token derivation
injective.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass

from .errors import PlaintextTooLong

KEY_LEN = 32
PAD_LIMIT = 4096

_H1_DOMAIN = b"\x01"
_H2_DOMAIN = b"\x02"


@dataclass(frozen=True)
class SecretKeys:
    """The three PRF keys held by the trusted component."""

    k_t: bytes
    k_z: bytes
    k_x: bytes

    def __post_init__(self):
        for k in (self.k_t, self.k_z, self.k_x):
            if len(k) != KEY_LEN:
                raise ValueError("keys must be 32 bytes")

    @classmethod
    def generate(cls) -> "SecretKeys":
        return cls(secrets.token_bytes(KEY_LEN),
                   secrets.token_bytes(KEY_LEN),
                   secrets.token_bytes(KEY_LEN))


def prf(key: bytes, data: bytes) -> bytes:
    """Keyed pseudorandom function, 32-byte output."""
    if not data:
        raise ValueError("prf input must be non-empty")
    return hmac.new(key, data, hashlib.sha256).digest()


def hash_h1(data: bytes) -> int:
    """32-bit hash used for bucket indices (reduced mod m by the filter)."""
    if not data:
        raise ValueError("hash_h1 input must be non-empty")
    digest = hashlib.sha256(_H1_DOMAIN + data).digest()
    return int.from_bytes(digest[:4], "big")


def hash_h2(data: bytes, bits: int = 16) -> int:
    """Fingerprint hash truncated to `bits` bits, always odd.

    The low bit is forced to 1 so that no trie suffix of the value is ever
    all-zero: zero is the empty-slot sentinel in filter buckets, and the
    suffix must stay representable at every split depth up to bits-1.
    """
    if not data:
        raise ValueError("hash_h2 input must be non-empty")
    if not 2 <= bits <= 32:
        raise ValueError("fingerprint width out of range")
    digest = hashlib.sha256(_H2_DOMAIN + data).digest()
    value = int.from_bytes(digest[:4], "big") >> (32 - bits)
    return value | 1


def xor_pad(key: bytes, label: bytes, plaintext: bytes) -> bytes:
    """Encrypt/decrypt by XOR with a pad derived from (key, label).

    Involution: applying it twice with the same key and label is the
    identity.  The pad is expanded block-wise from prf(key, label).
    """
    if len(plaintext) > PAD_LIMIT:
        raise PlaintextTooLong(f"plaintext of {len(plaintext)} bytes exceeds {PAD_LIMIT}")
    seed = prf(key, label)
    pad = b""
    block = 0
    while len(pad) < len(plaintext):
        pad += hashlib.sha256(seed + block.to_bytes(4, "big")).digest()
        block += 1
    return bytes(a ^ b for a, b in zip(plaintext, pad))


# --- canonical byte encodings -------------------------------------------------

def encode_id(vertex_id: int) -> bytes:
    return vertex_id.to_bytes(8, "big")


def decode_id(data: bytes) -> int:
    return int.from_bytes(data[:8], "big")


def encode_u32(value: int) -> bytes:
    return value.to_bytes(4, "big")


def decode_u32(data: bytes) -> int:
    return int.from_bytes(data[:4], "big")


def encode_keyword(w: str) -> bytes:
    """Length-prefixed UTF-8, unambiguous under concatenation."""
    raw = w.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("keyword too long")
    return len(raw).to_bytes(2, "big") + raw


def decode_keyword(data: bytes) -> tuple[str, bytes]:
    """Return (keyword, remaining bytes)."""
    n = int.from_bytes(data[:2], "big")
    return data[2:2 + n].decode("utf-8"), data[2 + n:]

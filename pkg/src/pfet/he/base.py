"""Homomorphic-arithmetic contract over fixed-point reals.

A provider owns one :class:`SchemeParams`, issues key triples and evaluates
ADD/SUB/MULT on :class:`Ciphertext` values. Level accounting is done here,
once, for every backend:

* add / sub / sum: ``max`` of the operand levels
* ciphertext x ciphertext: ``level_a + level_b + 1``
* ciphertext x plaintext: ``level_a + 1``

exceeding ``depth_budget`` raises :class:`DepthExhausted`. Backends only
decide how an integer word is sealed into, and opened from, a payload.

Arithmetic error: a product of operands carrying absolute errors e_a, e_b
decrypts within ``|a| e_b + |b| e_a + e_a e_b + 2**-(scale_bits+1)`` of the
exact product; fresh encryptions carry ``e <= 2**-(scale_bits+1)``. Plain
scalars are encoded at ``2**(2*scale_bits)`` so small constants such as a
step size of 1e-4 keep their relative precision.
"""
from __future__ import annotations

import abc
import struct
from dataclasses import dataclass, field

from ..errors import DepthExhausted, EmptyInput, InputError, KeyMismatch
from .fixed import check_word, decode_fixed, encode_fixed, rdiv

KEY_ID_BYTES = 16
_LEN = struct.Struct(">I")
_LEVEL = struct.Struct(">H")


@dataclass(frozen=True)
class SchemeParams:
    scale_bits: int = 20
    depth_budget: int = 6

    def problems(self, prefix="scheme"):
        out = []
        if int(self.scale_bits) != self.scale_bits or not 1 <= self.scale_bits <= 40:
            out.append((f"{prefix}.scale_bits", "must be an integer in [1, 40]"))
        if int(self.depth_budget) != self.depth_budget or self.depth_budget < 6:
            out.append((f"{prefix}.depth_budget", "must be an integer >= 6"))
        return out


@dataclass(frozen=True)
class Ciphertext:
    """Opaque encrypted word. There is deliberately no value accessor."""
    key_id: bytes
    level: int
    payload: bytes = field(repr=False)

    def to_bytes(self) -> bytes:
        body = self.key_id + _LEVEL.pack(self.level) + self.payload
        return _LEN.pack(len(body)) + body

    @classmethod
    def from_bytes(cls, buf, offset=0):
        """Parse one ciphertext at ``offset``; returns ``(ct, next_offset)``."""
        try:
            (n,) = _LEN.unpack_from(buf, offset)
        except struct.error as exc:
            raise InputError("truncated ciphertext header") from exc
        start = offset + _LEN.size
        end = start + n
        if end > len(buf) or n < KEY_ID_BYTES + _LEVEL.size:
            raise InputError("truncated ciphertext body")
        key_id = bytes(buf[start:start + KEY_ID_BYTES])
        (level,) = _LEVEL.unpack_from(buf, start + KEY_ID_BYTES)
        payload = bytes(buf[start + KEY_ID_BYTES + _LEVEL.size:end])
        return cls(key_id, level, payload), end


@dataclass(frozen=True)
class PublicKey:
    key_id: bytes
    token: bytes = field(repr=False)

    def to_bytes(self):
        return self.key_id + self.token


@dataclass(frozen=True)
class EvalKey:
    key_id: bytes
    token: bytes = field(repr=False)

    def to_bytes(self):
        return self.key_id + self.token


@dataclass(frozen=True)
class SecretKey:
    """Decryption capability. Has no serialised form on purpose."""
    key_id: bytes
    secret: bytes = field(repr=False)


@dataclass(frozen=True)
class KeyMaterial:
    public_key: PublicKey
    secret_key: SecretKey
    eval_key: EvalKey

    @property
    def key_id(self):
        return self.public_key.key_id


class Provider(abc.ABC):
    """Backend-agnostic evaluator. Subclasses implement key handling and sealing."""

    name = "abstract"

    def __init__(self, params: SchemeParams | None = None):
        self.params = params or SchemeParams()
        self._scale = 1 << self.params.scale_bits
        self._plain_bits = 2 * self.params.scale_bits

    # -- backend hooks ---------------------------------------------------
    @abc.abstractmethod
    def keygen(self, seed=None) -> KeyMaterial: ...

    @abc.abstractmethod
    def _seal(self, key_id: bytes, word: int, nonce: bytes) -> bytes: ...

    @abc.abstractmethod
    def _open(self, ct: Ciphertext) -> int: ...

    @abc.abstractmethod
    def _check_secret(self, sk: SecretKey) -> None: ...

    @abc.abstractmethod
    def _nonce(self, key_id: bytes, *parts: bytes) -> bytes: ...

    # -- contract --------------------------------------------------------
    def encode(self, x):
        return encode_fixed(x, self.params.scale_bits)

    def decode(self, n):
        return decode_fixed(n, self.params.scale_bits)

    def encrypt(self, pk: PublicKey, x, tag: bytes | str | None = None) -> Ciphertext:
        """Encrypt a real at level 0.

        ``tag`` makes the ciphertext reproducible (same key, tag and value give
        the same bytes); without it a random nonce is drawn.
        """
        word = self.encode(float(x))
        if isinstance(tag, str):
            tag = tag.encode()
        nonce = self._nonce(pk.key_id, b"enc", tag if tag is not None else None)
        return self._make(pk.key_id, 0, word, nonce)

    def decrypt(self, sk: SecretKey, ct: Ciphertext) -> float:
        self._check_secret(sk)
        if sk.key_id != ct.key_id:
            raise KeyMismatch("ciphertext was not produced under this secret key")
        return self.decode(self._open(ct))

    def add(self, a: Ciphertext, b: Ciphertext) -> Ciphertext:
        self._same_key(a, b)
        return self._make(a.key_id, max(a.level, b.level), self._open(a) + self._open(b),
                          self._nonce(a.key_id, b"add", a.payload, b.payload))

    def sub(self, a: Ciphertext, b: Ciphertext) -> Ciphertext:
        self._same_key(a, b)
        return self._make(a.key_id, max(a.level, b.level), self._open(a) - self._open(b),
                          self._nonce(a.key_id, b"sub", a.payload, b.payload))

    def mul(self, a: Ciphertext, b: Ciphertext, evk: EvalKey) -> Ciphertext:
        self._same_key(a, b)
        if evk.key_id != a.key_id:
            raise KeyMismatch("evaluation key belongs to a different key pair")
        level = self._next_level(a.level + b.level + 1)
        word = rdiv(self._open(a) * self._open(b), self._scale)
        return self._make(a.key_id, level, word,
                          self._nonce(a.key_id, b"mul", a.payload, b.payload))

    def mul_plain(self, a: Ciphertext, p) -> Ciphertext:
        level = self._next_level(a.level + 1)
        pw = encode_fixed(float(p), self._plain_bits)
        word = rdiv(self._open(a) * pw, 1 << self._plain_bits)
        return self._make(a.key_id, level, word,
                          self._nonce(a.key_id, b"mulp", a.payload, pw.to_bytes(16, "big", signed=True)))

    def sum(self, cts) -> Ciphertext:
        cts = list(cts)
        if not cts:
            raise EmptyInput("he_sum of an empty sequence")
        first = cts[0]
        for c in cts[1:]:
            self._same_key(first, c)
        word = 0
        for c in cts:
            word += self._open(c)
        return self._make(first.key_id, max(c.level for c in cts), word,
                          self._nonce(first.key_id, b"sum", *(c.payload for c in cts)))

    # -- helpers ---------------------------------------------------------
    def _make(self, key_id, level, word, nonce):
        return Ciphertext(key_id, level, self._seal(key_id, check_word(word), nonce))

    def _next_level(self, level):
        if level > self.params.depth_budget:
            raise DepthExhausted(
                f"level {level} exceeds depth budget {self.params.depth_budget}; "
                "ciphertexts need a refresh")
        return level

    @staticmethod
    def _same_key(a, b):
        if a.key_id != b.key_id:
            raise KeyMismatch("operands encrypted under different keys")

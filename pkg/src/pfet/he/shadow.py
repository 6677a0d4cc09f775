"""Deterministic reference backend.

Arithmetic is exact integer fixed-point with a level counter, no injected
noise. Payloads are ``nonce || (word XOR pad)`` where the 16-byte pad is
HMAC-SHA256 of the nonce under the key pair's secret, so the fixed-point
image of a value never shows up in serialised bytes. This is a stand-in
with the right interfaces and failure modes, not real cryptography.
"""
from __future__ import annotations

import hashlib
import hmac
import os

from ..errors import DecryptionError, KeyMismatch
from .base import EvalKey, KeyMaterial, Provider, PublicKey, SecretKey

WORD_BYTES = 16
NONCE_BYTES = 16


def _derive(label: bytes, secret: bytes) -> bytes:
    return hashlib.sha256(label + secret).digest()


class ShadowProvider(Provider):
    name = "shadow"

    def __init__(self, params=None):
        super().__init__(params)
        self._secrets: dict[bytes, bytes] = {}

    def keygen(self, seed=None) -> KeyMaterial:
        if seed is None:
            secret = os.urandom(32)
        else:
            secret = _derive(b"pfet/keygen/", repr(seed).encode())
        key_id = _derive(b"pfet/key-id/", secret)[:16]
        self._secrets[key_id] = secret
        return KeyMaterial(
            PublicKey(key_id, _derive(b"pfet/pk/", secret)),
            SecretKey(key_id, secret),
            EvalKey(key_id, _derive(b"pfet/evk/", secret)),
        )

    def _secret_for(self, key_id):
        try:
            return self._secrets[key_id]
        except KeyError:
            raise KeyMismatch(f"unknown key id {key_id.hex()}") from None

    def _check_secret(self, sk: SecretKey):
        if not hmac.compare_digest(self._secret_for(sk.key_id), sk.secret):
            raise DecryptionError("secret key does not match its key id")

    def _nonce(self, key_id, op, *parts):
        if any(p is None for p in parts):
            return os.urandom(NONCE_BYTES)
        h = hashlib.sha256(key_id + op)
        for p in parts:
            h.update(len(p).to_bytes(4, "big"))
            h.update(p)
        return h.digest()[:NONCE_BYTES]

    def _pad(self, key_id, nonce):
        digest = hmac.digest(self._secret_for(key_id), nonce, "sha256")
        return int.from_bytes(digest[:WORD_BYTES], "big")

    def _seal(self, key_id, word, nonce):
        raw = int.from_bytes(word.to_bytes(WORD_BYTES, "big", signed=True), "big")
        return nonce + (raw ^ self._pad(key_id, nonce)).to_bytes(WORD_BYTES, "big")

    def _open(self, ct):
        if len(ct.payload) != NONCE_BYTES + WORD_BYTES:
            raise DecryptionError("malformed shadow payload")
        nonce = ct.payload[:NONCE_BYTES]
        raw = int.from_bytes(ct.payload[NONCE_BYTES:], "big") ^ self._pad(ct.key_id, nonce)
        return int.from_bytes(raw.to_bytes(WORD_BYTES, "big"), "big", signed=True)


class PlainDebugProvider(ShadowProvider):
    """Same contract, but payloads carry the bare 64-bit fixed-point word.

    Only useful to show that the transcript scanner does catch leaks.
    """

    name = "plain-debug"

    def _nonce(self, key_id, op, *parts):
        return b""

    def _seal(self, key_id, word, nonce):
        return word.to_bytes(8, "big", signed=True)

    def _open(self, ct):
        self._secret_for(ct.key_id)
        return int.from_bytes(ct.payload, "big", signed=True)

"""Wire format of everything that crosses a party boundary.

Frame = iteration (u32 BE) | direction (u8) | body. Bodies are sequences of
ciphertext arrays, each ``count (u32 BE)`` followed by length-prefixed
ciphertexts in seller-index order. Msg1 appends the public and evaluation
keys, each as ``length (u32 BE) | bytes``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum

from ..errors import InputError
from ..he.base import KEY_ID_BYTES, Ciphertext, EvalKey, PublicKey

_HEADER = struct.Struct(">IB")
_U32 = struct.Struct(">I")


class Direction(IntEnum):
    SELLERS_TO_BUYERS = 0   # Msg1
    BUYERS_TO_SELLERS = 1   # Msg2
    BUYER_TO_AGGREGATOR = 2


@dataclass(frozen=True)
class Msg1:
    enc_prices: tuple[Ciphertext, ...]
    enc_states: tuple[Ciphertext, ...]
    public_key: PublicKey
    eval_key: EvalKey


@dataclass(frozen=True)
class Msg2:
    enc_demands: tuple[Ciphertext, ...]
    enc_states_next: tuple[Ciphertext, ...]


@dataclass(frozen=True)
class BuyerShare:
    """One buyer's encrypted contribution, sent to the aggregating buyer."""
    enc_purchases: tuple[Ciphertext, ...]
    enc_welfare_terms: tuple[Ciphertext, ...]


def _pack_array(cts):
    return _U32.pack(len(cts)) + b"".join(c.to_bytes() for c in cts)


def _unpack_array(buf, offset):
    (n,) = _U32.unpack_from(buf, offset)
    offset += _U32.size
    out = []
    for _ in range(n):
        ct, offset = Ciphertext.from_bytes(buf, offset)
        out.append(ct)
    return tuple(out), offset


def _pack_blob(b):
    return _U32.pack(len(b)) + b


def _unpack_blob(buf, offset):
    (n,) = _U32.unpack_from(buf, offset)
    start = offset + _U32.size
    if start + n > len(buf):
        raise InputError("truncated key blob")
    return bytes(buf[start:start + n]), start + n


def _split_key(blob, cls):
    if len(blob) <= KEY_ID_BYTES:
        raise InputError("key blob too short")
    return cls(blob[:KEY_ID_BYTES], blob[KEY_ID_BYTES:])


def encode_message(msg, iteration: int) -> bytes:
    if isinstance(msg, Msg1):
        body = (_pack_array(msg.enc_prices) + _pack_array(msg.enc_states)
                + _pack_blob(msg.public_key.to_bytes()) + _pack_blob(msg.eval_key.to_bytes()))
        direction = Direction.SELLERS_TO_BUYERS
    elif isinstance(msg, Msg2):
        body = _pack_array(msg.enc_demands) + _pack_array(msg.enc_states_next)
        direction = Direction.BUYERS_TO_SELLERS
    elif isinstance(msg, BuyerShare):
        body = _pack_array(msg.enc_purchases) + _pack_array(msg.enc_welfare_terms)
        direction = Direction.BUYER_TO_AGGREGATOR
    else:
        raise TypeError(f"not a protocol message: {type(msg).__name__}")
    return _HEADER.pack(iteration, direction) + body


def decode_message(data: bytes):
    """Inverse of :func:`encode_message`; returns ``(iteration, message)``."""
    try:
        iteration, direction = _HEADER.unpack_from(data, 0)
        off = _HEADER.size
        a, off = _unpack_array(data, off)
        b, off = _unpack_array(data, off)
        if direction == Direction.SELLERS_TO_BUYERS:
            pk, off = _unpack_blob(data, off)
            evk, off = _unpack_blob(data, off)
            msg = Msg1(a, b, _split_key(pk, PublicKey), _split_key(evk, EvalKey))
        elif direction == Direction.BUYERS_TO_SELLERS:
            msg = Msg2(a, b)
        elif direction == Direction.BUYER_TO_AGGREGATOR:
            msg = BuyerShare(a, b)
        else:
            raise InputError(f"unknown direction byte {direction}")
    except struct.error as exc:
        raise InputError("truncated message") from exc
    if off != len(data):
        raise InputError(f"{len(data) - off} trailing bytes after message")
    return iteration, msg


@dataclass(frozen=True)
class TranscriptEntry:
    direction: Direction
    iteration: int
    data: bytes = field(repr=False)
    sender: str = ""


class Transcript:
    """Append-only log of serialised boundary crossings."""

    def __init__(self):
        self._entries: list[TranscriptEntry] = []

    def record(self, direction, iteration, data, sender=""):
        self._entries.append(TranscriptEntry(Direction(direction), iteration, bytes(data), sender))

    def send(self, msg, iteration, sender=""):
        """Serialise ``msg``, log it, and hand back what the receiver parses."""
        data = encode_message(msg, iteration)
        self.record(data[4], iteration, data, sender)
        got_iteration, parsed = decode_message(data)
        assert got_iteration == iteration
        return parsed

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __getitem__(self, k):
        return self._entries[k]

    def total_bytes(self):
        return sum(len(e.data) for e in self._entries)

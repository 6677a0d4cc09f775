"""Homomorphic-arithmetic provider contract and backends."""
from .base import Ciphertext, EvalKey, KeyMaterial, Provider, PublicKey, SchemeParams, SecretKey
from .counting import CountingProvider
from .fixed import decode_fixed, encode_fixed
from .shadow import PlainDebugProvider, ShadowProvider

BACKENDS = {"shadow": ShadowProvider, "plain-debug": PlainDebugProvider}


def make_provider(name="shadow", params=None):
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown HE backend {name!r}; known: {sorted(BACKENDS)}") from None
    return cls(params)


__all__ = [
    "BACKENDS", "Ciphertext", "CountingProvider", "EvalKey", "KeyMaterial", "PlainDebugProvider",
    "Provider", "PublicKey", "SchemeParams", "SecretKey", "ShadowProvider", "decode_fixed",
    "encode_fixed", "make_provider",
]

"""Bidder pseudonyms and entry signatures.

Pseudonyms are user-generated: hash(auction_id || verification_key || nonce)
with a fresh 16-byte nonce, so they are collision-free per auction and
unlinkable to a real identity without the nonce.  Bidders keep the nonce.

Signatures go through a small scheme registry keyed by scheme_id so the
concrete algorithm can travel inside serialized records; the one provider
shipped is Ed25519 (deterministic signatures, which keeps seeded simulation
boards byte-identical).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey, Ed25519PublicKey)

from .errors import CryptoError, DomainError

PSEUDONYM_BYTES = 32
NONCE_BYTES = 16
DEFAULT_SCHEME = "ed25519"


@dataclass(frozen=True)
class SigningKeypair:
    scheme_id: str
    public_key: bytes
    private_key: bytes


class Ed25519Scheme:
    scheme_id = "ed25519"

    def generate(self, rng) -> SigningKeypair:
        seed = rng.token_bytes(32)
        priv = Ed25519PrivateKey.from_private_bytes(seed)
        return SigningKeypair(
            scheme_id=self.scheme_id,
            public_key=priv.public_key().public_bytes_raw(),
            private_key=seed,
        )

    def sign(self, private_key: bytes, message: bytes) -> bytes:
        try:
            return Ed25519PrivateKey.from_private_bytes(private_key).sign(message)
        except ValueError as exc:
            raise CryptoError("malformed signing key") from exc

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
            return True
        except (InvalidSignature, ValueError):
            return False


_SCHEMES = {Ed25519Scheme.scheme_id: Ed25519Scheme()}


def get_scheme(scheme_id: str):
    try:
        return _SCHEMES[scheme_id]
    except KeyError:
        raise DomainError(f"unknown signature scheme: {scheme_id!r}") from None


def generate_signing_keypair(rng, scheme_id: str = DEFAULT_SCHEME) -> SigningKeypair:
    return get_scheme(scheme_id).generate(rng)


def sign_entry(keypair: SigningKeypair, message: bytes) -> bytes:
    return get_scheme(keypair.scheme_id).sign(keypair.private_key, message)


def verify_signature(scheme_id: str, public_key: bytes, message: bytes,
                     signature: bytes) -> bool:
    return get_scheme(scheme_id).verify(public_key, message, signature)


def generate_pseudonym(verification_key: bytes, nonce: bytes,
                       auction_id: str) -> str:
    """32-byte pseudonym, hex-encoded, unique per (auction, key, nonce)."""
    if len(nonce) != NONCE_BYTES:
        raise DomainError(f"nonce must be {NONCE_BYTES} bytes")
    digest = hashlib.sha256(
        auction_id.encode("utf-8") + verification_key + nonce).digest()
    return digest.hex()


# --- key files -------------------------------------------------------------

def save_signing_keypair(keypair: SigningKeypair, path: str) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w", encoding="ascii") as fh:
        json.dump({
            "scheme": keypair.scheme_id,
            "vk": keypair.public_key.hex(),
            "sk": keypair.private_key.hex(),
        }, fh, sort_keys=True)
        fh.write("\n")


def load_signing_keypair(path: str) -> SigningKeypair:
    with open(path, encoding="ascii") as fh:
        obj = json.load(fh)
    return SigningKeypair(
        scheme_id=obj["scheme"],
        public_key=bytes.fromhex(obj["vk"]),
        private_key=bytes.fromhex(obj["sk"]),
    )

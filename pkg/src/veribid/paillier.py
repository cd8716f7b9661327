"""Paillier cryptosystem with the homomorphic toolbox the auction relies on.

Keys use the g = n + 1 variant: with phi = (p-1)(q-1) and mu = phi^-1 mod n,

    encrypt:  c = g^m * r^n mod n^2      (r in Z*_n is the "help value")
    decrypt:  m = L(c^phi mod n^2) * mu mod n,   L(u) = (u - 1) // n

Ciphertexts, plaintexts and help values are plain ints; only the key
material gets wrapped.  Multiplying ciphertexts adds plaintexts, raising a
ciphertext to a scalar multiplies its plaintext, and the key holder can
recover the help value r from (c, m) — the property that lets an auctioneer
open a committed bid for public re-encryption checking.

All operations are pure; entropy comes in through an explicit handle.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import cached_property

from .encoding import hex_to_int, int_to_hex
from .errors import CryptoError, DomainError, KeyGenerationError

try:
    from gmpy2 import powmod as _gmpy_powmod

    def powmod(base: int, exp: int, mod: int) -> int:
        return int(_gmpy_powmod(base, exp, mod))
except ImportError:  # pragma: no cover - exercised only without gmpy2
    powmod = pow

PRODUCTION_BIT_LENGTHS = (512, 1024, 2048)
MIN_TEST_BITS = 16
MILLER_RABIN_ROUNDS = 40  # error probability <= 4^-40 = 2^-80


def invmod(value: int, modulus: int) -> int:
    try:
        return pow(value, -1, modulus)
    except ValueError as exc:
        raise CryptoError(f"value not invertible modulo {modulus}") from exc


@dataclass(frozen=True)
class PaillierPublicKey:
    n: int
    g: int
    bit_length: int

    def __post_init__(self):
        if self.g != self.n + 1:
            raise DomainError("this implementation fixes g = n + 1")
        if self.n < 4 or self.n % 2 == 0:
            raise DomainError("n must be an odd composite")
        if self.bit_length != self.n.bit_length():
            raise DomainError("bit_length does not match n")

    @cached_property
    def nsquare(self) -> int:
        return self.n * self.n

    def to_json_obj(self) -> dict:
        return {"n": int_to_hex(self.n), "g": int_to_hex(self.g)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PaillierPublicKey":
        n = hex_to_int(obj["n"])
        g = hex_to_int(obj["g"])
        return cls(n=n, g=g, bit_length=n.bit_length())


@dataclass(frozen=True)
class PaillierPrivateKey:
    p: int
    q: int
    phi: int
    mu: int

    def __post_init__(self):
        n = self.p * self.q
        if self.p == self.q:
            raise DomainError("p and q must be distinct")
        if self.phi != (self.p - 1) * (self.q - 1):
            raise DomainError("phi must equal (p-1)(q-1)")
        if (self.mu * self.phi) % n != 1:
            raise DomainError("mu is not the inverse of phi modulo n")

    @property
    def n(self) -> int:
        return self.p * self.q

    def to_json_obj(self) -> dict:
        return {"p": int_to_hex(self.p), "q": int_to_hex(self.q)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PaillierPrivateKey":
        return keypair_from_primes(hex_to_int(obj["p"]), hex_to_int(obj["q"]))[1]


def keypair_from_primes(p: int, q: int) -> tuple[PaillierPublicKey, PaillierPrivateKey]:
    """Assemble a keypair from known primes (tiny keys for tests included)."""
    n = p * q
    phi = (p - 1) * (q - 1)
    if math.gcd(n, phi) != 1:
        raise DomainError("gcd(n, phi) must be 1 (pick primes with p ∤ q-1)")
    mu = invmod(phi, n)
    pub = PaillierPublicKey(n=n, g=n + 1, bit_length=n.bit_length())
    priv = PaillierPrivateKey(p=p, q=q, phi=phi, mu=mu)
    return pub, priv


def generate_keypair(bit_length: int, rng, *, test_mode: bool = False,
                     ) -> tuple[PaillierPublicKey, PaillierPrivateKey]:
    """Generate a fresh keypair with p and q of bit_length/2 bits each.

    Production mode accepts only the supported key sizes; test mode allows
    any even size down to 16 bits so exhaustive oracles stay cheap.
    """
    if test_mode:
        if bit_length < MIN_TEST_BITS or bit_length % 2:
            raise DomainError(
                f"test keys need an even bit length >= {MIN_TEST_BITS}")
    elif bit_length not in PRODUCTION_BIT_LENGTHS:
        raise DomainError(
            f"production keys must be one of {PRODUCTION_BIT_LENGTHS} bits")
    half = bit_length // 2
    try:
        while True:
            p = _random_prime(half, rng)
            q = _random_prime(half, rng)
            if p == q:
                continue
            n = p * q
            if math.gcd(n, (p - 1) * (q - 1)) != 1:
                continue
            return keypair_from_primes(p, q)
    except (OSError, ValueError) as exc:
        raise KeyGenerationError("entropy source failed") from exc


def _sieve(limit: int) -> tuple[int, ...]:
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(limit ** 0.5) + 1):
        if flags[i]:
            flags[i * i:: i] = bytes(len(flags[i * i:: i]))
    return tuple(i for i, f in enumerate(flags) if f)


_SMALL_PRIMES = _sieve(1000)


def _is_probable_prime(candidate: int, rng, rounds: int = MILLER_RABIN_ROUNDS) -> bool:
    if candidate < 2:
        return False
    for sp in _SMALL_PRIMES:
        if candidate % sp == 0:
            return candidate == sp
    d = candidate - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        base = rng.randrange(2, candidate - 1)
        x = powmod(base, d, candidate)
        if x in (1, candidate - 1):
            continue
        for _ in range(s - 1):
            x = powmod(x, 2, candidate)
            if x == candidate - 1:
                break
        else:
            return False
    return True


def _random_prime(bits: int, rng) -> int:
    # Top two bits set so the product of two such primes has exactly 2*bits.
    while True:
        candidate = rng.getrandbits(bits) | (1 << (bits - 1)) | (1 << (bits - 2)) | 1
        if _is_probable_prime(candidate, rng):
            return candidate


def random_help_value(pk: PaillierPublicKey, rng) -> int:
    """Draw r uniformly from Z*_n."""
    while True:
        r = rng.randrange(1, pk.n)
        if math.gcd(r, pk.n) == 1:
            return r


def _check_help_value(pk: PaillierPublicKey, r: int) -> None:
    if not 1 <= r < pk.n or math.gcd(r, pk.n) != 1:
        raise CryptoError(f"invalid help value: {r}")


def validate_ciphertext(pk: PaillierPublicKey, c: int) -> int:
    if not 1 <= c < pk.nsquare or math.gcd(c, pk.n) != 1:
        raise CryptoError("malformed ciphertext: not a unit modulo n^2")
    return c


def _g_pow(pk: PaillierPublicKey, m: int) -> int:
    # (n+1)^m = 1 + m*n (mod n^2)
    return (1 + (m % pk.n) * pk.n) % pk.nsquare


def encrypt(pk: PaillierPublicKey, m: int, r: int) -> int:
    """c = g^m * r^n mod n^2; deterministic given (m, r)."""
    if not 0 <= m < pk.n:
        raise DomainError(f"plaintext out of range [0, n): {m}")
    _check_help_value(pk, r)
    return (_g_pow(pk, m) * powmod(r, pk.n, pk.nsquare)) % pk.nsquare


def decrypt(pk: PaillierPublicKey, sk: PaillierPrivateKey, c: int) -> int:
    """m = L(c^phi mod n^2) * mu mod n with L(u) = (u - 1) // n."""
    validate_ciphertext(pk, c)
    u = powmod(c, sk.phi, pk.nsquare)
    return ((u - 1) // pk.n) * sk.mu % pk.n


def recover_randomness(pk: PaillierPublicKey, sk: PaillierPrivateKey,
                       c: int, m: int) -> int:
    """Recover the help value r with encrypt(pk, m, r) = c.

    Strips the g^m factor, leaving r^n mod n^2; reducing mod n and taking
    the n-th root via the exponent n^-1 mod phi yields r.  Requires that c
    actually decrypts to m.
    """
    validate_ciphertext(pk, c)
    if decrypt(pk, sk, c) != m:
        raise CryptoError("ciphertext does not decrypt to the claimed plaintext")
    rn = (c * invmod(_g_pow(pk, m), pk.nsquare)) % pk.nsquare % pk.n
    return powmod(rn, invmod(pk.n, sk.phi), pk.n)


def hom_add(pk: PaillierPublicKey, c1: int, c2: int) -> int:
    """Ciphertext product; decrypts to the plaintext sum mod n."""
    return (c1 * c2) % pk.nsquare


def hom_scalar_mul(pk: PaillierPublicKey, c: int, k: int) -> int:
    """Ciphertext power; decrypts to k times the plaintext mod n."""
    if k < 0:
        raise DomainError("scalar must be non-negative")
    return powmod(c, k, pk.nsquare)


def hom_add_const(pk: PaillierPublicKey, c: int, k: int) -> int:
    """Decrypts to plaintext + k mod n; costs one modular multiplication."""
    if not 0 <= k < pk.n:
        raise DomainError(f"constant out of range [0, n): {k}")
    return (c * _g_pow(pk, k)) % pk.nsquare


def cipher_invert(pk: PaillierPublicKey, c: int) -> int:
    """Group inverse mod n^2; decrypts to (n - m) mod n."""
    return invmod(c, pk.nsquare)


def rerandomize(pk: PaillierPublicKey, c: int, r2: int) -> int:
    """Self-blinding: same plaintext, help value multiplied by r2."""
    _check_help_value(pk, r2)
    return (c * powmod(r2, pk.n, pk.nsquare)) % pk.nsquare


# --- key files -------------------------------------------------------------

def save_public_key(pk: PaillierPublicKey, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(pk.to_json_obj(), fh, sort_keys=True)
        fh.write("\n")


def load_public_key(path: str) -> PaillierPublicKey:
    with open(path, encoding="ascii") as fh:
        return PaillierPublicKey.from_json_obj(json.load(fh))


def save_private_key(sk: PaillierPrivateKey, path: str) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w", encoding="ascii") as fh:
        json.dump(sk.to_json_obj(), fh, sort_keys=True)
        fh.write("\n")


def load_private_key(path: str) -> PaillierPrivateKey:
    with open(path, encoding="ascii") as fh:
        return PaillierPrivateKey.from_json_obj(json.load(fh))

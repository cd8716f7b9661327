"""Unit tests for the Paillier layer.

Expected values for the tiny p=5, q=7 key were computed with an independent
modular-exponentiation oracle (plain pow/extended Euclid) before the
implementation existed and are frozen here.
"""

import math

import pytest

from veribid import paillier
from veribid.entropy import SeededEntropy
from veribid.errors import CryptoError, DomainError


def test_keypair_from_primes_tiny():
    pk, sk = paillier.keypair_from_primes(5, 7)
    assert (pk.n, pk.g) == (35, 36)
    assert (sk.phi, sk.mu) == (24, 19)  # 24*19 = 456 = 13*35 + 1
    assert (sk.mu * sk.phi) % pk.n == 1


def test_keygen_invariants():
    rng = SeededEntropy(101)
    pk, sk = paillier.generate_keypair(64, rng, test_mode=True)
    assert sk.p * sk.q == pk.n
    assert sk.p.bit_length() == sk.q.bit_length() == 32
    assert pk.n.bit_length() == 64
    assert (sk.mu * sk.phi) % pk.n == 1
    assert math.gcd(pk.n, sk.phi) == 1


def test_keygen_distinct_moduli():
    rng = SeededEntropy(7)
    pk1, _ = paillier.generate_keypair(64, rng, test_mode=True)
    pk2, _ = paillier.generate_keypair(64, rng, test_mode=True)
    assert pk1.n != pk2.n


def test_keygen_rejects_bad_sizes():
    rng = SeededEntropy(0)
    with pytest.raises(DomainError):
        paillier.generate_keypair(768, rng)  # not a supported production size
    with pytest.raises(DomainError):
        paillier.generate_keypair(8, rng, test_mode=True)
    with pytest.raises(DomainError):
        paillier.generate_keypair(17, rng, test_mode=True)


def test_encrypt_zero_is_one(tiny_keys):
    pk, _ = tiny_keys
    assert paillier.encrypt(pk, 0, 1) == 1


def test_encrypt_frozen_value(tiny_keys):
    # 36^3 * 2^35 mod 1225 = 683, computed with an independent oracle.
    pk, _ = tiny_keys
    assert paillier.encrypt(pk, 3, 2) == 683


def test_encrypt_rejects_bad_inputs(tiny_keys):
    pk, _ = tiny_keys
    with pytest.raises(DomainError):
        paillier.encrypt(pk, 35, 2)
    with pytest.raises(CryptoError):
        paillier.encrypt(pk, 3, 5)  # gcd(5, 35) != 1
    with pytest.raises(CryptoError):
        paillier.encrypt(pk, 3, 0)


def test_roundtrip_exhaustive_tiny(tiny_keys):
    pk, sk = tiny_keys
    for m in range(pk.n):
        for r in range(1, pk.n):
            if math.gcd(r, pk.n) != 1:
                continue
            assert paillier.decrypt(pk, sk, paillier.encrypt(pk, m, r)) == m


def test_decrypt_one_is_zero(tiny_keys):
    pk, sk = tiny_keys
    assert paillier.decrypt(pk, sk, 1) == 0


def test_decrypt_rejects_non_unit(tiny_keys):
    pk, sk = tiny_keys
    with pytest.raises(CryptoError):
        paillier.decrypt(pk, sk, 35)  # shares a factor with n
    with pytest.raises(CryptoError):
        paillier.decrypt(pk, sk, 0)


def test_roundtrip_randomized_small(small_keys):
    pk, sk = small_keys
    rng = SeededEntropy(2024)
    for _ in range(200):
        m = rng.randrange(pk.n)
        r = paillier.random_help_value(pk, rng)
        assert paillier.decrypt(pk, sk, paillier.encrypt(pk, m, r)) == m


def test_probabilistic_encryption_distinct(tiny_keys):
    pk, _ = tiny_keys
    seen = set()
    for r in range(1, pk.n):
        if math.gcd(r, pk.n) != 1:
            continue
        c = paillier.encrypt(pk, 3, r)
        assert c not in seen
        seen.add(c)


def test_recover_randomness(tiny_keys):
    pk, sk = tiny_keys
    c = paillier.encrypt(pk, 3, 2)
    assert paillier.recover_randomness(pk, sk, c, 3) == 2
    assert paillier.recover_randomness(pk, sk, 1, 0) == 1


def test_recover_randomness_trials(small_keys):
    pk, sk = small_keys
    rng = SeededEntropy(55)
    for _ in range(100):
        m = rng.randrange(pk.n)
        r = paillier.random_help_value(pk, rng)
        c = paillier.encrypt(pk, m, r)
        assert paillier.recover_randomness(pk, sk, c, m) == r


def test_recover_randomness_rejects_wrong_plaintext(tiny_keys):
    pk, sk = tiny_keys
    c = paillier.encrypt(pk, 3, 2)
    with pytest.raises(CryptoError):
        paillier.recover_randomness(pk, sk, c, 4)


def test_hom_add(tiny_keys):
    pk, sk = tiny_keys
    c = paillier.hom_add(pk, paillier.encrypt(pk, 2, 2), paillier.encrypt(pk, 3, 4))
    assert paillier.decrypt(pk, sk, c) == 5


def test_hom_add_identity_and_commutativity(tiny_keys):
    pk, _ = tiny_keys
    c1 = paillier.encrypt(pk, 7, 3)
    c2 = paillier.encrypt(pk, 9, 11)
    assert paillier.hom_add(pk, c1, paillier.encrypt(pk, 0, 1)) == c1
    assert paillier.hom_add(pk, c1, c2) == paillier.hom_add(pk, c2, c1)


def test_hom_scalar_mul(tiny_keys):
    pk, sk = tiny_keys
    c = paillier.encrypt(pk, 7, 2)
    assert paillier.hom_scalar_mul(pk, c, 1) == c
    assert paillier.decrypt(pk, sk, paillier.hom_scalar_mul(pk, c, 0)) == 0
    assert paillier.decrypt(pk, sk, paillier.hom_scalar_mul(pk, c, 3)) == 21
    with pytest.raises(DomainError):
        paillier.hom_scalar_mul(pk, c, -1)


def test_hom_add_const(tiny_keys):
    pk, sk = tiny_keys
    c = paillier.encrypt(pk, 11, 2)
    assert paillier.hom_add_const(pk, c, 0) == c
    assert paillier.decrypt(pk, sk, paillier.hom_add_const(pk, c, 1)) == 12
    assert paillier.hom_add_const(pk, c, 4) == paillier.hom_add(pk, c, paillier.encrypt(pk, 4, 1))


def test_cipher_invert(tiny_keys):
    pk, sk = tiny_keys
    cx = paillier.encrypt(pk, 9, 2)
    cy = paillier.encrypt(pk, 4, 3)
    assert (cx * paillier.cipher_invert(pk, cx)) % pk.nsquare == 1
    diff = paillier.hom_add(pk, cx, paillier.cipher_invert(pk, cy))
    assert paillier.decrypt(pk, sk, diff) == 5
    assert paillier.cipher_invert(pk, paillier.encrypt(pk, 0, 1)) == 1


def test_rerandomize(tiny_keys):
    pk, sk = tiny_keys
    c = paillier.encrypt(pk, 6, 2)
    assert paillier.rerandomize(pk, c, 1) == c
    c2 = paillier.rerandomize(pk, c, 3)
    assert c2 != c
    assert paillier.decrypt(pk, sk, c2) == 6
    assert c2 == paillier.encrypt(pk, 6, 6)  # helps multiply: 2*3 mod 35


def test_key_file_roundtrip(tmp_path, small_keys):
    pk, sk = small_keys
    pk_path = tmp_path / "k.pk.json"
    sk_path = tmp_path / "k.sk.json"
    paillier.save_public_key(pk, str(pk_path))
    paillier.save_private_key(sk, str(sk_path))
    assert paillier.load_public_key(str(pk_path)) == pk
    assert paillier.load_private_key(str(sk_path)) == sk
    assert (sk_path.stat().st_mode & 0o777) == 0o600

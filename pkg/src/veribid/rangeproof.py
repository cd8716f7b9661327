"""Bounded-value proofs over Paillier ciphertexts.

To show that a committed ciphertext C = E(x, r) hides some x < 2^t, the
prover publishes a *test set*: 2t fresh encryptions in which each power of
two 1, 2, ..., 2^(t-1) appears exactly once and the remaining t plaintexts
are zero, in an order only the prover knows.  Writing x as a sum of
distinct powers of two, the prover hands over the t elements consisting of
exactly those powers padded with zero-encryptions, together with a combined
help value

    s = r^-1 * s_j1 * ... * s_jt  (mod n).

Anyone can then check

    C^-1 * G_j1 * ... * G_jt  =  s^n  (mod n^2)

i.e. the handover multiplies out to an encryption of zero under help value
s, which can only happen when the selected plaintexts sum to x.  The
handover always has exactly t elements, so not even the number of set bits
in x leaks, and the random s_ji mask r completely.

Inequalities reduce to the same primitive: x >= y is a range proof for the
publicly computable difference cipher E(x) * E(y)^-1, and x > y is
x >= y + 1 via the free ciphertext increment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import paillier
from .encoding import hex_to_int, int_to_hex
from .errors import DomainError, ProofError
from .paillier import PaillierPublicKey

__all__ = [
    "TestSet", "TestSetSecret", "RangeProof", "GeqProof",
    "build_test_set", "prove_range", "verify_range", "range_failure",
    "prove_geq", "prove_strict_gt", "verify_geq", "geq_failure",
]


@dataclass(frozen=True)
class TestSet:
    """The published 2t-element commitment a range proof selects from."""

    claimed_cipher: int
    t: int
    elements: tuple[int, ...]

    def to_json_obj(self) -> dict:
        return {
            "cipher": int_to_hex(self.claimed_cipher),
            "t": self.t,
            "elements": [int_to_hex(e) for e in self.elements],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TestSet":
        return cls(
            claimed_cipher=hex_to_int(obj["cipher"]),
            t=int(obj["t"]),
            elements=tuple(hex_to_int(e) for e in obj["elements"]),
        )


@dataclass(frozen=True)
class TestSetSecret:
    """Prover-only side table aligned with TestSet.elements."""

    plaintexts: tuple[int, ...]
    helps: tuple[int, ...]


@dataclass(frozen=True)
class RangeProof:
    """The handover: t test-set indices plus the combined help value s."""

    testset_ref: str
    handover_indices: tuple[int, ...]
    help_value_s: int

    def to_json_obj(self) -> dict:
        return {
            "testset_id": self.testset_ref,
            "indices": list(self.handover_indices),
            "s": int_to_hex(self.help_value_s),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RangeProof":
        return cls(
            testset_ref=obj["testset_id"],
            handover_indices=tuple(int(i) for i in obj["indices"]),
            help_value_s=hex_to_int(obj["s"]),
        )

    def with_ref(self, ref: str) -> "RangeProof":
        return replace(self, testset_ref=ref)


@dataclass(frozen=True)
class GeqProof:
    """Proof that minuend >= subtrahend, as a range proof on the difference."""

    minuend_cipher: int
    subtrahend_cipher: int
    difference_proof: RangeProof

    def to_json_obj(self) -> dict:
        return {
            "minuend": int_to_hex(self.minuend_cipher),
            "subtrahend": int_to_hex(self.subtrahend_cipher),
            "proof": self.difference_proof.to_json_obj(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "GeqProof":
        return cls(
            minuend_cipher=hex_to_int(obj["minuend"]),
            subtrahend_cipher=hex_to_int(obj["subtrahend"]),
            difference_proof=RangeProof.from_json_obj(obj["proof"]),
        )


def _check_bound(pk: PaillierPublicKey, t: int) -> None:
    if t < 1:
        raise DomainError("t must be at least 1")
    if 2 ** (t + 1) >= pk.n:  # 2^t < n/2
        raise DomainError(f"2^{t} is not below n/2 for this key")


def build_test_set(pk: PaillierPublicKey, c: int, t: int, rng,
                   ) -> tuple[TestSet, TestSetSecret]:
    """Fresh test set for the claim that c encrypts a value below 2^t.

    Each power of two below 2^t is encrypted exactly once, t zeros fill the
    rest, and the order is a uniform Fisher-Yates shuffle of the rng.  The
    returned secret table stays with the prover.
    """
    paillier.validate_ciphertext(pk, c)
    _check_bound(pk, t)
    plain = [1 << i for i in range(t)] + [0] * t
    rows = []
    for u in plain:
        s = paillier.random_help_value(pk, rng)
        rows.append((u, s, paillier.encrypt(pk, u, s)))
    rng.shuffle(rows)
    return (
        TestSet(claimed_cipher=c, t=t, elements=tuple(e for _, _, e in rows)),
        TestSetSecret(plaintexts=tuple(u for u, _, _ in rows),
                      helps=tuple(s for _, s, _ in rows)),
    )


def prove_range(pk: PaillierPublicKey, c: int, x: int, r: int,
                ts: TestSet, secret: TestSetSecret, rng,
                *, testset_ref: str = "") -> RangeProof:
    """Hand over the subset of ts showing that c = E(x, r) with x < 2^t.

    Selects the elements encrypting the powers of two in x's binary
    representation and pads with zero-encryptions (chosen uniformly among
    the t zeros) to exactly t indices.
    """
    if not 0 <= x < 2 ** ts.t:
        raise ProofError(f"value {x} is outside [0, 2^{ts.t}): proof impossible")
    if paillier.encrypt(pk, x, r) != c:
        raise ProofError("ciphertext does not match the claimed (x, r)")
    if ts.claimed_cipher != c:
        raise ProofError("test set was built for a different ciphertext")
    if len(ts.elements) != 2 * ts.t or len(secret.plaintexts) != 2 * ts.t:
        raise ProofError("test set and secret table are inconsistent")

    wanted = {1 << i for i in range(ts.t) if x >> i & 1}
    power_indices = [i for i, u in enumerate(secret.plaintexts) if u in wanted]
    zero_indices = [i for i, u in enumerate(secret.plaintexts) if u == 0]
    if len(power_indices) != len(wanted) or len(zero_indices) != ts.t:
        raise ProofError("secret table does not describe a valid test set")
    padding = rng.sample(zero_indices, ts.t - len(power_indices))
    indices = tuple(sorted(power_indices + padding))

    s = paillier.invmod(r, pk.n)
    for j in indices:
        s = (s * secret.helps[j]) % pk.n
    return RangeProof(testset_ref=testset_ref, handover_indices=indices,
                      help_value_s=s)


def range_failure(pk: PaillierPublicKey, c: int, ts: TestSet,
                  proof: RangeProof) -> str | None:
    """Reason the proof does not establish c < 2^t, or None if it does.

    Public check: needs no private key.
    """
    t = ts.t
    if t < 1 or len(ts.elements) != 2 * t:
        return "testset-structure"
    if ts.claimed_cipher != c:
        return "cipher-binding"
    idx = proof.handover_indices
    if len(idx) != t or len(set(idx)) != t:
        return "handover-structure"
    if any(not 0 <= j < 2 * t for j in idx):
        return "handover-structure"
    s = proof.help_value_s
    if not 1 <= s < pk.n or math.gcd(s, pk.n) != 1:
        return "help-value"
    try:
        paillier.validate_ciphertext(pk, c)
        for j in idx:
            paillier.validate_ciphertext(pk, ts.elements[j])
    except Exception:
        return "malformed-cipher"
    lhs = paillier.invmod(c, pk.nsquare)
    for j in idx:
        lhs = (lhs * ts.elements[j]) % pk.nsquare
    if lhs != paillier.powmod(s, pk.n, pk.nsquare):
        return "equation"
    return None


def verify_range(pk: PaillierPublicKey, c: int, ts: TestSet,
                 proof: RangeProof) -> bool:
    return range_failure(pk, c, ts, proof) is None


def prove_geq(pk: PaillierPublicKey, cx: int, cy: int, x: int, y: int,
              rx: int, ry: int, t: int, rng, *, strict: bool = False,
              ) -> tuple[TestSet, GeqProof]:
    """Prove x >= y (or x > y when strict) for cx = E(x, rx), cy = E(y, ry).

    Both sides can compute the difference cipher E(x - y) = cx * cy^-1; the
    proof is a range proof that the difference lies in [0, 2^t).  Strict
    comparison proves x >= y + 1 against the freely incremented cy.
    """
    _check_bound(pk, t)
    if not (0 <= x < 2 ** t and 0 <= y < 2 ** t):
        raise ProofError("operands must lie in [0, 2^t)")
    if y == pk.n - 1:
        raise ProofError("y = n - 1 is excluded")  # vacuous given the bound
    y_eff, cy_eff = y, cy
    if strict:
        if x <= y:
            raise ProofError(f"cannot prove {x} > {y}")
        y_eff, cy_eff = y + 1, paillier.hom_add_const(pk, cy, 1)
    elif x < y:
        raise ProofError(f"cannot prove {x} >= {y}: difference wraps modulo n")
    diff_cipher = paillier.hom_add(pk, cx, paillier.cipher_invert(pk, cy_eff))
    diff_help = (rx * paillier.invmod(ry, pk.n)) % pk.n
    ts, secret = build_test_set(pk, diff_cipher, t, rng)
    diff_proof = prove_range(pk, diff_cipher, x - y_eff, diff_help,
                             ts, secret, rng)
    return ts, GeqProof(minuend_cipher=cx, subtrahend_cipher=cy,
                        difference_proof=diff_proof)


def prove_strict_gt(pk: PaillierPublicKey, cx: int, cy: int, x: int, y: int,
                    rx: int, ry: int, t: int, rng) -> tuple[TestSet, GeqProof]:
    if y + 1 >= pk.n:
        raise ProofError("y + 1 must stay below n")
    return prove_geq(pk, cx, cy, x, y, rx, ry, t, rng, strict=True)


def geq_failure(pk: PaillierPublicKey, cx: int, cy: int, ts: TestSet,
                proof: GeqProof, strict: bool = False) -> str | None:
    """Reason the proof does not establish x >= y (x > y when strict)."""
    if proof.minuend_cipher != cx or proof.subtrahend_cipher != cy:
        return "operand-binding"
    cy_eff = paillier.hom_add_const(pk, cy, 1) if strict else cy
    try:
        diff = paillier.hom_add(pk, cx, paillier.cipher_invert(pk, cy_eff))
    except Exception:
        return "malformed-cipher"
    if ts.claimed_cipher != diff:
        return "difference-binding"
    return range_failure(pk, diff, ts, proof.difference_proof)


def verify_geq(pk: PaillierPublicKey, cx: int, cy: int, ts: TestSet,
               proof: GeqProof, strict: bool = False) -> bool:
    return geq_failure(pk, cx, cy, ts, proof, strict) is None

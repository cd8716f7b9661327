"""Auction orchestration over the bulletin board.

Four phases: the auctioneer announces signed terms; registered pseudonyms
submit sealed bids (each attribute, the price and the bidder-computed
encoded score encrypted separately) strictly before the deadline; after the
deadline the auctioneer opens every bid, checks the claimed score against
its own recomputation, recovers the score ciphers' help values and posts
range proofs, inequality proofs and the outcome; finally anyone can replay
:func:`verify_outcome` from the board alone.

The proofs always bind to the bidder-submitted score ciphers (signed and
non-repudiable); the auctioneer's recomputation is a consistency gate that
disqualifies mismatching bids without revealing their plaintexts.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

from . import paillier, rangeproof, scoring
from .bulletin import AUCTIONEER, BulletinBoard, BulletinEntry, Receipt
from .encoding import hex_to_int, int_to_hex, parse_timestamp
from .errors import AuctionError, BoardError, DomainError, RejectedError
from .identity import SigningKeypair, generate_pseudonym, generate_signing_keypair
from .paillier import PaillierPrivateKey
from .rangeproof import GeqProof, RangeProof, TestSet
from .scoring import AuctionTerms, Bid

NONCE_BYTES = 16


@dataclass(frozen=True)
class SealedBid:
    """A bid as it sits on the board: ciphers only, signed by its author."""

    pseudonym: str
    attribute_ciphers: tuple[int, ...]  # K attribute ciphers, then the price
    score_cipher: int
    signature: bytes
    seq: int


@dataclass(frozen=True)
class Outcome:
    """Everything open_and_prove publishes; None winner when no bid survived."""

    winner_pseudonym: Optional[str]
    winner_score: Optional[int]
    winner_score_help: Optional[int]
    winner_bid_seq: Optional[int]
    per_bid_range_proofs: tuple[tuple[str, TestSet, RangeProof], ...]
    per_loser_proofs: tuple[tuple[str, TestSet, GeqProof], ...]
    disqualified: tuple[str, ...]
    entry_seq: int


@dataclass(frozen=True)
class Verdict:
    valid: bool
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.valid


def _invalid(reason: str) -> Verdict:
    return Verdict(valid=False, reason=reason)


VALID = Verdict(valid=True)


# --- initialization phase ---------------------------------------------------

def announce(board: BulletinBoard, terms: AuctionTerms,
             auctioneer_keys: SigningKeypair) -> BulletinEntry:
    """Publish the signed auction terms as the board's first entry."""
    if board.first("announce") is not None:
        raise RejectedError("this board already carries an announced auction")
    if board.entries:
        raise RejectedError("announce must be the first board entry")
    entry, _ = board.append("announce", {
        "terms": terms.to_json_obj(),
        "auctioneer_vk": auctioneer_keys.public_key.hex(),
        "scheme": auctioneer_keys.scheme_id,
    }, AUCTIONEER, auctioneer_keys)
    return entry


def load_terms(board: BulletinBoard) -> AuctionTerms:
    return AuctionTerms.from_json_obj(board.announced_terms_obj())


def registered_bidders(board: BulletinBoard) -> dict[str, bytes]:
    return {e.payload["pseudonym"]: bytes.fromhex(e.payload["vk"])
            for e in board.find("register")}


def register(board: BulletinBoard, terms: AuctionTerms, pseudonym: str,
             keypair: SigningKeypair) -> BulletinEntry:
    """Bind a pseudonym to its verification key on the board."""
    if board.clock() >= terms.deadline:
        raise RejectedError("registration closed: deadline passed")
    if pseudonym in registered_bidders(board):
        raise RejectedError("pseudonym already registered; regenerate with a "
                            "fresh nonce")
    entry, _ = board.append("register", {
        "pseudonym": pseudonym,
        "vk": keypair.public_key.hex(),
        "scheme": keypair.scheme_id,
    }, pseudonym, keypair)
    return entry


@dataclass(frozen=True)
class BidderIdentity:
    pseudonym: str
    keypair: SigningKeypair
    nonce: bytes


def new_bidder(board: BulletinBoard, terms: AuctionTerms, rng,
               keypair: Optional[SigningKeypair] = None) -> BidderIdentity:
    """Generate keys and a pseudonym, then register (fresh nonce on clash)."""
    if keypair is None:
        keypair = generate_signing_keypair(rng)
    while True:
        nonce = rng.token_bytes(NONCE_BYTES)
        pseudonym = generate_pseudonym(keypair.public_key, nonce,
                                       terms.auction_id)
        try:
            register(board, terms, pseudonym, keypair)
        except RejectedError as exc:
            if "already registered" in str(exc):
                continue
            raise
        return BidderIdentity(pseudonym=pseudonym, keypair=keypair, nonce=nonce)


# --- bidding phase ----------------------------------------------------------

def _parse_sealed_bid(entry: BulletinEntry) -> SealedBid:
    payload = entry.payload
    return SealedBid(
        pseudonym=payload["pseudonym"],
        attribute_ciphers=tuple(hex_to_int(c)
                                for c in payload["attribute_ciphers"]),
        score_cipher=hex_to_int(payload["score_cipher"]),
        signature=entry.signature,
        seq=entry.seq,
    )


def sealed_bids(board: BulletinBoard) -> list[SealedBid]:
    return [_parse_sealed_bid(e) for e in board.find("bid")]


def submit_bid(board: BulletinBoard, terms: AuctionTerms, bid: Bid,
               keypair: SigningKeypair, rng) -> tuple[SealedBid, Receipt]:
    """Encrypt, sign and post a bid; returns the sealed form plus a receipt.

    The encoded score is computed with the published exact arithmetic unless
    the bid carries an explicit score_claim (a dishonest claim will be
    disqualified at opening).  Every cipher gets its own fresh help value.
    """
    if board.clock() >= terms.deadline:
        raise RejectedError("bid rejected: submitted at or after the deadline")
    if bid.pseudonym not in registered_bidders(board):
        raise RejectedError("bid rejected: pseudonym is not registered")
    if any(b.pseudonym == bid.pseudonym for b in sealed_bids(board)):
        raise RejectedError("bid rejected: one bid per pseudonym")

    words = [scoring.encode_fixed_point(v, terms.value_scale, terms.t)
             for v in bid.attribute_values]
    if not 0 <= bid.price <= terms.price_ceiling:
        raise DomainError("price outside [0, price_ceiling]")
    words.append(scoring.encode_fixed_point(bid.price, terms.value_scale,
                                            terms.t))
    score = bid.score_claim if bid.score_claim is not None \
        else scoring.score_bid(terms, bid)
    if not 0 <= score < terms.public_key.n:
        raise DomainError("score claim is not encryptable")

    pk = terms.public_key
    ciphers = [paillier.encrypt(pk, w, paillier.random_help_value(pk, rng))
               for w in words]
    score_cipher = paillier.encrypt(pk, score,
                                    paillier.random_help_value(pk, rng))
    entry, receipt = board.append("bid", {
        "pseudonym": bid.pseudonym,
        "attribute_ciphers": [int_to_hex(c) for c in ciphers],
        "score_cipher": int_to_hex(score_cipher),
    }, bid.pseudonym, keypair)
    assert receipt is not None
    return _parse_sealed_bid(entry), receipt


# --- opening and proof generation phase --------------------------------------

@dataclass(frozen=True)
class _OpenedBid:
    pseudonym: str
    seq: int
    score: int
    score_cipher: int
    score_help: int


def _open_single_bid(terms: AuctionTerms, sk: PaillierPrivateKey,
                     sealed: SealedBid) -> Optional[_OpenedBid]:
    """Decrypt and cross-check one bid; None marks it disqualified."""
    pk = terms.public_key
    if len(sealed.attribute_ciphers) != terms.num_attributes + 1:
        return None
    try:
        words = [paillier.decrypt(pk, sk, c) for c in sealed.attribute_ciphers]
        values = tuple(scoring.decode_fixed_point(w, terms.value_scale)
                       for w in words[:-1])
        price = scoring.decode_fixed_point(words[-1], terms.value_scale)
        recomputed = scoring.score_bid(
            terms, Bid(pseudonym=sealed.pseudonym, attribute_values=values,
                       price=price))
        claimed = paillier.decrypt(pk, sk, sealed.score_cipher)
        if claimed != recomputed:
            return None
        score_help = paillier.recover_randomness(pk, sk, sealed.score_cipher,
                                                 claimed)
    except AuctionError:
        return None
    return _OpenedBid(pseudonym=sealed.pseudonym, seq=sealed.seq,
                      score=claimed, score_cipher=sealed.score_cipher,
                      score_help=score_help)


def open_and_prove(board: BulletinBoard, terms: AuctionTerms,
                   sk: PaillierPrivateKey, rng, *, threads: int = 1) -> Outcome:
    """Open every bid, determine the winner and publish the full proof set.

    Per valid bid: a range proof that its committed score lies in [0, 2^t).
    Per loser: a proof that winner_score - loser_score lies in [0, 2^t),
    over the bidder-submitted score ciphers.  The winner's plaintext score
    and recovered help value go into the outcome so anyone can re-encrypt
    and match the winner's posted cipher.
    """
    if board.clock() < terms.deadline:
        raise RejectedError("cannot open: bidding is still in progress")
    if board.first("outcome") is not None:
        raise RejectedError("outcome already published")
    bids = sealed_bids(board)
    if not bids:
        raise DomainError("no bids were submitted")
    if len({b.pseudonym for b in bids}) != len(bids):
        raise BoardError("board carries duplicate bids for a pseudonym")

    opened: list[_OpenedBid] = []
    disqualified: list[SealedBid] = []
    for sealed in bids:
        result = _open_single_bid(terms, sk, sealed)
        if result is None:
            disqualified.append(sealed)
        else:
            opened.append(result)

    keys = board.auctioneer_keys
    if keys is None:
        raise BoardError("opening requires the auctioneer's signing keys")
    for sealed in disqualified:
        board.append("proof", {
            "record": "disqualified",
            "pseudonym": sealed.pseudonym,
            "bid_seq": sealed.seq,
        }, AUCTIONEER, keys)
    disqualified_names = tuple(s.pseudonym for s in disqualified)

    if not opened:
        entry, _ = board.append("outcome", {
            "winner_pseudonym": None,
            "disqualified": [
                {"pseudonym": s.pseudonym, "bid_seq": s.seq}
                for s in disqualified],
        }, AUCTIONEER, keys)
        return Outcome(winner_pseudonym=None, winner_score=None,
                       winner_score_help=None, winner_bid_seq=None,
                       per_bid_range_proofs=(), per_loser_proofs=(),
                       disqualified=disqualified_names, entry_seq=entry.seq)

    winner_name = scoring.determine_winner(
        [(b.pseudonym, b.score, b.seq) for b in opened])
    winner = next(b for b in opened if b.pseudonym == winner_name)
    losers = [b for b in opened if b.pseudonym != winner_name]
    pk = terms.public_key

    # Proof generation is independent per bid.  Child streams are derived
    # upfront in a fixed order so the output is identical whether or not
    # the tasks run in parallel.
    def make_range(bid: _OpenedBid, child) -> tuple[TestSet, RangeProof]:
        ts, secret = rangeproof.build_test_set(pk, bid.score_cipher,
                                               terms.t, child)
        proof = rangeproof.prove_range(pk, bid.score_cipher, bid.score,
                                       bid.score_help, ts, secret, child)
        return ts, proof

    def make_geq(loser: _OpenedBid, child) -> tuple[TestSet, GeqProof]:
        return rangeproof.prove_geq(
            pk, winner.score_cipher, loser.score_cipher,
            winner.score, loser.score, winner.score_help, loser.score_help,
            terms.t, child)

    range_tasks: list[Callable[[], tuple[TestSet, RangeProof]]] = [
        (lambda b=b, child=rng.spawn(f"range:{b.seq}"): make_range(b, child))
        for b in opened]
    geq_tasks: list[Callable[[], tuple[TestSet, GeqProof]]] = [
        (lambda b=b, child=rng.spawn(f"geq:{b.seq}"): make_geq(b, child))
        for b in losers]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda task: task(),
                                    range_tasks + geq_tasks))
    else:
        results = [task() for task in range_tasks + geq_tasks]
    range_results = results[:len(opened)]
    geq_results = results[len(opened):]

    range_records = []
    range_refs = []
    for bid, (ts, proof) in zip(opened, range_results):
        ts_entry, _ = board.append("testset", {
            "record": "score-range",
            "pseudonym": bid.pseudonym,
            "bid_seq": bid.seq,
            **ts.to_json_obj(),
        }, AUCTIONEER, keys)
        proof = proof.with_ref(str(ts_entry.seq))
        proof_entry, _ = board.append("proof", {
            "record": "range",
            "pseudonym": bid.pseudonym,
            "bid_seq": bid.seq,
            "testset_seq": ts_entry.seq,
            **proof.to_json_obj(),
        }, AUCTIONEER, keys)
        range_records.append((bid.pseudonym, ts, proof))
        range_refs.append({"pseudonym": bid.pseudonym, "bid_seq": bid.seq,
                           "testset_seq": ts_entry.seq,
                           "proof_seq": proof_entry.seq})

    geq_records = []
    geq_refs = []
    for loser, (ts, gproof) in zip(losers, geq_results):
        ts_entry, _ = board.append("testset", {
            "record": "score-geq",
            "winner_bid_seq": winner.seq,
            "loser_bid_seq": loser.seq,
            **ts.to_json_obj(),
        }, AUCTIONEER, keys)
        diff_proof = gproof.difference_proof.with_ref(str(ts_entry.seq))
        gproof = GeqProof(minuend_cipher=gproof.minuend_cipher,
                          subtrahend_cipher=gproof.subtrahend_cipher,
                          difference_proof=diff_proof)
        proof_entry, _ = board.append("proof", {
            "record": "geq",
            "loser_pseudonym": loser.pseudonym,
            "winner_bid_seq": winner.seq,
            "loser_bid_seq": loser.seq,
            "testset_seq": ts_entry.seq,
            **diff_proof.to_json_obj(),
        }, AUCTIONEER, keys)
        geq_records.append((loser.pseudonym, ts, gproof))
        geq_refs.append({"loser_pseudonym": loser.pseudonym,
                         "loser_bid_seq": loser.seq,
                         "testset_seq": ts_entry.seq,
                         "proof_seq": proof_entry.seq})

    entry, _ = board.append("outcome", {
        "winner_pseudonym": winner.pseudonym,
        "winner_bid_seq": winner.seq,
        "winner_score": int_to_hex(winner.score),
        "winner_score_help": int_to_hex(winner.score_help),
        "range_proofs": range_refs,
        "geq_proofs": geq_refs,
        "disqualified": [{"pseudonym": s.pseudonym, "bid_seq": s.seq}
                         for s in disqualified],
    }, AUCTIONEER, keys)

    return Outcome(
        winner_pseudonym=winner.pseudonym,
        winner_score=winner.score,
        winner_score_help=winner.score_help,
        winner_bid_seq=winner.seq,
        per_bid_range_proofs=tuple(range_records),
        per_loser_proofs=tuple(geq_records),
        disqualified=disqualified_names,
        entry_seq=entry.seq,
    )


# --- verification phase -------------------------------------------------------

def verify_outcome(board: BulletinBoard) -> Verdict:
    """Re-check a published outcome from public board data only.

    Walks the chain, re-encrypts the winner's score under the published
    help value, and re-verifies every range and inequality proof against
    the bidder-submitted ciphers referenced by board sequence number.
    """
    failure = board.chain_failure()
    if failure is not None:
        return _invalid(f"chain broken at entry {failure[0]}: {failure[1]}")
    if not board.entries or board.entries[0].kind != "announce":
        return _invalid("terms are not the first board entry")
    if sum(1 for _ in board.find("announce")) != 1:
        return _invalid("board carries more than one announce entry")
    try:
        terms = load_terms(board)
    except AuctionError as exc:
        return _invalid(f"announced terms are malformed: {exc}")
    pk = terms.public_key

    outcomes = list(board.find("outcome"))
    if len(outcomes) != 1:
        return _invalid(f"expected exactly one outcome entry, found "
                        f"{len(outcomes)}")
    outcome_entry = outcomes[0]

    registrations = list(board.find("register"))
    if len({e.payload["pseudonym"] for e in registrations}) != len(registrations):
        return _invalid("duplicate pseudonym registration")
    for e in registrations:
        if parse_timestamp(e.timestamp) >= terms.deadline:
            return _invalid(f"registration after the deadline at entry {e.seq}")

    bids = {}
    for e in board.find("bid"):
        sealed = _parse_sealed_bid(e)
        if parse_timestamp(e.timestamp) >= terms.deadline:
            return _invalid(f"bid at or after the deadline at entry {e.seq}")
        if sealed.pseudonym in bids:
            return _invalid(f"duplicate bid for pseudonym {sealed.pseudonym}")
        if len(sealed.attribute_ciphers) != terms.num_attributes + 1:
            return _invalid(f"bid at entry {e.seq} has the wrong cipher count")
        bids[sealed.pseudonym] = sealed
    if parse_timestamp(outcome_entry.timestamp) < terms.deadline:
        return _invalid("outcome published before the deadline")

    payload = outcome_entry.payload
    disqualified = {d["pseudonym"] for d in payload.get("disqualified", ())}
    for d in payload.get("disqualified", ()):
        if d["pseudonym"] not in bids or bids[d["pseudonym"]].seq != d["bid_seq"]:
            return _invalid("disqualification names an unknown bid")
    valid_names = set(bids) - disqualified

    winner_name = payload.get("winner_pseudonym")
    if winner_name is None:
        if valid_names:
            return _invalid("no-winner outcome although valid bids exist")
        return VALID
    if winner_name not in valid_names:
        return _invalid("declared winner is not a valid bidder")
    winner_bid = bids[winner_name]
    if payload.get("winner_bid_seq") != winner_bid.seq:
        return _invalid("winner bid reference does not match the board")

    try:
        winner_score = hex_to_int(payload["winner_score"])
        winner_help = hex_to_int(payload["winner_score_help"])
    except (KeyError, AuctionError):
        return _invalid("outcome lacks a well-formed winner score")
    if winner_score >= 2 ** terms.t:
        return _invalid("winner score exceeds the published bound")
    try:
        reencrypted = paillier.encrypt(pk, winner_score, winner_help)
    except AuctionError:
        return _invalid("winner score or help value is not encryptable")
    if reencrypted != winner_bid.score_cipher:
        return _invalid("winner score does not re-encrypt to the posted cipher")

    def resolve(seq, kind, record):
        if not 0 <= seq < len(board.entries):
            return None
        entry = board.entries[seq]
        if entry.kind != kind or entry.payload.get("record") != record:
            return None
        return entry

    range_refs = payload.get("range_proofs", [])
    if {r["pseudonym"] for r in range_refs} != valid_names or \
            len(range_refs) != len(valid_names):
        return _invalid("range proofs do not cover the valid bids exactly")
    for ref in range_refs:
        sealed = bids[ref["pseudonym"]]
        if sealed.seq != ref["bid_seq"]:
            return _invalid("range proof references the wrong bid")
        ts_entry = resolve(ref["testset_seq"], "testset", "score-range")
        proof_entry = resolve(ref["proof_seq"], "proof", "range")
        if ts_entry is None or proof_entry is None:
            return _invalid("range proof references missing board entries")
        if ts_entry.payload.get("bid_seq") != sealed.seq or \
                proof_entry.payload.get("bid_seq") != sealed.seq:
            return _invalid("range proof entries disagree about the bid")
        try:
            ts = TestSet.from_json_obj(ts_entry.payload)
            proof = RangeProof.from_json_obj(proof_entry.payload)
        except (KeyError, AuctionError):
            return _invalid("range proof entries are malformed")
        if proof.testset_ref != str(ts_entry.seq):
            return _invalid("range proof does not reference its test set")
        reason = rangeproof.range_failure(pk, sealed.score_cipher, ts, proof)
        if reason is not None:
            return _invalid(f"range proof for {ref['pseudonym']} fails: "
                            f"{reason}")

    geq_refs = payload.get("geq_proofs", [])
    loser_names = valid_names - {winner_name}
    if {r["loser_pseudonym"] for r in geq_refs} != loser_names or \
            len(geq_refs) != len(loser_names):
        return _invalid("inequality proofs do not cover the losers exactly")
    for ref in geq_refs:
        loser = bids[ref["loser_pseudonym"]]
        if loser.seq != ref["loser_bid_seq"]:
            return _invalid("inequality proof references the wrong loser bid")
        ts_entry = resolve(ref["testset_seq"], "testset", "score-geq")
        proof_entry = resolve(ref["proof_seq"], "proof", "geq")
        if ts_entry is None or proof_entry is None:
            return _invalid("inequality proof references missing board entries")
        if proof_entry.payload.get("winner_bid_seq") != winner_bid.seq or \
                ts_entry.payload.get("winner_bid_seq") != winner_bid.seq:
            return _invalid("inequality proof minuend is not the winner's "
                            "cipher")
        if proof_entry.payload.get("loser_bid_seq") != loser.seq or \
                ts_entry.payload.get("loser_bid_seq") != loser.seq:
            return _invalid("inequality proof entries disagree about the loser")
        try:
            ts = TestSet.from_json_obj(ts_entry.payload)
            diff_proof = RangeProof.from_json_obj(proof_entry.payload)
        except (KeyError, AuctionError):
            return _invalid("inequality proof entries are malformed")
        if diff_proof.testset_ref != str(ts_entry.seq):
            return _invalid("inequality proof does not reference its test set")
        gproof = GeqProof(minuend_cipher=winner_bid.score_cipher,
                          subtrahend_cipher=loser.score_cipher,
                          difference_proof=diff_proof)
        reason = rangeproof.geq_failure(pk, winner_bid.score_cipher,
                                        loser.score_cipher, ts, gproof,
                                        strict=False)
        if reason is not None:
            return _invalid(f"inequality proof for {ref['loser_pseudonym']} "
                            f"fails: {reason}")

    return VALID

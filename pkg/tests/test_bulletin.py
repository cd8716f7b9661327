"""Tests for the append-only bulletin board: chaining, receipts, appeals."""

import json
from dataclasses import replace
from datetime import datetime, timedelta, timezone

import pytest

from veribid import identity
from veribid.bulletin import (AUCTIONEER, GENESIS_PREV_HASH, BulletinBoard,
                              BulletinEntry, Receipt)
from veribid.entropy import SeededEntropy
from veribid.errors import BoardError, DomainError

T0 = datetime(2026, 1, 1, tzinfo=timezone.utc)
DEADLINE = T0 + timedelta(hours=1)


class TickingClock:
    def __init__(self, start=T0):
        self.now = start

    def __call__(self):
        self.now += timedelta(seconds=1)
        return self.now


def make_board(tmp_path=None, clock=None):
    rng = SeededEntropy("board")
    auct = identity.generate_signing_keypair(rng)
    path = str(tmp_path / "x.board.jsonl") if tmp_path else None
    board = BulletinBoard(path=path, auctioneer_keys=auct,
                          clock=clock or TickingClock())
    board.append("announce", {
        "terms": {"deadline": DEADLINE.isoformat()},
        "auctioneer_vk": auct.public_key.hex(),
        "scheme": auct.scheme_id,
    }, AUCTIONEER, auct)
    return board, auct, rng


def register_bidder(board, rng, name="alice"):
    kp = identity.generate_signing_keypair(rng)
    pseudonym = identity.generate_pseudonym(kp.public_key, rng.token_bytes(16), name)
    board.append("register", {
        "pseudonym": pseudonym, "vk": kp.public_key.hex(),
        "scheme": kp.scheme_id,
    }, pseudonym, kp)
    return pseudonym, kp


def test_first_entry_genesis():
    board, _, _ = make_board()
    assert board.entries[0].seq == 0
    assert board.entries[0].prev_hash == GENESIS_PREV_HASH


def test_bid_append_returns_matching_receipt():
    board, _, rng = make_board()
    pseudonym, kp = register_bidder(board, rng)
    entry, receipt = board.append("bid", {"pseudonym": pseudonym, "c": "2a"},
                                  pseudonym, kp)
    assert receipt is not None
    assert receipt.entry_hash == entry.entry_hash()
    assert board.verify_receipt(receipt)


def test_chain_valid_after_many_appends():
    board, auct, rng = make_board()
    pseudonym, kp = register_bidder(board, rng)
    for i in range(100):
        board.append("proof", {"i": i}, AUCTIONEER, auct)
    assert [e.seq for e in board.entries] == list(range(len(board.entries)))
    assert board.verify_chain()


def test_non_auctioneer_cannot_post_outcome():
    board, _, rng = make_board()
    pseudonym, kp = register_bidder(board, rng)
    with pytest.raises(BoardError):
        board.append("outcome", {}, pseudonym, kp)


def test_unknown_kind_rejected():
    board, auct, _ = make_board()
    with pytest.raises(BoardError):
        board.append("gossip", {}, AUCTIONEER, auct)


def test_tampered_payload_detected():
    board, auct, rng = make_board()
    register_bidder(board, rng)
    board.append("proof", {"x": 1}, AUCTIONEER, auct)
    target = board.entries[2]
    board.entries[2] = replace(target, payload={"x": 2})
    failure = board.chain_failure()
    assert failure is not None
    idx, _ = failure
    assert idx == 2


def test_deleted_entry_detected():
    board, auct, rng = make_board()
    register_bidder(board, rng)
    board.append("proof", {"x": 1}, AUCTIONEER, auct)
    board.append("proof", {"x": 2}, AUCTIONEER, auct)
    del board.entries[2]
    assert not board.verify_chain()


def test_flipped_signature_detected():
    board, auct, _ = make_board()
    board.append("proof", {"x": 1}, AUCTIONEER, auct)
    target = board.entries[1]
    bad_sig = bytes([target.signature[0] ^ 1]) + target.signature[1:]
    board.entries[1] = replace(target, signature=bad_sig)
    failure = board.chain_failure()
    assert failure == (1, "signature does not verify")


def test_entry_by_unregistered_author_detected():
    board, _, rng = make_board()
    kp = identity.generate_signing_keypair(rng)
    ghost = identity.generate_pseudonym(kp.public_key, rng.token_bytes(16), "g")
    board.append("bid", {"pseudonym": ghost}, ghost, kp)
    failure = board.chain_failure()
    assert failure is not None and "unregistered" in failure[1]


def test_persistence_roundtrip(tmp_path):
    board, auct, rng = make_board(tmp_path)
    pseudonym, kp = register_bidder(board, rng)
    board.append("bid", {"pseudonym": pseudonym, "c": "1f"}, pseudonym, kp)
    loaded = BulletinBoard.load(board.path)
    assert loaded.entries == board.entries
    assert loaded.verify_chain()
    raw1 = open(board.path).read()
    board._persist()
    assert open(board.path).read() == raw1


def test_file_is_one_canonical_json_per_line(tmp_path):
    board, _, _ = make_board(tmp_path)
    with open(board.path) as fh:
        lines = [line for line in fh.read().splitlines() if line]
    assert len(lines) == len(board.entries)
    for line in lines:
        obj = json.loads(line)
        assert sorted(obj) == list(obj)  # keys sorted i.e. canonical


def test_appeal_dismissed_for_posted_bid():
    clock = TickingClock()
    board, _, rng = make_board(clock=clock)
    pseudonym, kp = register_bidder(board, rng)
    _, receipt = board.append("bid", {"pseudonym": pseudonym}, pseudonym, kp)
    clock.now = DEADLINE + timedelta(seconds=1)
    assert board.appeal_non_inclusion(receipt) == "dismissed"
    assert board.entries[-1].kind == "appeal"
    assert board.entries[-1].payload["verdict"] == "dismissed"


def test_appeal_upheld_for_suppressed_bid():
    clock = TickingClock()
    board, _, rng = make_board(clock=clock)
    pseudonym, kp = register_bidder(board, rng)
    # dishonest auctioneer: drafts the entry, signs a receipt, never commits
    entry = board.draft("bid", {"pseudonym": pseudonym}, pseudonym, kp)
    receipt = board.issue_receipt(entry)
    clock.now = DEADLINE + timedelta(seconds=1)
    assert board.appeal_non_inclusion(receipt) == "upheld"


def test_appeal_rejects_forged_receipt():
    clock = TickingClock()
    board, _, rng = make_board(clock=clock)
    pseudonym, kp = register_bidder(board, rng)
    _, receipt = board.append("bid", {"pseudonym": pseudonym}, pseudonym, kp)
    clock.now = DEADLINE + timedelta(seconds=1)
    forged = Receipt(entry_seq=receipt.entry_seq + 1,
                     entry_hash=receipt.entry_hash,
                     auctioneer_signature=receipt.auctioneer_signature)
    with pytest.raises(DomainError):
        board.appeal_non_inclusion(forged)


def test_appeal_closed_before_deadline():
    clock = TickingClock()
    board, _, rng = make_board(clock=clock)
    pseudonym, kp = register_bidder(board, rng)
    _, receipt = board.append("bid", {"pseudonym": pseudonym}, pseudonym, kp)
    with pytest.raises(DomainError):
        board.appeal_non_inclusion(receipt)


def test_receipt_file_roundtrip(tmp_path):
    board, _, rng = make_board()
    pseudonym, kp = register_bidder(board, rng)
    _, receipt = board.append("bid", {"pseudonym": pseudonym}, pseudonym, kp)
    path = tmp_path / "r.json"
    receipt.save(str(path))
    assert Receipt.load(str(path)) == receipt


def test_entry_json_roundtrip():
    board, _, _ = make_board()
    entry = board.entries[0]
    assert BulletinEntry.from_json_obj(entry.to_json_obj()) == entry

"""Certified append-only bulletin board.

Entries are sequence-numbered, hash-chained and author-signed; the board
persists as newline-delimited canonical JSON so any party can re-read and
re-verify it byte for byte.  The auctioneer operates the single writer and
returns signed receipts for bids; a bidder holding a receipt whose entry
never appeared can get a non-inclusion appeal upheld from the receipt alone.

Key resolution during chain verification is bootstrapped from the log
itself: the announce payload carries the auctioneer's verification key and
every registration payload carries the registering bidder's.  Authenticity
of the announce key is a PKI assumption outside the board.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, replace
from datetime import datetime
from typing import Callable, Iterator, Optional

from . import identity
from .encoding import canonical_json, format_timestamp, parse_timestamp, utc_now
from .errors import BoardError, DomainError
from .identity import SigningKeypair

ENTRY_KINDS = ("announce", "register", "bid", "testset", "proof",
               "outcome", "appeal")
AUCTIONEER = "auctioneer"
AUCTIONEER_ONLY_KINDS = frozenset({"announce", "testset", "proof", "outcome"})
GENESIS_PREV_HASH = b"\x00" * 32


@dataclass(frozen=True)
class BulletinEntry:
    seq: int
    timestamp: str
    author: str
    kind: str
    payload: dict
    prev_hash: bytes
    signature: bytes

    def signed_bytes(self) -> bytes:
        """Canonical bytes the author signs: everything but the signature."""
        return canonical_json({
            "seq": self.seq,
            "timestamp": self.timestamp,
            "author": self.author,
            "kind": self.kind,
            "payload": self.payload,
            "prev_hash": self.prev_hash.hex(),
        })

    def entry_hash(self) -> bytes:
        return hashlib.sha256(canonical_json(self.to_json_obj())).digest()

    def to_json_obj(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "author": self.author,
            "kind": self.kind,
            "payload": self.payload,
            "prev_hash": self.prev_hash.hex(),
            "signature": self.signature.hex(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BulletinEntry":
        return cls(
            seq=int(obj["seq"]),
            timestamp=obj["timestamp"],
            author=obj["author"],
            kind=obj["kind"],
            payload=obj["payload"],
            prev_hash=bytes.fromhex(obj["prev_hash"]),
            signature=bytes.fromhex(obj["signature"]),
        )


@dataclass(frozen=True)
class Receipt:
    entry_seq: int
    entry_hash: bytes
    auctioneer_signature: bytes

    def signed_message(self) -> bytes:
        return self.entry_seq.to_bytes(8, "big") + self.entry_hash

    def to_json_obj(self) -> dict:
        return {
            "entry_seq": self.entry_seq,
            "entry_hash": self.entry_hash.hex(),
            "signature": self.auctioneer_signature.hex(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Receipt":
        return cls(
            entry_seq=int(obj["entry_seq"]),
            entry_hash=bytes.fromhex(obj["entry_hash"]),
            auctioneer_signature=bytes.fromhex(obj["signature"]),
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(self.to_json_obj(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Receipt":
        with open(path, encoding="ascii") as fh:
            return cls.from_json_obj(json.load(fh))


class BulletinBoard:
    """Single-writer, multi-reader append-only log.

    path=None keeps the board purely in memory (used for timing runs);
    otherwise every append rewrites the file atomically via rename.
    """

    def __init__(self, path: Optional[str] = None,
                 auctioneer_keys: Optional[SigningKeypair] = None,
                 clock: Callable[[], datetime] = utc_now):
        self.path = path
        self.auctioneer_keys = auctioneer_keys
        self.clock = clock
        self.entries: list[BulletinEntry] = []

    # -- write path ----------------------------------------------------

    def draft(self, kind: str, payload: dict, author: str,
              signing_key: SigningKeypair) -> BulletinEntry:
        """Build (and sign) the entry append would persist, without committing.

        Split from commit so tests can simulate an auctioneer who issues a
        receipt for an entry it never posts.
        """
        if kind not in ENTRY_KINDS:
            raise BoardError(f"unknown entry kind: {kind!r}")
        if kind in AUCTIONEER_ONLY_KINDS and author != AUCTIONEER:
            raise BoardError(f"only the auctioneer may post {kind!r} entries")
        seq = len(self.entries)
        prev_hash = (self.entries[-1].entry_hash() if self.entries
                     else GENESIS_PREV_HASH)
        unsigned = BulletinEntry(
            seq=seq,
            timestamp=format_timestamp(self.clock()),
            author=author,
            kind=kind,
            payload=payload,
            prev_hash=prev_hash,
            signature=b"",
        )
        signature = identity.sign_entry(signing_key, unsigned.signed_bytes())
        return replace(unsigned, signature=signature)

    def commit(self, entry: BulletinEntry) -> None:
        if entry.seq != len(self.entries):
            raise BoardError("entry sequence number is stale")
        self.entries.append(entry)
        try:
            self._persist()
        except OSError:
            self.entries.pop()
            raise

    def append(self, kind: str, payload: dict, author: str,
               signing_key: SigningKeypair,
               ) -> tuple[BulletinEntry, Optional[Receipt]]:
        entry = self.draft(kind, payload, author, signing_key)
        self.commit(entry)
        receipt = self.issue_receipt(entry) if kind == "bid" else None
        return entry, receipt

    def issue_receipt(self, entry: BulletinEntry) -> Receipt:
        if self.auctioneer_keys is None:
            raise BoardError("board has no auctioneer keys to sign receipts")
        entry_hash = entry.entry_hash()
        message = entry.seq.to_bytes(8, "big") + entry_hash
        return Receipt(
            entry_seq=entry.seq,
            entry_hash=entry_hash,
            auctioneer_signature=identity.sign_entry(self.auctioneer_keys,
                                                     message),
        )

    def _persist(self) -> None:
        if self.path is None:
            return
        tmp = f"{self.path}.tmp"
        with open(tmp, "w", encoding="ascii") as fh:
            for entry in self.entries:
                fh.write(canonical_json(entry.to_json_obj()).decode("ascii"))
                fh.write("\n")
        os.replace(tmp, self.path)

    @classmethod
    def load(cls, path: str, auctioneer_keys: Optional[SigningKeypair] = None,
             clock: Callable[[], datetime] = utc_now) -> "BulletinBoard":
        board = cls(path=path, auctioneer_keys=auctioneer_keys, clock=clock)
        with open(path, encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    board.entries.append(
                        BulletinEntry.from_json_obj(json.loads(line)))
        return board

    # -- read path -------------------------------------------------------

    def find(self, kind: Optional[str] = None) -> Iterator[BulletinEntry]:
        for entry in self.entries:
            if kind is None or entry.kind == kind:
                yield entry

    def first(self, kind: str) -> Optional[BulletinEntry]:
        return next(self.find(kind), None)

    def announced_terms_obj(self) -> dict:
        announce = self.first("announce")
        if announce is None:
            raise BoardError("board has no announce entry")
        return announce.payload["terms"]

    def _auctioneer_key_info(self) -> tuple[str, bytes]:
        announce = self.first("announce")
        if announce is None:
            raise BoardError("board has no announce entry")
        return (announce.payload["scheme"],
                bytes.fromhex(announce.payload["auctioneer_vk"]))

    def chain_failure(self) -> Optional[tuple[int, str]]:
        """First (index, reason) where the log breaks its invariants."""
        auct_scheme: Optional[str] = None
        auct_vk: Optional[bytes] = None
        bidder_keys: dict[str, tuple[str, bytes]] = {}
        prev_hash = GENESIS_PREV_HASH
        for i, entry in enumerate(self.entries):
            if entry.seq != i:
                return i, "sequence gap or reorder"
            if entry.prev_hash != prev_hash:
                return i, "hash chain broken"
            if entry.kind not in ENTRY_KINDS:
                return i, f"unknown kind {entry.kind!r}"
            if entry.kind in AUCTIONEER_ONLY_KINDS and entry.author != AUCTIONEER:
                return i, f"unauthorized author for {entry.kind!r}"
            if entry.kind == "announce" and auct_vk is None:
                try:
                    auct_scheme = entry.payload["scheme"]
                    auct_vk = bytes.fromhex(entry.payload["auctioneer_vk"])
                except (KeyError, TypeError, ValueError):
                    return i, "announce payload lacks auctioneer key"
            if entry.author == AUCTIONEER:
                if auct_vk is None:
                    return i, "auctioneer entry before any announce"
                scheme, vk = auct_scheme, auct_vk
            elif entry.kind == "register":
                try:
                    scheme = entry.payload["scheme"]
                    vk = bytes.fromhex(entry.payload["vk"])
                except (KeyError, TypeError, ValueError):
                    return i, "register payload lacks verification key"
                if entry.payload.get("pseudonym") != entry.author:
                    return i, "register author does not match payload pseudonym"
                bidder_keys[entry.author] = (scheme, vk)
            else:
                if entry.author not in bidder_keys:
                    return i, f"entry by unregistered author {entry.author!r}"
                scheme, vk = bidder_keys[entry.author]
            try:
                ok = identity.verify_signature(scheme, vk,
                                               entry.signed_bytes(), entry.signature)
            except DomainError:
                return i, "unknown signature scheme"
            if not ok:
                return i, "signature does not verify"
            prev_hash = entry.entry_hash()
        return None

    def verify_chain(self) -> bool:
        return self.chain_failure() is None

    # -- appeals ---------------------------------------------------------

    def verify_receipt(self, receipt: Receipt) -> bool:
        scheme, vk = self._auctioneer_key_info()
        return identity.verify_signature(scheme, vk, receipt.signed_message(),
                                         receipt.auctioneer_signature)

    def appeal_non_inclusion(self, receipt: Receipt) -> str:
        """Judge a non-inclusion appeal and record it on the board.

        "upheld" when the receipt is genuine but no entry with that hash is
        on the board; "dismissed" when the entry is present.  Only usable
        once bidding has closed.
        """
        terms = self.announced_terms_obj()
        deadline = parse_timestamp(terms["deadline"])
        if self.clock() < deadline:
            raise DomainError("appeals open only after the bidding deadline")
        if not self.verify_receipt(receipt):
            raise DomainError("malformed appeal: receipt signature invalid")
        present = any(e.entry_hash() == receipt.entry_hash for e in self.entries)
        verdict = "dismissed" if present else "upheld"
        if self.auctioneer_keys is not None:
            self.append("appeal", {
                "receipt": receipt.to_json_obj(),
                "verdict": verdict,
            }, AUCTIONEER, self.auctioneer_keys)
        return verdict

"""Seeded end-to-end auction simulation.

Builds a complete auction on a fresh board: random terms, random bidders,
random grid-aligned bids, opening and proofs.  Everything (keys, values,
timestamps via a logical clock, shuffles, Ed25519 signatures) flows from
one seeded stream, so the same seed reproduces a byte-identical board file.
Used by the CLI, the benchmark sweep and the end-to-end tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from typing import Optional

from . import paillier, protocol, scoring
from .bulletin import BulletinBoard
from .identity import SigningKeypair, generate_signing_keypair
from .protocol import Outcome
from .scoring import AttributeSpec, AuctionTerms, Bid

SIM_EPOCH = datetime(2026, 1, 1, tzinfo=timezone.utc)


class LogicalClock:
    """Controllable clock: time moves only when the simulation says so."""

    def __init__(self, start: datetime = SIM_EPOCH):
        self.now = start

    def __call__(self) -> datetime:
        return self.now

    def advance(self, seconds: int) -> None:
        self.now += timedelta(seconds=seconds)

    def jump_to(self, moment: datetime) -> None:
        self.now = moment


@dataclass
class SimulatedAuction:
    board: BulletinBoard
    terms: AuctionTerms
    auctioneer_keys: SigningKeypair
    private_key: paillier.PaillierPrivateKey
    clock: LogicalClock
    bidders: list[protocol.BidderIdentity]
    plain_bids: list[tuple[str, Bid, int]]  # (pseudonym, bid, bid entry seq)
    outcome: Optional[Outcome] = None

    def expected_scores(self) -> list[tuple[str, int, int]]:
        """(pseudonym, encoded score, seq) straight from the plaintext bids."""
        return [(name, scoring.score_bid(self.terms, bid), seq)
                for name, bid, seq in self.plain_bids]


def random_attribute_spec(rng, name: str, weight: Fraction) -> AttributeSpec:
    """A random monotone piecewise-linear valuation on an integer domain."""
    direction = "benefit" if rng.randrange(2) else "cost"
    hi = rng.randrange(5, 50)
    n_points = rng.randrange(2, 5)
    xs = sorted(rng.sample(range(1, hi), n_points - 1)) + [hi]
    fs = sorted(Fraction(rng.randrange(0, 101), 100) for _ in range(n_points))
    if direction == "cost":
        fs = list(reversed(fs))
    points = [(Fraction(0), fs[0])] + list(zip(map(Fraction, xs), fs))
    return AttributeSpec(name=name, weight=weight,
                         breakpoints=tuple(points), direction=direction)


def random_terms(rng, pk, *, auction_id: str, attributes: int, t: int = 16,
                 value_scale: int = 100,
                 deadline: Optional[datetime] = None) -> AuctionTerms:
    weights = []
    remaining = Fraction(1)
    for _ in range(attributes):
        w = Fraction(rng.randrange(1, max(2, int(remaining * 100))), 100)
        w = min(w, remaining)
        weights.append(w)
        remaining -= w
    specs = tuple(
        random_attribute_spec(rng, f"attr{i}", w)
        for i, w in enumerate(weights))
    return AuctionTerms(
        auction_id=auction_id,
        item="simulated procurement lot",
        attributes=specs,
        price_ceiling=Fraction(rng.randrange(50, 200)),
        t=t,
        deadline=deadline or SIM_EPOCH + timedelta(hours=1),
        public_key=pk,
        value_scale=value_scale,
    )


def random_bid(rng, terms: AuctionTerms, pseudonym: str) -> Bid:
    """Grid-aligned values anywhere in the published ranges."""
    scale = terms.value_scale
    values = []
    for spec in terms.attributes:
        lo, hi = spec.domain
        lo_w = int(lo * scale) if (lo * scale).denominator == 1 else int(lo * scale) + 1
        hi_w = int(hi * scale)
        values.append(Fraction(rng.randrange(lo_w, hi_w + 1), scale))
    price_w = rng.randrange(0, int(terms.price_ceiling * scale) + 1)
    return Bid(pseudonym=pseudonym, attribute_values=tuple(values),
               price=Fraction(price_w, scale))


def run_auction(rng, *, bidders: int, attributes: int = 2,
                bit_length: int = 64, t: int = 16, board_path: Optional[str] = None,
                threads: int = 1, test_mode_keys: bool = True,
                keys: Optional[tuple] = None, open_auction: bool = True,
                ) -> SimulatedAuction:
    """Run a full simulated auction and (optionally) open and prove it."""
    clock = LogicalClock()
    if keys is None:
        pk, sk = paillier.generate_keypair(bit_length, rng.spawn("paillier"),
                                           test_mode=test_mode_keys)
    else:
        pk, sk = keys
    auctioneer_keys = generate_signing_keypair(rng.spawn("auctioneer-sig"))
    terms = random_terms(rng.spawn("terms"), pk,
                         auction_id=f"sim-{bidders}-{attributes}",
                         attributes=attributes, t=t)
    board = BulletinBoard(path=board_path, auctioneer_keys=auctioneer_keys,
                          clock=clock)
    protocol.announce(board, terms, auctioneer_keys)

    identities = []
    plain_bids = []
    for i in range(bidders):
        clock.advance(1)
        bidder_rng = rng.spawn(f"bidder:{i}")
        ident = protocol.new_bidder(board, terms, bidder_rng)
        identities.append(ident)
        bid = random_bid(bidder_rng, terms, ident.pseudonym)
        sealed, _ = protocol.submit_bid(board, terms, bid, ident.keypair,
                                        bidder_rng)
        plain_bids.append((ident.pseudonym, bid, sealed.seq))

    sim = SimulatedAuction(board=board, terms=terms,
                           auctioneer_keys=auctioneer_keys, private_key=sk,
                           clock=clock, bidders=identities,
                           plain_bids=plain_bids)
    if open_auction:
        clock.jump_to(terms.deadline + timedelta(seconds=1))
        sim.outcome = protocol.open_and_prove(board, terms, sk,
                                              rng.spawn("open"),
                                              threads=threads)
    return sim

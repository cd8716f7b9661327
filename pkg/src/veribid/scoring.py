"""Published scoring contract for multi-attribute reverse auctions.

A bid carries K non-price attribute values plus a price.  Its raw score is

    raw = sum_r weight_r * valuation_r(x_r) - price / price_ceiling

with weights summing to at most 1 and every valuation mapping into [0, 1],
so raw lies in [-1, 1].  Scores are then encoded affinely onto [0, 2^t) so
they fit the non-negative bounded integers the range proofs speak about.

All arithmetic is exact rational; rounding happens in exactly one place
(encode_score, round half up) so bidder and auctioneer compute bit-identical
score claims from the same inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction

from .encoding import (format_timestamp, fraction_to_str, parse_timestamp,
                       str_to_fraction)
from .errors import DomainError
from .paillier import PaillierPublicKey

DIRECTIONS = ("benefit", "cost")
DEFAULT_T = 16
DEFAULT_VALUE_SCALE = 100
WINNER_RULE = "max-score, earliest-seq tie-break"


@dataclass(frozen=True)
class AttributeSpec:
    """One scored attribute: a weight plus a piecewise-linear valuation.

    Breakpoints are (x, f(x)) pairs, strictly increasing in x with f in
    [0, 1].  A cost-direction attribute encodes its descending preference
    in the breakpoints themselves; direction is published metadata.
    """

    name: str
    weight: Fraction
    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    direction: str = "benefit"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise DomainError(f"direction must be one of {DIRECTIONS}")
        if self.weight < 0:
            raise DomainError("weight must be non-negative")
        if len(self.breakpoints) < 2:
            raise DomainError("need at least two breakpoints")
        xs = [x for x, _ in self.breakpoints]
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise DomainError("breakpoint x values must be strictly increasing")
        if any(not 0 <= f <= 1 for _, f in self.breakpoints):
            raise DomainError("valuation values must lie in [0, 1]")
        if xs[0] < 0:
            raise DomainError("attribute domain must be non-negative")

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "weight": fraction_to_str(self.weight),
            "breakpoints": [[fraction_to_str(x), fraction_to_str(f)]
                            for x, f in self.breakpoints],
            "direction": self.direction,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AttributeSpec":
        return cls(
            name=obj["name"],
            weight=str_to_fraction(obj["weight"]),
            breakpoints=tuple((str_to_fraction(x), str_to_fraction(f))
                              for x, f in obj["breakpoints"]),
            direction=obj.get("direction", "benefit"),
        )


@dataclass(frozen=True)
class Bid:
    """A bidder's chosen attribute values and price, under a pseudonym.

    score_claim, when set, is the encoded score the bidder asserts; honest
    bidders leave it None and let the toolkit compute it.
    """

    pseudonym: str
    attribute_values: tuple[Fraction, ...]
    price: Fraction
    score_claim: int | None = None


@dataclass(frozen=True)
class AuctionTerms:
    """Everything the auctioneer publishes before bidding starts."""

    auction_id: str
    item: str
    attributes: tuple[AttributeSpec, ...]
    price_ceiling: Fraction
    t: int
    deadline: datetime
    public_key: PaillierPublicKey
    value_scale: int = DEFAULT_VALUE_SCALE
    winner_rule: str = WINNER_RULE

    def __post_init__(self):
        if not self.auction_id:
            raise DomainError("auction_id must be non-empty")
        if self.t < 8:
            raise DomainError("t must be at least 8")
        if 2 ** self.t >= self.public_key.n / 2:
            raise DomainError("2^t must be smaller than n/2")
        if self.price_ceiling <= 0:
            raise DomainError("price_ceiling must be positive")
        if self.value_scale < 1:
            raise DomainError("value_scale must be at least 1")
        if self.winner_rule != WINNER_RULE:
            raise DomainError(f"winner rule is fixed to {WINNER_RULE!r}")
        if sum((a.weight for a in self.attributes), Fraction(0)) > 1:
            raise DomainError("attribute weights must sum to at most 1")
        bound = 2 ** self.t
        if self.price_ceiling * self.value_scale >= bound:
            raise DomainError("price_ceiling does not fit in t bits at this scale")
        for attr in self.attributes:
            if attr.domain[1] * self.value_scale >= bound:
                raise DomainError(
                    f"attribute {attr.name!r} domain does not fit in t bits")

    @property
    def num_attributes(self) -> int:
        return len(self.attributes)

    def to_json_obj(self) -> dict:
        return {
            "auction_id": self.auction_id,
            "item": self.item,
            "attributes": [a.to_json_obj() for a in self.attributes],
            "price_ceiling": fraction_to_str(self.price_ceiling),
            "t": self.t,
            "deadline": format_timestamp(self.deadline),
            "public_key": self.public_key.to_json_obj(),
            "value_scale": self.value_scale,
            "winner_rule": self.winner_rule,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AuctionTerms":
        return cls(
            auction_id=obj["auction_id"],
            item=obj["item"],
            attributes=tuple(AttributeSpec.from_json_obj(a)
                             for a in obj["attributes"]),
            price_ceiling=str_to_fraction(obj["price_ceiling"]),
            t=int(obj["t"]),
            deadline=parse_timestamp(obj["deadline"]),
            public_key=PaillierPublicKey.from_json_obj(obj["public_key"]),
            value_scale=int(obj["value_scale"]),
            winner_rule=obj.get("winner_rule", WINNER_RULE),
        )


def evaluate_valuation(spec: AttributeSpec, x: Fraction) -> Fraction:
    """Piecewise-linear interpolation of the breakpoints at x."""
    x = Fraction(x)
    lo, hi = spec.domain
    if not lo <= x <= hi:
        raise DomainError(
            f"attribute {spec.name!r} value {x} outside domain [{lo}, {hi}]")
    points = spec.breakpoints
    for (x0, f0), (x1, f1) in zip(points, points[1:]):
        if x <= x1:
            return f0 + (x - x0) * (f1 - f0) / (x1 - x0)
    return points[-1][1]


def compute_raw_score(terms: AuctionTerms, bid: Bid) -> Fraction:
    """Weighted attribute valuations minus the normalized price, in [-1, 1]."""
    if len(bid.attribute_values) != terms.num_attributes:
        raise DomainError(
            f"expected {terms.num_attributes} attribute values, "
            f"got {len(bid.attribute_values)}")
    if bid.price < 0:
        raise DomainError("price must be non-negative")
    if bid.price > terms.price_ceiling:
        raise DomainError("price exceeds the published ceiling")
    aggregate = Fraction(0)
    for spec, value in zip(terms.attributes, bid.attribute_values):
        aggregate += spec.weight * evaluate_valuation(spec, value)
    return aggregate - bid.price / terms.price_ceiling


def encode_score(raw: Fraction, t: int) -> int:
    """Affine order-preserving map of [-1, 1] onto [0, 2^t), round half up."""
    raw = Fraction(raw)
    if not -1 <= raw <= 1:
        raise DomainError(f"raw score outside [-1, 1]: {raw}")
    if t < 8:
        raise DomainError("t must be at least 8")
    scaled = (raw + 1) * (2 ** t - 1) / 2
    return int(scaled + Fraction(1, 2))  # floor(x + 1/2): round half up


def score_bid(terms: AuctionTerms, bid: Bid) -> int:
    """Encoded score of a bid: the value both sides must agree on."""
    return encode_score(compute_raw_score(terms, bid), terms.t)


def determine_winner(scores: list[tuple[str, int, int]]) -> str:
    """Pick the pseudonym with the maximum encoded score.

    Entries are (pseudonym, encoded_score, board_seq); ties go to the
    smallest board sequence number, i.e. the earliest bid.
    """
    if not scores:
        raise DomainError("no valid bids: no winner can be determined")
    best = max(scores, key=lambda entry: (entry[1], -entry[2]))
    return best[0]


def encode_fixed_point(value: Fraction, scale: int, t: int) -> int:
    """Map a grid-aligned rational to its plaintext integer (value * scale).

    Values must be exact multiples of 1/scale and fit in t bits; anything
    else is rejected so decrypt-then-score stays exact.
    """
    value = Fraction(value)
    if value < 0:
        raise DomainError(f"cannot encode negative value {value}")
    word = value * scale
    if word.denominator != 1:
        raise DomainError(
            f"value {value} is not a multiple of 1/{scale}")
    word = int(word)
    if word >= 2 ** t:
        raise DomainError(f"value {value} does not fit in {t} bits at scale {scale}")
    return word


def decode_fixed_point(word: int, scale: int) -> Fraction:
    if word < 0:
        raise DomainError("fixed-point words are non-negative")
    return Fraction(word, scale)

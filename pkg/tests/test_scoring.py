"""Tests for valuation evaluation, score encoding and winner determination."""

from datetime import datetime, timezone
from fractions import Fraction

import pytest

from veribid import paillier, scoring
from veribid.entropy import SeededEntropy
from veribid.errors import DomainError

F = Fraction
DEADLINE = datetime(2026, 1, 1, 12, 0, tzinfo=timezone.utc)


def make_terms(pk, attributes=(), price_ceiling=F(100), t=16, scale=100):
    return scoring.AuctionTerms(
        auction_id="a-1", item="widgets", attributes=tuple(attributes),
        price_ceiling=price_ceiling, t=t, deadline=DEADLINE,
        public_key=pk, value_scale=scale)


def spec(name="quality", weight=F(1, 2), points=((F(0), F(0)), (F(10), F(1))),
         direction="benefit"):
    return scoring.AttributeSpec(name=name, weight=weight,
                                 breakpoints=tuple(points), direction=direction)


def test_valuation_linear_midpoint():
    s = spec(points=((F(0), F(0)), (F(1), F(1))))
    assert scoring.evaluate_valuation(s, F(1, 2)) == F(1, 2)


def test_valuation_at_breakpoints():
    s = spec(points=((F(0), F(0)), (F(10), F(2, 5)), (F(20), F(1))))
    assert scoring.evaluate_valuation(s, F(0)) == 0
    assert scoring.evaluate_valuation(s, F(10)) == F(2, 5)
    assert scoring.evaluate_valuation(s, F(20)) == 1


def test_valuation_hand_interpolation():
    # 0.4 + (5/10)*0.6 = 0.7
    s = spec(points=((F(0), F(0)), (F(10), F(2, 5)), (F(20), F(1))))
    assert scoring.evaluate_valuation(s, F(15)) == F(7, 10)


def test_valuation_outside_domain():
    s = spec()
    with pytest.raises(DomainError):
        scoring.evaluate_valuation(s, F(11))
    with pytest.raises(DomainError):
        scoring.evaluate_valuation(s, F(-1))


def test_raw_score_price_only(small_keys):
    pk, _ = small_keys
    terms = make_terms(pk)
    bid = scoring.Bid(pseudonym="p", attribute_values=(), price=F(30))
    assert scoring.compute_raw_score(terms, bid) == F(-3, 10)


def test_raw_score_hand_value(small_keys):
    # w=(0.6,0.4), f-values (0.8,0.5), normalized price 0.3 -> 0.38
    pk, _ = small_keys
    a1 = spec("a1", F(3, 5), ((F(0), F(0)), (F(10), F(1))))       # x=8 -> 0.8
    a2 = spec("a2", F(2, 5), ((F(0), F(0)), (F(10), F(1))))       # x=5 -> 0.5
    terms = make_terms(pk, [a1, a2])
    bid = scoring.Bid(pseudonym="p", attribute_values=(F(8), F(5)), price=F(30))
    assert scoring.compute_raw_score(terms, bid) == F(19, 50)


def test_raw_score_monotone_in_price(small_keys):
    pk, _ = small_keys
    terms = make_terms(pk, [spec()])
    lo = scoring.Bid("p", (F(5),), price=F(20))
    hi = scoring.Bid("p", (F(5),), price=F(21))
    assert scoring.compute_raw_score(terms, lo) > scoring.compute_raw_score(terms, hi)


def test_raw_score_monotone_in_valuation(small_keys):
    pk, _ = small_keys
    terms = make_terms(pk, [spec()])
    lo = scoring.Bid("p", (F(4),), price=F(20))
    hi = scoring.Bid("p", (F(6),), price=F(20))
    assert scoring.compute_raw_score(terms, hi) > scoring.compute_raw_score(terms, lo)


def test_raw_score_rejects_overpriced(small_keys):
    pk, _ = small_keys
    terms = make_terms(pk)
    with pytest.raises(DomainError):
        scoring.compute_raw_score(
            terms, scoring.Bid("p", (), price=F(101)))


def test_encode_score_endpoints():
    assert scoring.encode_score(F(-1), 16) == 0
    assert scoring.encode_score(F(1), 16) == 2 ** 16 - 1


def test_encode_score_hand_value():
    # round(1.38 * 65535 / 2) = round(45219.15) = 45219
    assert scoring.encode_score(F(38, 100), 16) == 45219


def test_encode_score_monotone():
    rng = SeededEntropy(5)
    raws = sorted(F(rng.randrange(-1000, 1001), 1000) for _ in range(300))
    encoded = [scoring.encode_score(r, 16) for r in raws]
    assert all(a <= b for a, b in zip(encoded, encoded[1:]))
    # strict when separated by more than 2*2^-t
    gap = F(2, 2 ** 14)
    assert scoring.encode_score(F(0), 16) < scoring.encode_score(gap, 16)


def test_determine_winner_single():
    assert scoring.determine_winner([("a", 10, 3)]) == "a"


def test_determine_winner_tie_break():
    assert scoring.determine_winner([("a", 10, 1), ("b", 10, 2)]) == "a"
    assert scoring.determine_winner([("a", 10, 5), ("b", 10, 2)]) == "b"


def test_determine_winner_matches_brute_force():
    rng = SeededEntropy(99)
    for _ in range(50):
        entries = [(f"p{i}", rng.randrange(1000), i)
                   for i in range(rng.randrange(1, 30))]
        rng.shuffle(entries)
        # independent linear scan
        best = None
        for name, score, seq in entries:
            if best is None or score > best[1] or (score == best[1] and seq < best[2]):
                best = (name, score, seq)
        assert scoring.determine_winner(entries) == best[0]


def test_determine_winner_empty():
    with pytest.raises(DomainError):
        scoring.determine_winner([])


def test_fixed_point_roundtrip():
    assert scoring.encode_fixed_point(F(55, 100), 100, 16) == 55
    assert scoring.decode_fixed_point(55, 100) == F(55, 100)
    with pytest.raises(DomainError):
        scoring.encode_fixed_point(F(1, 3), 100, 16)
    with pytest.raises(DomainError):
        scoring.encode_fixed_point(F(70000), 100, 16)


def test_terms_validation(small_keys):
    pk, _ = small_keys
    with pytest.raises(DomainError):
        make_terms(pk, t=70)  # 2^70 >= n/2 for a 64-bit key
    heavy = [spec("a", F(3, 4)), spec("b", F(1, 2))]
    with pytest.raises(DomainError):
        make_terms(pk, heavy)
    with pytest.raises(DomainError):
        make_terms(pk, price_ceiling=F(100000))  # does not fit t bits at scale


def test_terms_json_roundtrip(small_keys):
    pk, _ = small_keys
    terms = make_terms(pk, [spec()], t=16)
    again = scoring.AuctionTerms.from_json_obj(terms.to_json_obj())
    assert again == terms


def test_score_bid_consistency(small_keys):
    pk, _ = small_keys
    terms = make_terms(pk, [spec()])
    bid = scoring.Bid("p", (F(7),), price=F(25, 2))
    expected = scoring.encode_score(scoring.compute_raw_score(terms, bid), terms.t)
    assert scoring.score_bid(terms, bid) == expected

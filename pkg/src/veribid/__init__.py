"""Verifiable sealed-bid multi-attribute reverse auctions.

Bidders submit Paillier-encrypted attribute vectors under self-generated
pseudonyms; the auctioneer scores the bids with a published scoring
function and proves the outcome with test-set range proofs, so anyone can
verify the declared winner from the bulletin board alone without learning
any losing bid.
"""

from .bulletin import BulletinBoard, BulletinEntry, Receipt
from .entropy import SeededEntropy, SystemEntropy
from .errors import (AuctionError, BoardError, CryptoError, DomainError,
                     KeyGenerationError, ProofError, RejectedError)
from .paillier import (PaillierPrivateKey, PaillierPublicKey,
                       generate_keypair, keypair_from_primes)
from .protocol import (Outcome, SealedBid, Verdict, announce, open_and_prove,
                       register, submit_bid, verify_outcome)
from .rangeproof import (GeqProof, RangeProof, TestSet, build_test_set,
                         prove_geq, prove_range, prove_strict_gt, verify_geq,
                         verify_range)
from .scoring import (AttributeSpec, AuctionTerms, Bid, compute_raw_score,
                      determine_winner, encode_score, evaluate_valuation,
                      score_bid)

__version__ = "0.1.0"

__all__ = [
    "AttributeSpec", "AuctionError", "AuctionTerms", "Bid", "BoardError",
    "BulletinBoard", "BulletinEntry", "CryptoError", "DomainError",
    "GeqProof", "KeyGenerationError", "Outcome", "PaillierPrivateKey",
    "PaillierPublicKey", "ProofError", "RangeProof", "Receipt",
    "RejectedError", "SealedBid", "SeededEntropy", "SystemEntropy",
    "TestSet", "Verdict", "announce", "build_test_set", "compute_raw_score",
    "determine_winner", "encode_score", "evaluate_valuation",
    "generate_keypair", "keypair_from_primes", "open_and_prove",
    "prove_geq", "prove_range", "prove_strict_gt", "register", "score_bid",
    "submit_bid", "verify_geq", "verify_outcome", "verify_range",
]

"""Role-oriented command line over a shared board file.

Subcommands cover the whole protocol: keygen, announce, register, bid,
close, open, verify, appeal, plus the seeded simulate and bench harnesses.
All parties operate against the same `--board` file; issuing a bid receipt
requires the board operator's signing key, so `bid` takes the auctioneer's
key prefix alongside the bidder's (the CLI models every role sharing one
store, as the protocol's trust model assumes).

Exit codes: 0 success, 1 domain rejection, 2 verification failure,
3 I/O error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import __version__, bench, paillier, protocol, simulate
from .bulletin import BulletinBoard, Receipt
from .encoding import parse_timestamp, str_to_fraction, utc_now
from .entropy import SeededEntropy, SystemEntropy
from .errors import AuctionError
from .identity import (generate_signing_keypair, load_signing_keypair,
                       save_signing_keypair)
from .scoring import AuctionTerms, Bid

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _entropy(seed: Optional[str]):
    return SystemEntropy() if seed is None else SeededEntropy(seed)


def _clock(now: Optional[str]):
    if now is None:
        return utc_now
    fixed = parse_timestamp(now)
    return lambda: fixed


def _key_paths(prefix: str) -> dict[str, str]:
    return {
        "pk": f"{prefix}.pk.json",
        "sk": f"{prefix}.sk.json",
        "sig": f"{prefix}.sig.json",
        "id": f"{prefix}.id.json",
    }


def _load_board(args, auctioneer_keys=None) -> BulletinBoard:
    return BulletinBoard.load(args.board, auctioneer_keys=auctioneer_keys,
                              clock=_clock(getattr(args, "now", None)))


def cmd_keygen(args) -> int:
    bits = args.bits
    production = bits in paillier.PRODUCTION_BIT_LENGTHS
    if args.seed is not None and production and not args.insecure_seed:
        print("keygen: refusing to derive a production key from a fixed "
              "seed (pass --insecure-seed to override)", file=sys.stderr)
        return EXIT_REJECTED
    rng = _entropy(args.seed)
    pk, sk = paillier.generate_keypair(bits, rng, test_mode=not production)
    sig = generate_signing_keypair(rng)
    paths = _key_paths(args.out)
    directory = os.path.dirname(args.out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    paillier.save_public_key(pk, paths["pk"])
    paillier.save_private_key(sk, paths["sk"])
    save_signing_keypair(sig, paths["sig"])
    print(f"wrote {paths['pk']}, {paths['sk']}, {paths['sig']} "
          f"(n: {bits} bits)")
    return EXIT_OK


def cmd_announce(args) -> int:
    with open(args.terms, encoding="utf-8") as fh:
        terms_obj = json.load(fh)
    paths = _key_paths(args.keys)
    pk = paillier.load_public_key(paths["pk"])
    sig = load_signing_keypair(paths["sig"])
    terms_obj.setdefault("public_key", pk.to_json_obj())
    terms = AuctionTerms.from_json_obj(terms_obj)
    if os.path.exists(args.board):
        print(f"announce: board file {args.board} already exists",
              file=sys.stderr)
        return EXIT_REJECTED
    board = BulletinBoard(path=args.board, auctioneer_keys=sig,
                          clock=_clock(args.now))
    entry = protocol.announce(board, terms, sig)
    print(f"announced auction {terms.auction_id!r} at entry {entry.seq}")
    return EXIT_OK


def cmd_register(args) -> int:
    board = _load_board(args)
    terms = protocol.load_terms(board)
    rng = _entropy(args.seed)
    paths = _key_paths(args.keys)
    if os.path.exists(paths["sig"]):
        keypair = load_signing_keypair(paths["sig"])
    else:
        directory = os.path.dirname(args.keys)
        if directory:
            os.makedirs(directory, exist_ok=True)
        keypair = generate_signing_keypair(rng)
        save_signing_keypair(keypair, paths["sig"])
    ident = protocol.new_bidder(board, terms, rng, keypair=keypair)
    with open(paths["id"], "w", encoding="ascii") as fh:
        json.dump({"pseudonym": ident.pseudonym,
                   "nonce": ident.nonce.hex(),
                   "auction_id": terms.auction_id}, fh, sort_keys=True)
        fh.write("\n")
    print(ident.pseudonym)
    return EXIT_OK


def _parse_bid_file(path: str, terms: AuctionTerms, pseudonym: str) -> Bid:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    raw_attrs = obj.get("attributes", {})
    values = []
    for spec in terms.attributes:
        if spec.name not in raw_attrs:
            raise AuctionError(f"bid file lacks attribute {spec.name!r}")
        values.append(str_to_fraction(str(raw_attrs[spec.name])))
    extra = set(raw_attrs) - {a.name for a in terms.attributes}
    if extra:
        raise AuctionError(f"bid file names unknown attributes: {sorted(extra)}")
    return Bid(pseudonym=pseudonym, attribute_values=tuple(values),
               price=str_to_fraction(str(obj["price"])))


def cmd_bid(args) -> int:
    auct_sig = load_signing_keypair(_key_paths(args.auctioneer_keys)["sig"])
    board = _load_board(args, auctioneer_keys=auct_sig)
    terms = protocol.load_terms(board)
    paths = _key_paths(args.keys)
    keypair = load_signing_keypair(paths["sig"])
    with open(paths["id"], encoding="ascii") as fh:
        pseudonym = json.load(fh)["pseudonym"]
    bid = _parse_bid_file(args.bid, terms, pseudonym)
    sealed, receipt = protocol.submit_bid(board, terms, bid, keypair,
                                          _entropy(args.seed))
    receipt_path = args.out or f"{args.keys}.receipt.json"
    receipt.save(receipt_path)
    print(f"bid accepted at entry {sealed.seq}; receipt written to "
          f"{receipt_path}")
    return EXIT_OK


def cmd_close(args) -> int:
    board = _load_board(args)
    terms = protocol.load_terms(board)
    bids = len(list(board.find("bid")))
    now = board.clock()
    if now < terms.deadline:
        print(f"bidding open until {terms.deadline.isoformat()} "
              f"({bids} bids so far)")
        return EXIT_REJECTED
    print(f"bidding closed at {terms.deadline.isoformat()}; {bids} bids")
    return EXIT_OK


def cmd_open(args) -> int:
    paths = _key_paths(args.keys)
    sig = load_signing_keypair(paths["sig"])
    sk = paillier.load_private_key(paths["sk"])
    board = _load_board(args, auctioneer_keys=sig)
    terms = protocol.load_terms(board)
    outcome = protocol.open_and_prove(board, terms, sk, _entropy(args.seed),
                                      threads=args.threads)
    if outcome.winner_pseudonym is None:
        print(f"no winner: all {len(outcome.disqualified)} bids disqualified")
    else:
        print(f"winner {outcome.winner_pseudonym} "
              f"(score {outcome.winner_score}, bid entry "
              f"{outcome.winner_bid_seq}); "
              f"{len(outcome.per_bid_range_proofs)} range proofs, "
              f"{len(outcome.per_loser_proofs)} inequality proofs, "
              f"{len(outcome.disqualified)} disqualified")
    return EXIT_OK


def cmd_verify(args) -> int:
    board = BulletinBoard.load(args.board)
    verdict = protocol.verify_outcome(board)
    if verdict.valid:
        print("VALID")
        return EXIT_OK
    print(f"INVALID: {verdict.reason}")
    return EXIT_INVALID


def cmd_appeal(args) -> int:
    sig = load_signing_keypair(_key_paths(args.keys)["sig"])
    board = _load_board(args, auctioneer_keys=sig)
    receipt = Receipt.load(args.receipt)
    verdict = board.appeal_non_inclusion(receipt)
    print(verdict.upper())
    return EXIT_OK


def cmd_simulate(args) -> int:
    rng = SeededEntropy(args.seed)
    if args.board and os.path.exists(args.board):
        print(f"simulate: board file {args.board} already exists",
              file=sys.stderr)
        return EXIT_REJECTED
    production = args.bits in paillier.PRODUCTION_BIT_LENGTHS
    sim = simulate.run_auction(
        rng, bidders=args.bidders, attributes=args.attributes,
        bit_length=args.bits, t=args.t, board_path=args.board,
        threads=args.threads, test_mode_keys=not production)
    verdict = protocol.verify_outcome(sim.board)
    winner = sim.outcome.winner_pseudonym
    print(f"simulated {args.bidders} bidders, winner {winner}; "
          f"verification: {'VALID' if verdict else verdict.reason}")
    return EXIT_OK if verdict else EXIT_INVALID


def cmd_bench(args) -> int:
    bits_list = [int(b) for b in args.bits.split(",")]
    bids_list = [int(b) for b in args.bids.split(",")]
    records = bench.run_sweep(
        bits_list, bids_list, args.seed, attributes=args.attributes,
        t=args.t, threads=args.threads,
        progress=lambda msg: print(msg, file=sys.stderr))
    csv = bench.to_csv(records)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(csv)
    print(csv, end="")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="veribid",
                     description="verifiable sealed-bid multi-attribute "
                                 "reverse auctions")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate Paillier and signing keys")
    p.add_argument("--bits", type=int, default=512)
    p.add_argument("--out", required=True, help="key file prefix")
    p.add_argument("--seed")
    p.add_argument("--insecure-seed", action="store_true",
                   help="allow seeded generation of production-size keys")
    p.set_defaults(handler=cmd_keygen)

    p = sub.add_parser("announce", help="publish auction terms on a new board")
    p.add_argument("--board", required=True)
    p.add_argument("--keys", required=True, help="auctioneer key prefix")
    p.add_argument("--terms", required=True, help="terms JSON file")
    p.add_argument("--now", help="clock override (RFC-3339)")
    p.set_defaults(handler=cmd_announce)

    p = sub.add_parser("register", help="register a pseudonym for bidding")
    p.add_argument("--board", required=True)
    p.add_argument("--keys", required=True, help="bidder key prefix")
    p.add_argument("--seed")
    p.add_argument("--now")
    p.set_defaults(handler=cmd_register)

    p = sub.add_parser("bid", help="encrypt and submit a bid")
    p.add_argument("--board", required=True)
    p.add_argument("--keys", required=True, help="bidder key prefix")
    p.add_argument("--auctioneer-keys", required=True,
                   help="board operator key prefix (signs the receipt)")
    p.add_argument("--bid", required=True, help="bid JSON file")
    p.add_argument("--out", help="receipt output path")
    p.add_argument("--seed")
    p.add_argument("--now")
    p.set_defaults(handler=cmd_bid)

    p = sub.add_parser("close", help="check whether bidding has closed")
    p.add_argument("--board", required=True)
    p.add_argument("--now")
    p.set_defaults(handler=cmd_close)

    p = sub.add_parser("open", help="open bids, prove and publish the outcome")
    p.add_argument("--board", required=True)
    p.add_argument("--keys", required=True, help="auctioneer key prefix")
    p.add_argument("--seed")
    p.add_argument("--now")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(handler=cmd_open)

    p = sub.add_parser("verify", help="publicly verify the published outcome")
    p.add_argument("--board", required=True)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("appeal", help="judge a non-inclusion appeal")
    p.add_argument("--board", required=True)
    p.add_argument("--keys", required=True, help="auctioneer key prefix")
    p.add_argument("--receipt", required=True)
    p.add_argument("--now")
    p.set_defaults(handler=cmd_appeal)

    p = sub.add_parser("simulate", help="run a seeded end-to-end auction")
    p.add_argument("--bidders", type=int, required=True)
    p.add_argument("--seed", required=True)
    p.add_argument("--board", help="board output file")
    p.add_argument("--attributes", type=int, default=2)
    p.add_argument("--bits", type=int, default=64)
    p.add_argument("--t", type=int, default=16)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("bench", help="time proof preparation and verification")
    p.add_argument("--bits", default="512,1024",
                   help="comma-separated key sizes")
    p.add_argument("--bids", default="50,100,200",
                   help="comma-separated bid counts")
    p.add_argument("--seed", default="0")
    p.add_argument("--attributes", type=int, default=1)
    p.add_argument("--t", type=int, default=16)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="CSV output file")
    p.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except AuctionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

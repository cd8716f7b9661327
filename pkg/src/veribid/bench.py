"""Timing harness: proof preparation vs verification across a key/bid sweep.

Each sweep cell runs one full simulated auction on an in-memory board (file
I/O stays out of the timed sections) and times the opening/proving phase
and the public verification phase separately.  Absolute numbers depend on
the machine; the relations that should always hold are: times grow with
the bid count and the key size, and verification is cheaper than proof
preparation in every cell.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from datetime import timedelta
from typing import Callable, Iterable, Optional

from . import paillier, protocol
from .entropy import SeededEntropy
from .errors import AuctionError
from .simulate import run_auction

CSV_HEADER = "key_bits,num_bids,phase,elapsed_ms"
PHASES = ("proof_preparation", "verification")


@dataclass(frozen=True)
class BenchRecord:
    key_bits: int
    num_bids: int
    phase: str
    elapsed_ms: int

    def csv_row(self) -> str:
        return f"{self.key_bits},{self.num_bids},{self.phase},{self.elapsed_ms}"


def _elapsed_ms(fn: Callable[[], object]) -> tuple[int, object]:
    start = time.perf_counter_ns()
    result = fn()
    return (time.perf_counter_ns() - start) // 1_000_000, result


def run_sweep(key_bits_list: Iterable[int], num_bids_list: Iterable[int],
              seed: int | str, *, attributes: int = 1, t: int = 16,
              threads: int = 1,
              progress: Optional[Callable[[str], None]] = None,
              ) -> list[BenchRecord]:
    records: list[BenchRecord] = []
    for bits in key_bits_list:
        keys = paillier.generate_keypair(
            bits, SeededEntropy(f"bench-keys|{seed}|{bits}"),
            test_mode=bits not in paillier.PRODUCTION_BIT_LENGTHS)
        for num_bids in num_bids_list:
            if progress:
                progress(f"bench: {bits}-bit key, {num_bids} bids")
            rng = SeededEntropy(f"bench|{seed}|{bits}|{num_bids}")
            sim = run_auction(rng, bidders=num_bids, attributes=attributes,
                              keys=keys, t=t, open_auction=False)
            sim.clock.jump_to(sim.terms.deadline + timedelta(seconds=1))
            prep_ms, _ = _elapsed_ms(lambda: protocol.open_and_prove(
                sim.board, sim.terms, sim.private_key, rng.spawn("open"),
                threads=threads))
            verify_ms, verdict = _elapsed_ms(
                lambda: protocol.verify_outcome(sim.board))
            if not verdict:
                raise AuctionError(
                    f"benchmark auction failed verification: {verdict.reason}")
            records.append(BenchRecord(bits, num_bids, "proof_preparation",
                                       prep_ms))
            records.append(BenchRecord(bits, num_bids, "verification",
                                       verify_ms))
    return records


def to_csv(records: Iterable[BenchRecord]) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"

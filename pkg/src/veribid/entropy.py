"""Randomness handles.

Every operation that needs randomness takes an explicit handle instead of
reaching for a global.  Two interchangeable sources are provided:

* :class:`SystemEntropy` draws from the OS CSPRNG (production use);
* :class:`SeededEntropy` is a deterministic SHA-256 counter generator so
  simulations and benchmarks replay bit-for-bit from a seed.

Both expose the ``random.Random`` API (``getrandbits``, ``randrange``,
``shuffle``, ``sample``) plus ``token_bytes`` and ``spawn``.  ``spawn``
derives an independent child stream for a labelled subtask, which keeps
results identical whether subtasks run sequentially or in parallel.
"""

from __future__ import annotations

import hashlib
import random
import secrets


class SystemEntropy(random.SystemRandom):
    """OS-backed entropy with the common handle interface."""

    def token_bytes(self, nbytes: int) -> bytes:
        return secrets.token_bytes(nbytes)

    def spawn(self, label: str) -> "SystemEntropy":
        del label
        return SystemEntropy()


class SeededEntropy(random.Random):
    """Deterministic byte stream: block(i) = SHA-256(key || i).

    Not suitable for production key material; intended for reproducible
    simulations, benchmarks and tests.
    """

    def __init__(self, seed: int | str | bytes):
        self._key = hashlib.sha256(b"veribid-entropy|" + _seed_bytes(seed)).digest()
        self._counter = 0
        self._buffer = b""
        self._spawned = 0

    def _take(self, nbytes: int) -> bytes:
        while len(self._buffer) < nbytes:
            block = hashlib.sha256(
                self._key + self._counter.to_bytes(16, "big")).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:nbytes], self._buffer[nbytes:]
        return out

    def token_bytes(self, nbytes: int) -> bytes:
        return self._take(nbytes)

    def getrandbits(self, k: int) -> int:
        if k < 0:
            raise ValueError("number of bits must be non-negative")
        if k == 0:
            return 0
        nbytes = (k + 7) // 8
        return int.from_bytes(self._take(nbytes), "big") >> (nbytes * 8 - k)

    def random(self) -> float:
        return self.getrandbits(53) / (1 << 53)

    def spawn(self, label: str) -> "SeededEntropy":
        child = SeededEntropy.__new__(SeededEntropy)
        child._key = hashlib.sha256(
            self._key + b"|spawn|" + self._spawned.to_bytes(8, "big")
            + b"|" + label.encode("utf-8")).digest()
        child._counter = 0
        child._buffer = b""
        child._spawned = 0
        self._spawned += 1
        return child

    def seed(self, *args, **kwargs) -> None:  # noqa: D102 - state is fixed at init
        pass

    def getstate(self):
        raise NotImplementedError("spawn() a child stream instead")

    def setstate(self, state):
        raise NotImplementedError("spawn() a child stream instead")


def _seed_bytes(seed: int | str | bytes) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, int):
        return str(seed).encode("ascii")
    if isinstance(seed, str):
        return seed.encode("utf-8")
    raise TypeError(f"unsupported seed type: {type(seed)!r}")

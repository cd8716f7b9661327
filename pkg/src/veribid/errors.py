"""Exception hierarchy shared by all veribid modules."""


class AuctionError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AuctionError):
    """An input violates a documented precondition (bad range, bad parameter)."""


class KeyGenerationError(AuctionError):
    """Key generation could not complete (e.g. the entropy source failed)."""


class CryptoError(AuctionError):
    """A cryptographic value is malformed or inconsistent (bad ciphertext,
    invalid help value, non-invertible element)."""


class ProofError(AuctionError):
    """A proof cannot be constructed from the given witness."""


class RejectedError(AuctionError):
    """A protocol-level submission was rejected (late, duplicate, unauthorized)."""


class BoardError(AuctionError):
    """The bulletin board refused an operation or failed to persist."""

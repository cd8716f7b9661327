import pytest

from veribid import paillier
from veribid.entropy import SeededEntropy


@pytest.fixture
def tiny_keys():
    """The 6-bit p=5, q=7 keypair used by the exhaustive oracles."""
    return paillier.keypair_from_primes(5, 7)


@pytest.fixture(scope="session")
def small_keys():
    """A 64-bit keypair: large enough for t=16 scores, cheap enough to loop."""
    return paillier.generate_keypair(64, SeededEntropy("small-keys"), test_mode=True)


@pytest.fixture(scope="session")
def keys_512():
    return paillier.generate_keypair(512, SeededEntropy("keys-512"))

import pytest
from hypothesis import HealthCheck, settings

from psmr.model import Command, Transaction

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")


def txn(seq, *records, value=b"v"):
    return Transaction(seq, tuple(Command.put(r, value) for r in records))


@pytest.fixture
def make_txn():
    return txn

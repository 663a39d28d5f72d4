import pytest
from hypothesis import settings

from secrelay.channel import DEFAULT_GAINS_DB, ChannelParams

settings.register_profile("repo", deadline=None, max_examples=200)
settings.load_profile("repo")


@pytest.fixture
def ref_channel():
    """Reference operating point: 5, 10, 0, 2 dB."""
    return ChannelParams.from_db(*DEFAULT_GAINS_DB)


@pytest.fixture
def unit_channel():
    return ChannelParams(1.0, 1.0, 1.0, 1.0)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from involution import EtaBounds, ExpChannelParams, exp_channel


@pytest.fixture(scope="session")
def ref():
    """The reference exp-channel: tau=1, T_p=0.5, vth=0.5 (symmetric pair)."""
    return exp_channel(ExpChannelParams(1.0, 0.5, 0.5))


@pytest.fixture(scope="session")
def zero_eta():
    return EtaBounds(0.0, 0.0)

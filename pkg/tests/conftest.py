import pytest

from srwpnet.core import MobilityConfig, NetworkConfig


@pytest.fixture(scope="session")
def mobility():
    # 45 km/h, 5 s hover, 250 m flights: one cycle every 25 s.
    return MobilityConfig(v=12.5, w=5.0, s=250.0)


@pytest.fixture(scope="session")
def network():
    return NetworkConfig(lambda0=1e-6, h=100.0, alpha=3.0)

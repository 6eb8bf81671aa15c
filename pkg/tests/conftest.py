import pytest

from core import quantize
from core.cache_manager import CacheManager
from core.fields import field_preset, potential_for
from core.symbols import PhaseGrid


@pytest.fixture(autouse=True)
def fresh_phase_cache():
    quantize.configure(threads=2, cache=CacheManager())
    yield
    quantize.configure(cache=CacheManager())


@pytest.fixture
def grid16():
    return PhaseGrid(2, 8.0, 16)


@pytest.fixture
def grid32():
    return PhaseGrid(2, 8.0, 32)


@pytest.fixture
def constant_field():
    return field_preset("constant:0.5", 2)


@pytest.fixture
def constant_potential(constant_field):
    return potential_for(constant_field)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_addoption(parser):
    parser.addoption(
        "--engine",
        default="auto",
        choices=["auto", "python", "compiled"],
        help="sampler engine for statistical tests",
    )


@pytest.fixture(scope="session")
def engine(request):
    return request.config.getoption("--engine")


@pytest.fixture(scope="session")
def warm_catalogs():
    """Exact catalogs and derived data, shared across the session."""
    from lerw import measures
    from lerw.paths import CrossingType

    return {t: measures.exact_shape_catalog(t) for t in CrossingType}

import pytest

from roottrace.tlds import default_registry, load_registry


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture()
def small_registry():
    return load_registry(
        ["# Version 0", "COM", "NET", "ORG", "ARPA", "NETWORKS", "IO"],
        source_description="test:small",
    )

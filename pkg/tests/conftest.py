import pathlib

import pytest

from digsite.catalog import builtin_relic, load_spec_file

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def sphere_spec():
    spec = load_spec_file(FIXTURES / "sphere.json")
    spec.validate()
    return spec


@pytest.fixture(scope="session")
def arhat_spec():
    return builtin_relic("arhat")


@pytest.fixture(scope="session")
def gold_mask_spec():
    return builtin_relic("gold_mask")

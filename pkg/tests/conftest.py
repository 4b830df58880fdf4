import pytest

from rfaug import kernels
from rfaug.model import load_dataset
from rfaug.testcards import write_testcards


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    kernels.warmup()


@pytest.fixture(scope="session")
def cards_root(tmp_path_factory):
    return write_testcards(tmp_path_factory.mktemp("cards"), count=20, seed=7)


@pytest.fixture(scope="session")
def cards(cards_root):
    return load_dataset(cards_root)

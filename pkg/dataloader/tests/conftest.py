import json

import pytest

from rfaug.testcards import write_testcards


@pytest.fixture(scope="session")
def cards_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("loader_cards")
    write_testcards(root, count=12, seed=13)
    return root


@pytest.fixture()
def make_config(tmp_path):
    def write(name="loader.json", **keys):
        path = tmp_path / name
        path.write_text(json.dumps(keys), encoding="utf-8")
        return path

    return write

from importlib import resources
from pathlib import Path

import pytest

from kampen.workspace import Workspace, load_workspace

FIXTURES = Path(str(resources.files("kampen"))) / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture(scope="session")
def load():
    cache: dict[str, Workspace] = {}

    def _load(name: str) -> Workspace:
        if name not in cache:
            cache[name] = load_workspace(FIXTURES / name)
        return cache[name]

    return _load


@pytest.fixture(scope="session")
def diagram(load):
    def _diagram(name: str):
        return load(name).diagram()

    return _diagram

import pytest

from efgpath import build_sequence_form, load_fixture


@pytest.fixture(scope="session")
def games():
    return {name: load_fixture(name) for name in ("fig1", "fig2", "fig3")}


@pytest.fixture(scope="session")
def sfs(games):
    return {name: build_sequence_form(g) for name, g in games.items()}

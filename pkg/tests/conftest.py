import pytest

from cermute import corpus


@pytest.fixture(scope="session")
def theory():
    return corpus.load_theory()


@pytest.fixture(scope="session")
def goals():
    return corpus.goal_lemmas()


@pytest.fixture(scope="session")
def goals_by_name(goals):
    return {g.name: g for g in goals}


@pytest.fixture(scope="session")
def functional():
    return corpus.functional_lemma()


@pytest.fixture(scope="session")
def ceremony():
    return corpus.load_ceremony()


@pytest.fixture(scope="session")
def catalog(theory):
    from cermute.mutations import enumerate_mutants

    return enumerate_mutants(theory)


@pytest.fixture(scope="session")
def catalog_by_label(catalog):
    return {str(m.label): m for m in catalog}

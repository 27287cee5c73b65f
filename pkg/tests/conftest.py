import pytest

from rrlang import dsl, ir, kb as kbmod


@pytest.fixture(scope="session")
def canonical_kb():
    return kbmod.KnowledgeBase.canonical()


@pytest.fixture(scope="session")
def kb_by_level(canonical_kb):
    return canonical_kb.kb_by_level()


@pytest.fixture(scope="session")
def fixture_units():
    return {
        name: dsl.load_fixture(name)
        for name in dsl.FIXTURE_NAMES
    }


@pytest.fixture(scope="session")
def e3_units(fixture_units):
    return {u.name: u for u in fixture_units["counting_e3"]}


@pytest.fixture(scope="session")
def globals_unit(fixture_units):
    return fixture_units["globals"][0]


@pytest.fixture(scope="session")
def levels():
    return (ir.Level.I, ir.Level.E1, ir.Level.E2, ir.Level.E3)

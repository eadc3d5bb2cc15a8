import numpy as np
import pytest

from boardrec.ontology import load_raw_ontology
from boardrec.pipeline.synth import SynthSpec, generate_synthetic

# 2 roots, 4 leaves, depths 1..3:
#   food -> cake, drinks -> {coffee, tea};  fashion -> dress
SEVEN = [
    {"node_id": "n1", "name": "Food", "parents": []},
    {"node_id": "n2", "name": "cake", "parents": ["food"]},
    {"node_id": "n3", "name": "drinks", "parents": ["food"]},
    {"node_id": "n4", "name": "coffee", "parents": ["drinks"]},
    {"node_id": "n5", "name": "tea", "parents": ["drinks"]},
    {"node_id": "n6", "name": "Fashion", "parents": []},
    {"node_id": "n7", "name": "dress", "parents": ["fashion"]},
]


@pytest.fixture
def seven():
    return load_raw_ontology(SEVEN)


@pytest.fixture
def wedding_ontology():
    return load_raw_ontology([
        {"node_id": "food", "name": "Food", "parents": []},
        {"node_id": "cake", "name": "cake", "parents": ["food"]},
        {"node_id": "wedding", "name": "Wedding", "parents": []},
        {"node_id": "wdress", "name": "wedding dress", "parents": ["wedding"]},
        {"node_id": "vintage", "name": "vintage", "parents": []},
    ])


@pytest.fixture(scope="session")
def small_corpus():
    return generate_synthetic(SynthSpec(n_users=60, n_topics=6, vocab_per_topic=12, labels_per_user=1.0,
                                        tweets_per_user=20, pins_per_board=4, noise=0.0, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ----------------------------------------------------------

_criteria: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    ok = rep.passed if rep.when == "call" else not (rep.failed or rep.skipped)
    prev = _criteria.get(number, (title, True))[1]
    _criteria[number] = (title, prev and ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}")

import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from s2vaudit.embed_store import EmbeddingTable

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion-4 scale: the synthetic corpus and desk training settings
DESK_CORPUS = dict(vocab_size=100, homophone_fraction=0.1, sentences=5000, sentence_len=8, noise_std=0.1, seed=7)
DESK_SEED = 7


def random_table(rng, n, dim, prefix="w"):
    return EmbeddingTable([f"{prefix}{i}" for i in range(n)], rng.normal(size=(n, dim)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def desk_run():
    """One desk-scale training run shared by every test that needs a trained model.

    Returns a dict with the corpus, config, final parameters, extracted
    table, and the wall time of generation + training + extraction.
    """
    from s2vaudit.speech2vec.corpus import make_synthetic_corpus
    from s2vaudit.speech2vec.train import TrainConfig, extract_word_embeddings, train

    t0 = time.perf_counter()
    corpus = make_synthetic_corpus(**DESK_CORPUS)
    config = TrainConfig.desk(seed=DESK_SEED)
    params, metrics = train(config, corpus)
    filtered = corpus.filter_min_count(config.min_count)
    table = extract_word_embeddings(params, config.model_config(), filtered, config.fixed_frames)
    elapsed = time.perf_counter() - t0
    return {
        "corpus": filtered,
        "config": config,
        "params": params,
        "metrics": metrics,
        "table": table,
        "seconds": elapsed,
    }


# ------------------------------------------------------------ acceptance lines

_criteria: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "status": "PASS", "seconds": 0.0, "why": ""})
    if rep.when in ("setup", "call"):  # setup carries shared fixtures such as desk_run
        entry["seconds"] += rep.duration
    if rep.skipped and entry["status"] == "PASS":
        entry["status"] = "SKIP"
        entry["why"] = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else ""
    elif rep.failed:
        entry["status"] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        why = f"  [{e['why']}]" if e["why"] else ""
        tr.line(f"criterion {number}: {e['status']:<4} {e['seconds']:8.1f}s  {e['title']}{why}")

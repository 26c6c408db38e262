"""Shared fixtures: the desk-scale trained models used across test modules.

Training fixtures are session-scoped because they take minutes; everything
downstream (acceptance, closed-world scans, analogy probes) reuses them.
"""

import time
from types import SimpleNamespace

import pytest

from morphoglot.config import RunConfig
from morphoglot.igt import Corpus
from morphoglot.pipeline import fit_pipeline
from morphoglot.synth import generate_corpus, split_with_target_oov, standard_spec

#: the standard synthetic language: 50 stems, 2 affix slots x 4 affixes
STANDARD_SPEC = standard_spec(
    stem_count=50, n_slots=2, affixes_per_slot=4, occupancy=0.85,
    sentence_length=(3, 5), seed=11,
)

#: OOV benchmark language: long-tailed stems, short sentences, so a split
#: with ~10% eval OOV morphemes is reachable
OOV_SPEC = standard_spec(
    stem_count=60, n_slots=2, affixes_per_slot=4, occupancy=0.85,
    sentence_length=(2, 4), seed=13, zipf_exponent=0.8, stem_syllables=2,
)

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def standard_bundle():
    corpus = generate_corpus(STANDARD_SPEC, 2500)
    split = split_with_target_oov(corpus, 0.8, 0.0)
    assert split.achieved_oov == 0.0
    half = len(split.eval) // 2
    dev = Corpus(split.eval.sentences[:half], "dev")
    test = Corpus(split.eval.sentences[half:], "test")
    return SimpleNamespace(
        spec=STANDARD_SPEC, train=split.train, dev=dev, test=test,
        achieved_oov=split.achieved_oov,
    )


@pytest.fixture(scope="session")
def standard_model(standard_bundle):
    config = RunConfig.desk_scale()
    started = time.time()
    pipeline, logs = fit_pipeline(standard_bundle.train, config,
                                  dev_corpus=standard_bundle.dev)
    wall_time = time.time() - started
    return SimpleNamespace(pipeline=pipeline, logs=logs, config=config,
                           wall_time=wall_time, bundle=standard_bundle)


@pytest.fixture(scope="session")
def oov_bundle():
    corpus = generate_corpus(OOV_SPEC, 2000)
    split = split_with_target_oov(corpus, 0.8, 0.10)
    # checkpoint-selection dev carved from the train side; eval stays untouched
    dev_n = max(len(split.train) // 10, 50)
    dev = Corpus(split.train.sentences[-dev_n:], "dev")
    train = Corpus(split.train.sentences[:-dev_n], "train")
    return SimpleNamespace(
        spec=OOV_SPEC, train=train, dev=dev, eval=split.eval,
        achieved_oov=split.achieved_oov, warning=split.warning,
        full_train=split.train,
    )


@pytest.fixture(scope="session")
def oov_model(oov_bundle):
    config = RunConfig.desk_scale(enc_patience=8)
    pipeline, logs = fit_pipeline(oov_bundle.train, config, dev_corpus=oov_bundle.dev)
    return SimpleNamespace(pipeline=pipeline, logs=logs, config=config, bundle=oov_bundle)

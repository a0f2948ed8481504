"""Shared fixtures: deterministic generated corpora and hypothesis profiles.

The main corpus drives the cross-method, modal, and preorder checks; the
small corpus keeps the cubic reference procedures in oracles.py affordable.
Both are seeded, so every run sees the same terms.
"""

import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from txbisim import (
    Analysis,
    CheckOptions,
    GenConfig,
    StateBudgetError,
    equivalent_pair,
    explore,
    parse_file,
    rand_term,
)

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

CORPUS_SEED = 20260819
CORPUS_SIZE = 220
CORPUS_STATE_CAP = 400

SMALL_SEED = 988
SMALL_SIZE = 24
SMALL_STATE_CAP = 40


def _states_within(p, q, cap):
    try:
        explore((p, q), cap)
    except StateBudgetError:
        return False
    return True


def _build_corpus(seed, size, cfg, cap, rewrite_share):
    """Deterministic list of (p, q, hint); hint True means equivalent by
    construction, None means unknown.  Oversized pairs are skipped."""
    rng = random.Random(seed)
    out = []
    while len(out) < size:
        want_rewrite = rng.random() < rewrite_share
        if want_rewrite:
            p, q = equivalent_pair(rng, cfg)
            hint = True
        else:
            p, q = rand_term(rng, cfg), rand_term(rng, cfg)
            hint = None
        if not _states_within(p, q, cap):
            continue
        out.append((p, q, hint))
    return out


@pytest.fixture(scope="session")
def corpus():
    cfg = GenConfig(alphabet=("a", "b"), max_depth=4)
    return _build_corpus(CORPUS_SEED, CORPUS_SIZE, cfg, CORPUS_STATE_CAP, 0.3)


@pytest.fixture(scope="session")
def small_corpus():
    cfg = GenConfig(alphabet=("a", "b"), max_depth=3)
    return _build_corpus(SMALL_SEED, SMALL_SIZE, cfg, SMALL_STATE_CAP, 0.25)


@pytest.fixture(scope="session")
def corpus_analyses(corpus):
    """One shared lazy analysis per corpus pair, reused across criteria."""
    opts = CheckOptions(max_states=4 * CORPUS_STATE_CAP)
    return [Analysis(p, q, opts) for p, q, _ in corpus]


def load_fixture(name):
    return parse_file((FIXTURES / name).read_text())


@pytest.fixture(scope="session")
def stability_defs():
    return load_fixture("stability.ccspt")


@pytest.fixture(scope="session")
def extra_action_defs():
    return load_fixture("extra_action.ccspt")


@pytest.fixture(scope="session")
def no_eliding_defs():
    return load_fixture("no_eliding.ccspt")


@pytest.fixture(scope="session")
def laws_defs():
    return load_fixture("laws.ccspt")

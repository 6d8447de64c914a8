"""Shared fixtures: the reference sample D1 and table factories."""

from pathlib import Path

import pytest

from survtest.config import get_settings
from survtest.core.base import Observation
from survtest.core.survival_data import build_risk_table

DATA_DIR = Path(__file__).parent / "data"

# group A: (1,e) (2,e) (3,c) (3,e); group B: (1,c) (2,e) (2,e) (4,e)
D1_ROWS = [
    ("A", 1, 1), ("A", 2, 1), ("A", 3, 0), ("A", 3, 1),
    ("B", 1, 0), ("B", 2, 1), ("B", 2, 1), ("B", 4, 1),
]


def make_observations(rows):
    """Observations from (label, time, event) rows, labels indexed by first appearance."""
    labels: dict[str, int] = {}
    observations = [
        Observation(time=time, event=bool(event), group=labels.setdefault(label, len(labels)))
        for label, time, event in rows
    ]
    return observations, tuple(labels)


def make_table(rows):
    observations, labels = make_observations(rows)
    return build_risk_table(observations, labels)


@pytest.fixture
def d1_rows():
    return list(D1_ROWS)


@pytest.fixture
def d1_table():
    return make_table(D1_ROWS)


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Settings are rebuilt from the environment for every test."""
    monkeypatch.delenv("SURVTEST_SEED", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()

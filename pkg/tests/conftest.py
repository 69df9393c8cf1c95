"""Shared fixtures and strategies for the test suite."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from fairthresh.core import DisparityKind, GroupStats


def normalized_stats(raw: list[float]) -> GroupStats:
    total = sum(raw)
    return GroupStats(p11=raw[0] / total, p10=raw[1] / total, p01=raw[2] / total, p00=raw[3] / total)


# Cells bounded away from 0 so thresholds and weights stay well-conditioned.
stats_strategy = st.builds(
    normalized_stats,
    st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=4, max_size=4),
)

kind_strategy = st.sampled_from(list(DisparityKind))


@pytest.fixture
def table_stats() -> GroupStats:
    """The canonical cell probabilities used across the experiment protocol."""
    return GroupStats(p11=0.49, p10=0.21, p01=0.12, p00=0.18)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(652901)


def random_stats(rng: np.random.Generator, low: float = 0.05) -> GroupStats:
    raw = rng.uniform(low, 1.0, size=4)
    return normalized_stats(list(raw))

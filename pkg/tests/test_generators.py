"""Spike generators: Poisson statistics, determinism, schedule replay."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikearm.errors import ConfigError
from spikearm.generators import custom_schedule, poisson_events


def test_rate_zero_empty():
    assert len(poisson_events(0.0, 1000.0, seed=1)) == 0


def test_validation():
    with pytest.raises(ConfigError, match="rate"):
        poisson_events(-1.0, 100.0, seed=1)
    with pytest.raises(ConfigError, match="duration"):
        poisson_events(10.0, 0.0, seed=1)


def test_count_within_four_sigma():
    # 100 Hz for 10 s: expect 1000, accept +-4 sigma
    ev = poisson_events(100.0, 10_000.0, seed=42)
    assert 800 <= len(ev) <= 1200


def test_same_seed_identical():
    a = poisson_events(250.0, 2000.0, seed=7)
    b = poisson_events(250.0, 2000.0, seed=7)
    np.testing.assert_array_equal(a.t_us, b.t_us)
    np.testing.assert_array_equal(a.line, b.line)


def test_different_seed_differs():
    a = poisson_events(250.0, 2000.0, seed=7)
    b = poisson_events(250.0, 2000.0, seed=8)
    assert len(a) != len(b) or not np.array_equal(a.t_us, b.t_us)


def test_events_sorted_and_in_range():
    ev = poisson_events(500.0, 2000.0, seed=3)
    t = np.asarray(ev.t_us)
    assert (np.diff(t) >= 0).all()
    assert t.min() >= 0 and t.max() <= 2_000_000


def test_line_and_offset():
    ev = poisson_events(100.0, 1000.0, seed=5, line=3, t_offset_us=500_000)
    assert (np.asarray(ev.line) == 3).all()
    assert np.asarray(ev.t_us).min() >= 500_000
    assert np.asarray(ev.t_us).max() <= 1_500_000


def test_custom_schedule_replay():
    ev = custom_schedule([(0, 0), (100, 1), (100, 2), (250, 0)])
    assert list(ev.t_us) == [0, 100, 100, 250]
    assert list(ev.line) == [0, 1, 2, 0]


def test_custom_schedule_empty():
    assert len(custom_schedule([])) == 0


def test_custom_schedule_unsorted_rejected():
    with pytest.raises(ConfigError, match="sorted"):
        custom_schedule([(100, 0), (50, 0)])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_determinism_over_seeds(seed):
    a = poisson_events(50.0, 200.0, seed)
    b = poisson_events(50.0, 200.0, seed)
    assert np.array_equal(a.t_us, b.t_us)

"""Calibration table, ID classification and count <-> angle conversion."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spikearm.angles import (ANGLE_TABLE, HOME_COUNT, CountScale, classify,
                             map_angle)
from spikearm.errors import ConfigError

# (cluster, id_lo, id_hi, angle_deg, spike_ref, position16)
TABLE_ROWS = [
    (1, 1, 8, 0.0, 0, 32768),
    (2, 10, 17, 10.4, 32, 34086),
    (3, 19, 26, 20.8, 64, 35406),
    (4, 28, 35, 31.2, 96, 36724),
    (5, 37, 44, 41.6, 128, 38044),
    (6, 46, 53, 52.0, 160, 39362),
    (7, 55, 62, 62.4, 192, 40682),
    (8, 64, 71, 72.8, 224, 42000),
    (9, 73, 80, 83.2, 256, 43320),
    (10, 82, 89, 93.6, 288, 44638),
    (11, 91, 98, 104.0, 320, 45958),
    (12, 100, 107, 114.4, 352, 47276),
]


def test_table_rows_exact():
    assert len(ANGLE_TABLE) == 12
    for row, e in zip(TABLE_ROWS, ANGLE_TABLE):
        assert row == (e.cluster, e.id_lo, e.id_hi, e.angle_deg,
                       e.spike_ref, e.position16)


def test_map_angle_examples():
    assert (map_angle(1).spike_ref, map_angle(1).position16) == (0, 32768)
    e8 = map_angle(8)
    assert (e8.spike_ref, e8.position16, e8.angle_deg) == (224, 42000, 72.8)
    e12 = map_angle(12)
    assert (e12.spike_ref, e12.position16, e12.angle_deg) == (352, 47276, 114.4)


def test_map_angle_range():
    with pytest.raises(ConfigError, match="cluster"):
        map_angle(0)
    with pytest.raises(ConfigError, match="cluster"):
        map_angle(13)


def test_classify_examples():
    assert classify(1) == 1
    assert classify(107) == 12
    assert classify(64) == 8
    assert classify(9) is None          # gap between clusters 1 and 2


def test_classify_total_on_address_space():
    by_range = {}
    for c, lo, hi, *_ in TABLE_ROWS:
        for nid in range(lo, hi + 1):
            by_range[nid] = c
    for nid in range(1024):
        assert classify(nid) == by_range.get(nid)
    assert classify(-1) is None
    assert classify(1024) is None


def test_gap_ids_unmapped():
    for nid in range(9, 100, 9):
        assert classify(nid) is None


def test_scale_reproduces_anchors():
    s = CountScale()
    for _, _, _, angle, _, pos in TABLE_ROWS:
        assert s.count_of(angle) == pos
        assert s.angle_of(pos) == pytest.approx(angle, abs=1e-12)


def test_scale_home():
    assert CountScale().count_of(0.0) == HOME_COUNT


def test_scale_linear_between_anchors():
    s = CountScale()
    # halfway between rows 1 and 2: 32768 + 1318/2
    assert s.counts_of(5.2) == pytest.approx(32768 + 659.0)
    assert s.count_of(5.2) == 33427


def test_counts_per_degree_near_nominal():
    s = CountScale()
    for angle in (5.0, 50.0, 110.0):
        assert s.counts_per_degree(angle) == pytest.approx(126.7, abs=0.3)


def test_scale_monotone_and_extrapolates():
    s = CountScale()
    xs = [-10.0, -1.0, 0.0, 57.3, 114.4, 125.0]
    ys = [s.counts_of(a) for a in xs]
    assert ys == sorted(ys)
    assert ys[0] < HOME_COUNT


def test_scale_needs_two_anchors():
    with pytest.raises(ConfigError, match="two anchors"):
        CountScale(ANGLE_TABLE[:1])


@given(st.floats(min_value=0.0, max_value=114.4,
                 allow_nan=False, allow_infinity=False))
def test_scale_inverse_property(angle):
    s = CountScale()
    assert s.angle_of(s.counts_of(angle)) == pytest.approx(angle, abs=1e-9)

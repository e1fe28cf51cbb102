"""Cluster-to-angle calibration of the simulated joint.

The table binds each of the 12 competing clusters to its neuron-ID range,
joint angle, digital spike reference and 16-bit encoder target (32768 is
the home count at 0 degrees).  Successive rows differ by 1318 or 1320
counts per 10.4-degree step; the conversion between angle and counts is
therefore piecewise linear through the anchors rather than one constant,
so every row is reproduced exactly.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .errors import ConfigError

HOME_COUNT = 32768


@dataclass(frozen=True)
class AngleMapEntry:
    """One calibration row: cluster, ID range, angle, spike ref, target count."""

    cluster: int
    id_lo: int
    id_hi: int
    angle_deg: float
    spike_ref: int
    position16: int


ANGLE_TABLE: tuple[AngleMapEntry, ...] = (
    AngleMapEntry(1, 1, 8, 0.0, 0, 32768),
    AngleMapEntry(2, 10, 17, 10.4, 32, 34086),
    AngleMapEntry(3, 19, 26, 20.8, 64, 35406),
    AngleMapEntry(4, 28, 35, 31.2, 96, 36724),
    AngleMapEntry(5, 37, 44, 41.6, 128, 38044),
    AngleMapEntry(6, 46, 53, 52.0, 160, 39362),
    AngleMapEntry(7, 55, 62, 62.4, 192, 40682),
    AngleMapEntry(8, 64, 71, 72.8, 224, 42000),
    AngleMapEntry(9, 73, 80, 83.2, 256, 43320),
    AngleMapEntry(10, 82, 89, 93.6, 288, 44638),
    AngleMapEntry(11, 91, 98, 104.0, 320, 45958),
    AngleMapEntry(12, 100, 107, 114.4, 352, 47276),
)

N_CLUSTERS = len(ANGLE_TABLE)

_CLUSTER_OF = [None] * 1024
for _e in ANGLE_TABLE:
    for _nid in range(_e.id_lo, _e.id_hi + 1):
        _CLUSTER_OF[_nid] = _e.cluster


def classify(neuron_id: int) -> int | None:
    """Cluster owning a neuron ID; None for gap, pool and out-of-range IDs."""
    if 0 <= neuron_id < 1024:
        return _CLUSTER_OF[neuron_id]
    return None


def map_angle(cluster: int) -> AngleMapEntry:
    """Calibration row for a cluster (1..12)."""
    if not 1 <= cluster <= N_CLUSTERS:
        raise ConfigError(f"cluster {cluster} outside 1..{N_CLUSTERS}")
    return ANGLE_TABLE[cluster - 1]


class CountScale:
    """Piecewise-linear angle <-> encoder-count conversion through the anchors."""

    def __init__(self, table: tuple[AngleMapEntry, ...] = ANGLE_TABLE):
        self.angles = [e.angle_deg for e in table]
        self.counts = [float(e.position16) for e in table]
        if len(self.angles) < 2:
            raise ConfigError("need at least two anchors")

    def _segment(self, xs: list[float], x: float) -> int:
        i = bisect_right(xs, x) - 1
        return min(max(i, 0), len(xs) - 2)

    def counts_of(self, angle_deg: float) -> float:
        i = self._segment(self.angles, angle_deg)
        a0, a1 = self.angles[i], self.angles[i + 1]
        c0, c1 = self.counts[i], self.counts[i + 1]
        return c0 + (angle_deg - a0) * (c1 - c0) / (a1 - a0)

    def count_of(self, angle_deg: float) -> int:
        # round half away from zero is irrelevant here: counts are ~2^15
        return int(self.counts_of(angle_deg) + 0.5)

    def angle_of(self, count: float) -> float:
        i = self._segment(self.counts, float(count))
        a0, a1 = self.angles[i], self.angles[i + 1]
        c0, c1 = self.counts[i], self.counts[i + 1]
        return a0 + (count - c0) * (a1 - a0) / (c1 - c0)

    def counts_per_degree(self, angle_deg: float) -> float:
        i = self._segment(self.angles, angle_deg)
        return ((self.counts[i + 1] - self.counts[i])
                / (self.angles[i + 1] - self.angles[i]))

"""Spike events and traces.

Every stage of the chain exchanges the same currency: a spike identified by
an integer-microsecond timestamp and a global neuron ID.  Traces are stored
as column arrays so window counting and CSV export stay cheap.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

#: Simulation tick length in microseconds (0.1 ms fixed step).
DT_US = 100


@dataclass(frozen=True)
class SpikeEvent:
    """One spike: timestamp in integer microseconds plus global neuron ID."""

    t: int
    neuron_id: int


@dataclass
class SpikeTrace:
    """Spike raster, nondecreasing in time with ties broken by neuron ID."""

    t_us: np.ndarray       # int64, sorted
    neuron_id: np.ndarray  # int32
    duration_us: int

    @classmethod
    def empty(cls, duration_us: int = 0) -> "SpikeTrace":
        return cls(np.empty(0, np.int64), np.empty(0, np.int32), duration_us)

    def __len__(self) -> int:
        return len(self.t_us)

    def __iter__(self) -> Iterator[SpikeEvent]:
        for t, n in zip(self.t_us, self.neuron_id):
            yield SpikeEvent(int(t), int(n))

    def window(self, t0_us: int, t1_us: int) -> "SpikeTrace":
        """Events with t0 <= t < t1, as a view-backed trace."""
        lo = np.searchsorted(self.t_us, t0_us, side="left")
        hi = np.searchsorted(self.t_us, t1_us, side="left")
        return SpikeTrace(self.t_us[lo:hi], self.neuron_id[lo:hi], self.duration_us)

    def of_neurons(self, ids) -> "SpikeTrace":
        mask = np.isin(self.neuron_id, ids)
        return SpikeTrace(self.t_us[mask], self.neuron_id[mask], self.duration_us)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_us", "neuron_id"])
            for t, n in zip(self.t_us, self.neuron_id):
                w.writerow([int(t), int(n)])

    @classmethod
    def from_csv(cls, path, duration_us: int | None = None) -> "SpikeTrace":
        with open(path) as fh:
            fh.readline()                 # header
            body = fh.read()
        if not body.strip():
            return cls.empty(duration_us or 0)
        data = np.loadtxt(io.StringIO(body), delimiter=",", dtype=np.int64,
                          ndmin=2)
        t = data[:, 0]
        if duration_us is None:
            duration_us = int(t[-1]) + 1
        return cls(t.astype(np.int64), data[:, 1].astype(np.int32), duration_us)


def merge_traces(traces: list[SpikeTrace], duration_us: int) -> SpikeTrace:
    """Merge traces into one sorted by (t, neuron_id)."""
    if not traces:
        return SpikeTrace.empty(duration_us)
    t = np.concatenate([tr.t_us for tr in traces])
    n = np.concatenate([tr.neuron_id for tr in traces])
    order = np.lexsort((n, t))
    return SpikeTrace(t[order], n[order], duration_us)


@dataclass
class InputStream:
    """External stimulus events: (t_us, input line) pairs, time-sorted."""

    t_us: np.ndarray  # int64
    line: np.ndarray  # int32

    @classmethod
    def empty(cls) -> "InputStream":
        return cls(np.empty(0, np.int64), np.empty(0, np.int32))

    @classmethod
    def from_pairs(cls, pairs) -> "InputStream":
        if not len(pairs):
            return cls.empty()
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1].astype(np.int32)).sorted()

    def sorted(self) -> "InputStream":
        order = np.lexsort((self.line, self.t_us))
        return InputStream(self.t_us[order], self.line[order])

    def __len__(self) -> int:
        return len(self.t_us)


def merge_streams(streams: list[InputStream]) -> InputStream:
    if not streams:
        return InputStream.empty()
    t = np.concatenate([s.t_us for s in streams])
    ln = np.concatenate([s.line for s in streams])
    order = np.lexsort((ln, t))
    return InputStream(t[order], ln[order])

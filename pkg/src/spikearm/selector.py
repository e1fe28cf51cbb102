"""Spike-history filtering between the decoded event stream and the joint.

Raw winner traffic switches far too often to command a motor directly.  Two
debounce filters are provided:

* :class:`HistoryFilter` (default): one integrate-and-fire counter per
  angle; an arriving event increments its angle's counter, the first
  counter to reach threshold selects that angle and resets everyone.
* :class:`IsiFilter`: tracks the latest inter-spike interval per angle and
  follows the angle with the shortest one (the highest instantaneous rate).

The selected cluster is then mapped through the calibration table and
repeated selections of the current angle are dropped, so the command rate
is bounded by threshold/events regardless of input chatter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .angles import AngleMapEntry, N_CLUSTERS, classify, map_angle
from .errors import ConfigError


class HistoryFilter:
    """Per-angle integrate-and-fire counters with mutual reset on selection."""

    def __init__(self, threshold: int = 50, n_angles: int = N_CLUSTERS,
                 leak_tau_ms: float | None = None):
        if threshold < 1:
            raise ConfigError("threshold must be >= 1")
        if leak_tau_ms is not None and leak_tau_ms <= 0:
            raise ConfigError("leak_tau_ms must be positive")
        self.threshold = threshold
        self.n_angles = n_angles
        self.leak_tau_ms = leak_tau_ms
        self.counters = [0.0] * (n_angles + 1)   # 1-based clusters
        self.last_selected: int | None = None
        self._last_t_us = 0

    def step(self, cluster: int, t_us: int = 0) -> int | None:
        """Feed one classified event; returns the selected angle, if any."""
        if not 1 <= cluster <= self.n_angles:
            raise ConfigError(f"cluster {cluster} outside 1..{self.n_angles}")
        if self.leak_tau_ms is not None and t_us > self._last_t_us:
            decay = math.exp(-(t_us - self._last_t_us) / (self.leak_tau_ms * 1000.0))
            self.counters = [c * decay for c in self.counters]
        self._last_t_us = t_us
        self.counters[cluster] += 1.0
        if self.counters[cluster] >= self.threshold:
            # winner resets itself and zeroes every rival counter
            self.counters = [0.0] * (self.n_angles + 1)
            self.last_selected = cluster
            return cluster
        return None


class IsiFilter:
    """Follow the angle with the smallest latest inter-spike interval.

    Re-evaluated on every event; emits only when the argmin changes.  Equal
    intervals resolve to the lowest cluster index.
    """

    def __init__(self, n_angles: int = N_CLUSTERS):
        self.n_angles = n_angles
        self.last_t: list[int | None] = [None] * (n_angles + 1)
        self.isi: list[int | None] = [None] * (n_angles + 1)
        self.last_selected: int | None = None

    def step(self, cluster: int, t_us: int) -> int | None:
        if not 1 <= cluster <= self.n_angles:
            raise ConfigError(f"cluster {cluster} outside 1..{self.n_angles}")
        prev = self.last_t[cluster]
        if prev is not None:
            self.isi[cluster] = t_us - prev
        self.last_t[cluster] = t_us
        best = None
        best_isi = None
        for k in range(1, self.n_angles + 1):
            isi = self.isi[k]
            if isi is None:
                continue
            if best_isi is None or isi < best_isi:
                best, best_isi = k, isi
        if best is not None and best != self.last_selected:
            self.last_selected = best
            return best
        return None


@dataclass(frozen=True)
class AngleCommand:
    """One debounced joint command produced by the selector."""

    t_us: int
    cluster: int
    entry: AngleMapEntry


class SelectorPipeline:
    """classify -> debounce filter -> calibration row, with repeat suppression."""

    def __init__(self, mode: str = "if", threshold: int = 50,
                 leak_tau_ms: float | None = None):
        if mode == "if":
            self.filter = HistoryFilter(threshold=threshold, leak_tau_ms=leak_tau_ms)
        elif mode == "isi":
            self.filter = IsiFilter()
        else:
            raise ConfigError(f"filter mode must be 'if' or 'isi', got {mode!r}")
        self.mode = mode
        self.current: int | None = None
        self.n_events = 0

    def feed(self, t_us: int, neuron_id: int) -> AngleCommand | None:
        """Process one decoded spike; returns a command on a new selection."""
        cluster = classify(neuron_id)
        if cluster is None:
            return None
        self.n_events += 1
        selected = self.filter.step(cluster, t_us)
        if selected is None or selected == self.current:
            return None
        self.current = selected
        return AngleCommand(t_us, selected, map_angle(selected))


def write_command_log(path, commands: list[AngleCommand]) -> None:
    """Command log CSV: ``t_us,cluster,angle_deg,spike_ref,position16``."""
    with open(path, "w", newline="") as fh:
        fh.write("t_us,cluster,angle_deg,spike_ref,position16\n")
        for c in commands:
            e = c.entry
            fh.write(f"{c.t_us},{c.cluster},{e.angle_deg!r},{e.spike_ref},{e.position16}\n")

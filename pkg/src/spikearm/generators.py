"""Stimulus generators: seeded Poisson trains and verbatim schedules."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .events import InputStream


def poisson_events(rate_hz: float, duration_ms: float, seed: int,
                   line: int = 0, t_offset_us: int = 0) -> InputStream:
    """Homogeneous Poisson train on one input line.

    Same (rate, duration, seed) always yields the same stream; timestamps
    are floored to integer microseconds.
    """
    if rate_hz < 0:
        raise ConfigError("rate must be nonnegative")
    if duration_ms <= 0:
        raise ConfigError("duration must be positive")
    if rate_hz == 0:
        return InputStream.empty()

    rng = np.random.default_rng(seed)
    duration_s = duration_ms / 1000.0
    times: list[np.ndarray] = []
    t = 0.0
    # draw in chunks until past the end; sequential draws keep determinism
    chunk = max(16, int(rate_hz * duration_s) + 1)
    while t < duration_s:
        gaps = rng.exponential(1.0 / rate_hz, size=chunk)
        cum = t + np.cumsum(gaps)
        times.append(cum[cum < duration_s])
        t = float(cum[-1])
    ts = np.concatenate(times) if times else np.empty(0)
    t_us = np.floor(ts * 1e6).astype(np.int64) + t_offset_us
    return InputStream(t_us, np.full(len(t_us), line, np.int32))


def custom_schedule(schedule) -> InputStream:
    """Verbatim replay of (t_us, line) pairs; must already be time-sorted."""
    pairs = list(schedule)
    if not pairs:
        return InputStream.empty()
    t = np.asarray([p[0] for p in pairs], np.int64)
    if np.any(np.diff(t) < 0):
        raise ConfigError("schedule must be sorted by time")
    line = np.asarray([p[1] for p in pairs], np.int32)
    return InputStream(t, line)

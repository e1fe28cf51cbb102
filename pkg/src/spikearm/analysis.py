"""Settling analysis of closed-loop runs.

Works on the sampled ground-truth trace and the command log, so it can run
in-process after a simulation or later from the CSVs in a run directory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .angles import HOME_COUNT, map_angle
from .errors import ConfigError

BAND_DEG = 0.5          # settled means within this of the commanded angle
DWELL_US = 200_000      # and staying there at least this long


@dataclass(frozen=True)
class SettleResult:
    """Settling outcome for one command, measured inside its window."""

    t_cmd_us: int
    cluster: int
    target_position: int
    target_deg: float
    step_counts: int          # commanded change, signed
    settle_ms: float | None   # None: never settled inside the window
    final_err_deg: float

    def as_dict(self) -> dict:
        return {
            "t_cmd_us": self.t_cmd_us,
            "cluster": self.cluster,
            "target_position": self.target_position,
            "target_deg": self.target_deg,
            "step_counts": self.step_counts,
            "settle_ms": self.settle_ms,
            "final_err_deg": self.final_err_deg,
        }


def analyze_settling(joint_t_us: np.ndarray, joint_angle: np.ndarray,
                     commands, duration_us: int,
                     band_deg: float = BAND_DEG,
                     dwell_us: int = DWELL_US,
                     home: int = HOME_COUNT) -> list[SettleResult]:
    """Per-command settling times from the sampled angle trace.

    A command settles at the first sample after it from which the angle
    stays within ``band_deg`` of the target for ``dwell_us``, all inside
    the command's window (until the next command or end of run).  A
    re-command of the current angle that is already inside the band
    settles at time zero.
    """
    if len(commands) == 0:
        raise ConfigError("need at least one command to analyze")
    t = np.asarray(joint_t_us, np.int64)
    ang = np.asarray(joint_angle, float)
    out: list[SettleResult] = []
    prev_target = home
    for i, cmd in enumerate(commands):
        t_cmd = cmd.t_us
        t_end = commands[i + 1].t_us if i + 1 < len(commands) else duration_us
        entry = cmd.entry if hasattr(cmd, "entry") else map_angle(cmd.cluster)
        target_deg = entry.angle_deg
        sel = (t >= t_cmd) & (t < t_end)
        tw, aw = t[sel], ang[sel]
        settle_ms = None
        if len(tw):
            inside = np.abs(aw - target_deg) <= band_deg
            # first index from which the band holds through the dwell time
            start = None
            for j, ok in enumerate(inside):
                if not ok:
                    start = None
                    continue
                if start is None:
                    start = j
                if tw[j] - tw[start] >= dwell_us:
                    settle_ms = (tw[start] - t_cmd) / 1000.0
                    break
            final_err = float(aw[-1] - target_deg)
        else:
            final_err = float("nan")
        step = entry.position16 - prev_target
        prev_target = entry.position16
        out.append(SettleResult(t_cmd, cmd.cluster, entry.position16,
                                target_deg, step, settle_ms, final_err))
    return out


def monotonicity(results: list[SettleResult]) -> list[tuple[int, float]]:
    """(|step| in counts, settle_ms) pairs for settled steps, sorted by step."""
    pairs = [(abs(r.step_counts), r.settle_ms) for r in results
             if r.settle_ms is not None and r.step_counts != 0]
    return sorted(pairs)


def read_joint_csv(path):
    t, angle, velocity, count = [], [], [], []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["t_us", "angle_deg", "velocity", "encoder_count"]:
            raise ConfigError(f"unexpected joint trace header {header}")
        for row in r:
            t.append(int(row[0]))
            angle.append(float(row[1]))
            velocity.append(float(row[2]))
            count.append(int(row[3]))
    return (np.asarray(t, np.int64), np.asarray(angle), np.asarray(velocity),
            np.asarray(count, np.int64))


@dataclass(frozen=True)
class LoggedCommand:
    """Command log row; mirrors the selector's AngleCommand closely enough."""

    t_us: int
    cluster: int

    @property
    def entry(self):
        return map_angle(self.cluster)


def read_commands_csv(path) -> list[LoggedCommand]:
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["t_us", "cluster", "angle_deg", "spike_ref", "position16"]:
            raise ConfigError(f"unexpected command log header {header}")
        for row in r:
            out.append(LoggedCommand(int(row[0]), int(row[1])))
    return out

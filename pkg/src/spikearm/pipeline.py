"""The full control chain: chip simulation through wire links to the joint.

One run has four stages.  The spiking network is simulated first over the
whole duration; its trace then crosses the chip's event link word by word
and drives the selector into a command list.  The tick loop then replays
those commands against the controller, the inter-board pulse link, the
joint, and the feedback link.  Every stage is deterministic, so a (scenario,
seed) pair fixes every output byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backend
from .aer import AerLink, HandshakeLink, NibbleLink
from .analysis import SettleResult, analyze_settling
from .angles import CountScale
from .engine import run as run_network
from .errors import ConfigError
from .events import SpikeEvent, SpikeTrace
from .plant import Joint
from .scenario import Scenario, build_stimulus
from .selector import AngleCommand, SelectorPipeline, write_command_log
from .spid import SpidController
from .wta import (WinnerTransition, build_wta, transitions, winner_sequence,
                  write_transitions)

# 16-bit words for the inter-board nibble link
PULSE_FWD = 0x0001
PULSE_REV = 0x0002
MAX_REPORTED = 10   # cap repeated violation messages per kind


@dataclass
class RunReport:
    duration_us: int
    seed: int
    backend: str
    n_spikes: int
    n_decoded: int
    n_commands: int
    n_transitions: int
    link_words: int
    link_errors: int
    settling: list[dict] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "duration_us": self.duration_us,
            "seed": self.seed,
            "backend": self.backend,
            "n_spikes": self.n_spikes,
            "n_decoded": self.n_decoded,
            "n_commands": self.n_commands,
            "n_transitions": self.n_transitions,
            "link_words": self.link_words,
            "link_errors": self.link_errors,
            "settling": self.settling,
            "violations": self.violations,
        }


@dataclass
class RunResult:
    scenario: Scenario
    trace: SpikeTrace
    transitions: list[WinnerTransition]
    commands: list[AngleCommand]
    telemetry: list[tuple]       # (t_us, target, estimate, error, u, pulse_freq)
    joint_log: list[tuple]       # (t_us, angle_deg, velocity, encoder_count)
    settling: list[SettleResult]
    report: RunReport


def _decode_stage(trace: SpikeTrace, s: Scenario):
    """Push every chip spike through the event link; returns decoded events."""
    link = AerLink(HandshakeLink(s.link_req_us, s.link_ack_us, s.link_timeout_us))
    decoded: list[SpikeEvent] = []
    for t, nid in zip(trace.t_us.tolist(), trace.neuron_id.tolist()):
        ev = link.send_spike(SpikeEvent(int(t), int(nid)))
        if ev is not None:
            decoded.append(ev)
    return decoded, link


def _select_stage(decoded, s: Scenario):
    sel = SelectorPipeline(s.filter_mode, s.filter_threshold,
                           s.filter_leak_tau_ms)
    commands: list[AngleCommand] = []
    for ev in decoded:
        cmd = sel.feed(ev.t, ev.neuron_id)
        if cmd is not None:
            commands.append(cmd)
    return commands


def run_scenario(s: Scenario, out_dir=None) -> RunResult:
    """Execute one scenario end to end; optionally write the run directory."""
    net = build_wta(s.wta)
    net.check_budget()
    stim = build_stimulus(s)
    trace = run_network(net, stim, s.duration_us, s.dt_us)

    decoded, chip_link = _decode_stage(trace, s)
    commands = _select_stage(decoded, s)

    ctl = SpidController(s.spid, s.dt_us)
    joint = Joint(s.motor, CountScale(), s.dt_us, ctl.pulse_ticks,
                  s.angle0_deg)
    pulse_link = NibbleLink(HandshakeLink(s.link_req_us, s.link_ack_us,
                                          s.link_timeout_us))
    fb_link = NibbleLink(HandshakeLink(s.link_req_us, s.link_ack_us,
                                       s.link_timeout_us))

    violations: list[str] = []
    conservation_bad = 0
    safety_bad = 0
    link_errors = 0
    link_words = 0
    telemetry: list[tuple] = []
    joint_log: list[tuple] = []
    n_ticks = -(-s.duration_us // s.dt_us)
    log_every_ticks = max(1, s.log_every_us // s.dt_us)
    cmd_idx = 0

    for tick in range(n_ticks):
        t_now = tick * s.dt_us
        t_next = t_now + s.dt_us
        while cmd_idx < len(commands) and commands[cmd_idx].t_us < t_next:
            e = commands[cmd_idx].entry
            ctl.command(e.position16, e.spike_ref)
            cmd_idx += 1

        pulse = ctl.tick()
        if pulse:
            link_words += 1
            word = PULSE_FWD if pulse > 0 else PULSE_REV
            if pulse_link.transfer_word(word, t_now) is None:
                link_errors += 1   # pulse lost; the loop must recover alone
            else:
                joint.apply_event(1 if word == PULSE_FWD else -1)

        feedback = joint.step()
        for sign in feedback:
            link_words += 1
            word = PULSE_FWD if sign > 0 else PULSE_REV
            if fb_link.transfer_word(word, t_now) is None:
                link_errors += 1   # lost feedback spike; drift becomes visible
            else:
                ctl.feed_feedback((1 if word == PULSE_FWD else -1,))

        if ctl.estimate != joint.count:
            conservation_bad += 1
            if conservation_bad <= MAX_REPORTED:
                violations.append(
                    f"conservation: t={t_next}us estimate={ctl.estimate} "
                    f"encoder={joint.count}")
        if not (s.motor.limit_lo_deg <= joint.angle <= s.motor.limit_hi_deg):
            safety_bad += 1
            if safety_bad <= MAX_REPORTED:
                violations.append(
                    f"safety: t={t_next}us angle={joint.angle!r} outside limits")

        if (tick + 1) % log_every_ticks == 0:
            tgt, est, err, u, f_hz = ctl.telemetry()
            telemetry.append((t_next, tgt, est, err, u, f_hz))
            joint_log.append((t_next, joint.angle, joint.velocity, joint.count))

    if conservation_bad > MAX_REPORTED:
        violations.append(f"conservation: {conservation_bad} ticks total")
    if safety_bad > MAX_REPORTED:
        violations.append(f"safety: {safety_bad} ticks total")

    layout = s.wta.layout()
    trans = transitions(trace, s.duration_us, s.transition_window_us, layout)
    winners = winner_sequence(trace, s.duration_us, s.transition_window_us,
                              layout)
    _check_phantoms(commands, winners, s.transition_window_us, violations)

    settling: list[SettleResult] = []
    if commands and joint_log:
        jt = np.asarray([row[0] for row in joint_log], np.int64)
        ja = np.asarray([row[1] for row in joint_log])
        settling = analyze_settling(jt, ja, commands, s.duration_us)

    report = RunReport(
        duration_us=s.duration_us,
        seed=s.seed,
        backend=backend.BACKEND_NAME,
        n_spikes=len(trace.t_us),
        n_decoded=len(decoded),
        n_commands=len(commands),
        n_transitions=len(trans),
        link_words=link_words,
        link_errors=link_errors,
        settling=[r.as_dict() for r in settling],
        violations=violations,
    )
    result = RunResult(s, trace, trans, commands, telemetry, joint_log,
                       settling, report)
    if out_dir is not None:
        write_run(result, out_dir)
    return result


def _check_phantoms(commands, winners, window_us: int,
                    violations: list[str]):
    """Every command must trace back to a winner window near its time.

    The selector can fire slightly before the first clean winner window
    completes, so the match window extends one window forward.
    """
    for cmd in commands:
        ok = any(w == cmd.cluster
                 and cmd.t_us - 1_000_000 <= t0 <= cmd.t_us + window_us
                 for t0, w in winners)
        if not ok:
            violations.append(
                f"phantom command: cluster {cmd.cluster} at t={cmd.t_us}us "
                f"has no matching winner window")


def write_run(result: RunResult, out_dir) -> Path:
    """Write raster, transitions, commands, telemetry, joint and report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.trace.to_csv(out / "raster.csv")
    write_transitions(out / "transitions.csv", result.transitions)
    write_command_log(out / "commands.csv", result.commands)
    with open(out / "telemetry.csv", "w", newline="") as fh:
        fh.write("t_us,target,estimate,error,u,pulse_freq\n")
        for t, tgt, est, err, u, f_hz in result.telemetry:
            fh.write(f"{t},{tgt},{est},{err},{u!r},{f_hz!r}\n")
    with open(out / "joint.csv", "w", newline="") as fh:
        fh.write("t_us,angle_deg,velocity,encoder_count\n")
        for t, ang, vel, count in result.joint_log:
            fh.write(f"{t},{ang!r},{vel!r},{count}\n")
    with open(out / "report.json", "w") as fh:
        json.dump(result.report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out

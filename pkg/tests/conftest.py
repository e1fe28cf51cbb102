"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from spikearm.angles import CountScale, map_angle
from spikearm.neuron import EXC, NetworkBuilder, NeuronParams
from spikearm.plant import Joint, MotorParams
from spikearm.spid import SpidController, SpidParams


def single_neuron(params: NeuronParams | None = None, weight_code: int = 8,
                  weight_scale: float = 0.1, branch: str = EXC):
    """One neuron fed by one input line; returns (network, neuron_id)."""
    b = NetworkBuilder()
    nid = b.add_neuron(params if params is not None else NeuronParams())
    line = b.add_input()
    b.connect_input(line, nid, weight_code, branch, weight_scale=weight_scale)
    return b.build(), nid


def run_closed_loop(cluster: int, duration_s: float,
                    start_cluster: int | None = None,
                    params: SpidParams | None = None,
                    motor: MotorParams | None = None,
                    dt_us: int = 100, log_every_us: int = 1000):
    """Drive one commanded step through controller + joint, no network.

    Starts at the angle of ``start_cluster`` (home when None), commands
    ``cluster`` at t=0 and runs for ``duration_s``.  Returns (t_us array,
    angle array, controller, joint).
    """
    params = params if params is not None else SpidParams()
    motor = motor if motor is not None else MotorParams()
    scale = CountScale()
    if start_cluster is None:
        angle0, home = 0.0, scale.count_of(0.0)
    else:
        e0 = map_angle(start_cluster)
        angle0, home = e0.angle_deg, e0.position16
    ctl = SpidController(params, dt_us, home=home)
    joint = Joint(motor, scale, dt_us, ctl.pulse_ticks, angle0_deg=angle0)
    entry = map_angle(cluster)
    ctl.command(entry.position16, entry.spike_ref)

    n_ticks = int(round(duration_s * 1e6 / dt_us))
    log_every = max(1, log_every_us // dt_us)
    t_log, a_log = [], []
    for i in range(n_ticks):
        ev = ctl.tick()
        if ev:
            joint.apply_event(ev)
        ctl.feed_feedback(joint.step())
        assert ctl.estimate == joint.count   # loop closure, every tick
        if i % log_every == 0:
            t_log.append(i * dt_us)
            a_log.append(joint.angle)
    return np.asarray(t_log, np.int64), np.asarray(a_log, float), ctl, joint

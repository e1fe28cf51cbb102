"""Fixed-step network simulation driver.

Runs a :class:`~spikearm.neuron.Network` for a duration at dt = 0.1 ms
(configurable), feeding external events and collecting the spike trace.
The heavy per-tick work happens in the selected kernel backend; this module
only bins events, chunks the run for optional state sampling, and stamps
spikes with integer-microsecond times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import ConfigError
from .events import DT_US, InputStream, SpikeTrace
from .neuron import Network


@dataclass
class StateSamples:
    """Optional membrane-potential samples for a few watched neurons."""

    neuron_ids: list[int]
    t_us: list[int] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def as_array(self) -> np.ndarray:
        return np.array(self.v) if self.v else np.empty((0, len(self.neuron_ids)))


def _bin_events(inputs: InputStream, n_inputs: int, n_slots: int,
                n_ticks: int, dt_us: int, duration_us: int):
    if len(inputs) == 0:
        return np.zeros(n_ticks + 1, np.int64), np.empty(0, np.int32)
    t = np.asarray(inputs.t_us, np.int64)
    line = np.asarray(inputs.line, np.int64)
    if t.min() < 0 or t.max() > duration_us:
        raise ConfigError("input event outside [0, duration]")
    if line.min() < 0 or line.max() >= n_inputs:
        raise ConfigError(
            f"input event references undeclared line {int(line.max())} "
            f"(declared: {n_inputs})")
    order = np.lexsort((line, t))
    t, line = t[order], line[order]
    tick = np.minimum(t // dt_us, n_ticks - 1)
    indptr = np.zeros(n_ticks + 1, np.int64)
    np.add.at(indptr, tick + 1, 1)
    np.cumsum(indptr, out=indptr)
    src = (n_slots + line).astype(np.int32)
    return indptr, src


def run(network: Network, inputs: InputStream | None = None,
        duration_us: int = 0, dt_us: int = DT_US,
        record: StateSamples | None = None,
        sample_every_us: int = 1000,
        reset: bool = True) -> SpikeTrace:
    """Simulate and return the full spike trace.

    Deterministic: (network, inputs, dt) fully fix the output.  With
    ``reset`` the network state is zeroed first; pass ``reset=False`` to
    continue from the current state.
    """
    if duration_us <= 0:
        raise ConfigError("duration must be positive")
    if dt_us <= 0:
        raise ConfigError("dt must be positive")
    if inputs is None:
        inputs = InputStream.empty()
    if reset:
        network.reset_state()

    n_ticks = -(-duration_us // dt_us)  # ceil
    (alpha_m, om, alpha_e, alpha_i,
     k_exc, k_inh, ref_ticks) = network.decay_tables(dt_us)
    indptr, src = _bin_events(inputs, network.n_inputs, network.n_slots,
                              n_ticks, dt_us, duration_us)

    if record is not None:
        chunk = max(1, sample_every_us // dt_us)
    else:
        chunk = n_ticks

    all_ticks: list[np.ndarray] = []
    all_ids: list[np.ndarray] = []
    watched = np.asarray(record.neuron_ids, np.int64) if record is not None else None

    tick0 = 0
    while tick0 < n_ticks:
        n = min(chunk, n_ticks - tick0)
        ft, fi, network.pending = backend.kernel.run_ticks(
            tick0, n,
            network.alive, alpha_m, om, alpha_e, alpha_i, k_exc, k_inh,
            network.v_threshold, network.v_reset, network.delta_t, ref_ticks,
            network.v, network.i_exc, network.i_inh, network.refrac,
            network.syn_indptr, network.syn_post,
            network.syn_weight, network.syn_inh,
            indptr[tick0:tick0 + n + 1] - indptr[tick0], src[indptr[tick0]:indptr[tick0 + n]],
            network.pending,
        )
        if len(ft):
            all_ticks.append(ft)
            all_ids.append(fi)
        tick0 += n
        if record is not None:
            record.t_us.append(tick0 * dt_us)
            record.v.append(network.v[watched].copy())

    if all_ticks:
        t_us = np.concatenate(all_ticks) * dt_us
        ids = np.concatenate(all_ids)
    else:
        t_us = np.empty(0, np.int64)
        ids = np.empty(0, np.int32)
    return SpikeTrace(t_us, ids, n_ticks * dt_us)

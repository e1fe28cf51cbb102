"""Leaky integrate-and-fire substrate with hardware-style resource caps.

The modeled processor budget: at most 1024 neurons spread over 4 cores of
256, at most 64 synapses per neuron, 4-bit weight codes.  Synaptic input is
split into one excitatory and one inhibitory first-order current per neuron.
Networks are built once through :class:`NetworkBuilder` and are immutable
afterwards; mutable simulation state lives in separate arrays so a network
can be reset and re-run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

MAX_NEURONS = 1024
N_CORES = 4
NEURONS_PER_CORE = 256
MAX_FAN_IN = 64
WEIGHT_CODE_MAX = 15

EXC = "exc"
INH = "inh"


@dataclass(frozen=True)
class NeuronParams:
    """Membrane and synapse constants of one neuron.

    ``delta_t`` > 0 enables an exponential spike-initiation term with that
    sharpness; 0 keeps the plain linear leaky integrator.
    """

    tau_mem: float = 20.0       # ms
    v_threshold: float = 1.0
    v_reset: float = 0.0
    refractory: float = 2.0     # ms
    tau_syn_exc: float = 5.0    # ms
    tau_syn_inh: float = 5.0    # ms
    delta_t: float = 0.0        # exponential sharpness; 0 = linear LIF

    def __post_init__(self):
        if self.tau_mem <= 0 or self.tau_syn_exc <= 0 or self.tau_syn_inh <= 0:
            raise ConfigError("time constants must be positive")
        if self.v_threshold <= self.v_reset:
            raise ConfigError("v_threshold must exceed v_reset")
        if self.refractory < 0:
            raise ConfigError("refractory must be nonnegative")
        if self.delta_t < 0:
            raise ConfigError("delta_t must be nonnegative")


@dataclass(frozen=True)
class SynapseEntry:
    """One CAM-style synapse: 4-bit weight code on a branch, scaled to current."""

    pre: int                 # source slot, or input line for external synapses
    weight_code: int         # 0..15
    branch: str              # EXC or INH
    weight_scale: float      # injected current per weight-code unit
    external: bool = False

    def __post_init__(self):
        if not 0 <= self.weight_code <= WEIGHT_CODE_MAX:
            raise ConfigError(f"weight_code {self.weight_code} outside 0..{WEIGHT_CODE_MAX}")
        if self.branch not in (EXC, INH):
            raise ConfigError(f"branch must be {EXC!r} or {INH!r}")

    @property
    def weight(self) -> float:
        return self.weight_code * self.weight_scale


class NetworkBuilder:
    """Incrementally assemble a network; every cap is enforced at build time."""

    def __init__(self):
        self._params: dict[int, NeuronParams] = {}
        self._core: dict[int, int] = {}
        self._syn_in: dict[int, list[SynapseEntry]] = {}
        self._n_inputs = 0

    def add_neuron(self, params: NeuronParams | None = None,
                   neuron_id: int | None = None, core: int | None = None) -> int:
        """Register a neuron at an explicit global ID (default: next free)."""
        if neuron_id is None:
            neuron_id = max(self._params, default=-1) + 1
        if not 0 <= neuron_id < MAX_NEURONS:
            raise ConfigError(f"neuron_id {neuron_id} outside 0..{MAX_NEURONS - 1}")
        if neuron_id in self._params:
            raise ConfigError(f"neuron_id {neuron_id} already in use")
        if core is None:
            core = neuron_id // NEURONS_PER_CORE
        if not 0 <= core < N_CORES:
            raise ConfigError(f"core {core} outside 0..{N_CORES - 1}")
        if sum(1 for c in self._core.values() if c == core) >= NEURONS_PER_CORE:
            raise ConfigError(f"core {core} already holds {NEURONS_PER_CORE} neurons")
        self._params[neuron_id] = params or NeuronParams()
        self._core[neuron_id] = core
        self._syn_in[neuron_id] = []
        return neuron_id

    def add_input(self) -> int:
        """Declare one external input line; returns its index."""
        line = self._n_inputs
        self._n_inputs += 1
        return line

    def _check_post(self, post: int) -> None:
        if post not in self._params:
            raise ConfigError(f"postsynaptic neuron {post} does not exist")
        if len(self._syn_in[post]) >= MAX_FAN_IN:
            raise ConfigError(
                f"neuron {post} already holds {MAX_FAN_IN} synapses")

    def connect(self, pre: int, post: int, weight_code: int,
                branch: str = EXC, weight_scale: float = 1.0) -> None:
        if pre not in self._params:
            raise ConfigError(f"presynaptic neuron {pre} does not exist")
        self._check_post(post)
        self._syn_in[post].append(SynapseEntry(pre, weight_code, branch, weight_scale))

    def connect_input(self, line: int, post: int, weight_code: int,
                      branch: str = EXC, weight_scale: float = 1.0) -> None:
        if not 0 <= line < self._n_inputs:
            raise ConfigError(f"input line {line} not declared")
        self._check_post(post)
        self._syn_in[post].append(
            SynapseEntry(line, weight_code, branch, weight_scale, external=True))

    def build(self) -> "Network":
        if len(self._params) > MAX_NEURONS:
            raise ConfigError("neuron budget exceeded")
        return Network(self._params, self._core, self._syn_in, self._n_inputs)


class Network:
    """Immutable network structure plus per-run mutable state arrays.

    Slots cover global IDs 0..max_id; IDs never registered stay dead and are
    skipped by the kernels.  Synapses are compiled into a CSR table keyed by
    *source* (neuron slots first, then external input lines) because delivery
    walks outgoing edges of whoever fired.
    """

    def __init__(self, params: dict[int, NeuronParams], core: dict[int, int],
                 syn_in: dict[int, list[SynapseEntry]], n_inputs: int):
        self.n_slots = (max(params) + 1) if params else 0
        self.n_inputs = n_inputs
        self.n_neurons = len(params)
        ns = self.n_slots

        self.alive = np.zeros(ns, np.uint8)
        self.core_of = np.full(ns, -1, np.int32)
        self.tau_mem = np.ones(ns)
        self.tau_syn_exc = np.ones(ns)
        self.tau_syn_inh = np.ones(ns)
        self.v_threshold = np.full(ns, np.inf)
        self.v_reset = np.zeros(ns)
        self.refractory_ms = np.zeros(ns)
        self.delta_t = np.zeros(ns)
        self.fan_in = np.zeros(ns, np.int32)

        for nid, p in params.items():
            self.alive[nid] = 1
            self.core_of[nid] = core[nid]
            self.tau_mem[nid] = p.tau_mem
            self.tau_syn_exc[nid] = p.tau_syn_exc
            self.tau_syn_inh[nid] = p.tau_syn_inh
            self.v_threshold[nid] = p.v_threshold
            self.v_reset[nid] = p.v_reset
            self.refractory_ms[nid] = p.refractory
            self.delta_t[nid] = p.delta_t
            self.fan_in[nid] = len(syn_in[nid])

        # Outgoing CSR: source index = neuron slot, or n_slots + input line.
        n_sources = ns + n_inputs
        out: list[list[tuple[int, float, int]]] = [[] for _ in range(n_sources)]
        for post, entries in syn_in.items():
            for e in entries:
                src = ns + e.pre if e.external else e.pre
                out[src].append((post, e.weight, 1 if e.branch == INH else 0))

        counts = [len(o) for o in out]
        self.syn_indptr = np.zeros(n_sources + 1, np.int64)
        self.syn_indptr[1:] = np.cumsum(counts)
        total = int(self.syn_indptr[-1])
        self.syn_post = np.zeros(total, np.int32)
        self.syn_weight = np.zeros(total)
        self.syn_inh = np.zeros(total, np.uint8)
        k = 0
        for o in out:
            for post, w, is_inh in o:
                self.syn_post[k] = post
                self.syn_weight[k] = w
                self.syn_inh[k] = is_inh
                k += 1

        # Mutable per-run state.
        self.v = np.zeros(ns)
        self.i_exc = np.zeros(ns)
        self.i_inh = np.zeros(ns)
        self.refrac = np.zeros(ns, np.int32)
        self.pending = np.empty(0, np.int32)
        self._decay_cache: dict[int, tuple] = {}
        self.reset_state()

    def reset_state(self) -> None:
        self.v[:] = np.where(self.alive.astype(bool), self.v_reset, 0.0)
        self.i_exc[:] = 0.0
        self.i_inh[:] = 0.0
        self.refrac[:] = 0
        self.pending = np.empty(0, np.int32)

    def decay_tables(self, dt_us: int):
        """Per-slot decay factors and refractory tick counts for a step size."""
        key = int(dt_us)
        if key not in self._decay_cache:
            dt_ms = dt_us / 1000.0
            alpha_m = np.exp(-dt_ms / self.tau_mem)
            alpha_e = np.exp(-dt_ms / self.tau_syn_exc)
            alpha_i = np.exp(-dt_ms / self.tau_syn_inh)
            self._decay_cache[key] = (
                alpha_m,
                1.0 - alpha_m,
                alpha_e,
                alpha_i,
                self._drive_kernel(dt_ms, self.tau_syn_exc, alpha_e, alpha_m),
                self._drive_kernel(dt_ms, self.tau_syn_inh, alpha_i, alpha_m),
                np.rint(self.refractory_ms * 1000.0 / dt_us).astype(np.int32),
            )
        return self._decay_cache[key]

    def _drive_kernel(self, dt_ms: float, tau_syn, alpha_s, alpha_m):
        """Exact one-tick response of v to a unit start-of-tick current.

        Solving v' = (i - v)/tau_mem with i decaying at tau_syn gives
        (tau_syn/(tau_syn - tau_mem)) * (alpha_s - alpha_m); the equal-tau
        limit is (dt/tau_mem) * alpha_m.  Using the exact kernel makes the
        tick map the sampled continuous solution, so halving dt only
        refines spike-time quantization instead of shifting trajectories.
        """
        same = np.isclose(tau_syn, self.tau_mem)
        den = np.where(same, 1.0, tau_syn - self.tau_mem)
        return np.where(same, (dt_ms / self.tau_mem) * alpha_m,
                        (tau_syn / den) * (alpha_s - alpha_m))

    def neuron_ids(self) -> np.ndarray:
        return np.nonzero(self.alive)[0].astype(np.int32)

    def check_budget(self) -> None:
        """Re-assert the hardware caps; raises on violation."""
        if self.n_neurons > MAX_NEURONS:
            raise ConfigError("neuron budget exceeded")
        for c in range(N_CORES):
            if int(np.sum(self.core_of == c)) > NEURONS_PER_CORE:
                raise ConfigError(f"core {c} over {NEURONS_PER_CORE} neurons")
        if self.fan_in.max(initial=0) > MAX_FAN_IN:
            raise ConfigError("synapse fan-in cap exceeded")

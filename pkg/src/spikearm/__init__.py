"""spikearm: deterministic simulator of a spiking motor-control chain.

A hard winner-take-all spiking network selects a target joint angle; its
spikes travel over a modeled AER wire link, are debounced by a spike-history
filter, mapped to encoder positions, and tracked by a spike-based PID
driving a simulated DC motor with quadrature feedback.
"""

from .events import DT_US, InputStream, SpikeEvent, SpikeTrace
from .neuron import (EXC, INH, MAX_FAN_IN, NetworkBuilder, NeuronParams,
                     SynapseEntry)
from .errors import ConfigError, FramingError, LinkTimeout, ScenarioError

__version__ = "0.1.0"

__all__ = [
    "DT_US", "InputStream", "SpikeEvent", "SpikeTrace",
    "EXC", "INH", "MAX_FAN_IN", "NetworkBuilder", "NeuronParams",
    "SynapseEntry",
    "ConfigError", "FramingError", "LinkTimeout", "ScenarioError",
    "__version__",
]

"""Joint simulation: pulse-driven DC motor and quadrature encoder.

The motor is first order in velocity with a hard angle range; actuation
arrives as fixed-width pulses expanded from the controller's PFM events.
The encoder emits standard quadrature (one channel edge per count), which
is decoded back to signed count spikes for the feedback path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .angles import CountScale
from .errors import ConfigError

# Gray sequence of (A, B) levels for count phase 0..3; one channel flips
# per increment in either direction.
_QUAD_STATES = ((0, 0), (1, 0), (1, 1), (0, 1))
_QUAD_INDEX = {s: i for i, s in enumerate(_QUAD_STATES)}


@dataclass(frozen=True)
class MotorParams:
    gain: float = 60.0            # deg/s of steady velocity per unit duty
    tau_motor_ms: float = 50.0
    v_max: float = 40.0           # deg/s, driver clip
    limit_lo_deg: float = -10.0   # hard stops
    limit_hi_deg: float = 125.0
    viscous: float = 0.0          # extra 1/s decay on velocity, usually 0

    def __post_init__(self):
        if self.tau_motor_ms <= 0:
            raise ConfigError("tau_motor_ms must be positive")
        if self.v_max <= 0:
            raise ConfigError("v_max must be positive")
        if self.limit_lo_deg >= self.limit_hi_deg:
            raise ConfigError("limit_lo_deg must be below limit_hi_deg")


class PulseExpander:
    """Stretches instantaneous PFM events into fixed-width drive pulses.

    A new event restarts the pulse with its own direction, so an event
    stream at the PFM ceiling produces continuous full duty.
    """

    def __init__(self, width_ticks: int):
        if width_ticks < 1:
            raise ConfigError("pulse width must be at least one tick")
        self.width_ticks = width_ticks
        self.remaining = 0
        self.direction = 0

    def event(self, direction: int) -> None:
        if direction not in (-1, 1):
            raise ConfigError(f"pulse direction must be +-1, got {direction}")
        self.direction = direction
        self.remaining = self.width_ticks

    def duty(self) -> int:
        """Drive level for the current tick; consumes one tick of width."""
        if self.remaining <= 0:
            return 0
        self.remaining -= 1
        return self.direction


def quadrature_phase(count: int) -> tuple[int, int]:
    """(A, B) channel levels for an absolute encoder count."""
    return _QUAD_STATES[count & 3]


def quadrature_edges(c0: int, c1: int) -> list[tuple[str, int]]:
    """Channel edges emitted as the count moves c0 -> c1, one per count."""
    edges: list[tuple[str, int]] = []
    step = 1 if c1 >= c0 else -1
    c = c0
    while c != c1:
        a0, b0 = _QUAD_STATES[c & 3]
        c += step
        a1, b1 = _QUAD_STATES[c & 3]
        if a1 != a0:
            edges.append(("A", a1))
        if b1 != b0:
            edges.append(("B", b1))
    return edges


def decode_quadrature(start_count: int, edges) -> list[int]:
    """Turn a channel-edge stream back into signed count steps.

    Raises ConfigError on an illegal transition (both channels moving or a
    repeated level), which a one-edge-per-count encoder never produces.
    """
    a, b = _QUAD_STATES[start_count & 3]
    phase = _QUAD_INDEX[(a, b)]
    out: list[int] = []
    for channel, level in edges:
        if channel == "A":
            if level == a:
                raise ConfigError("channel A did not change level")
            a = level
        elif channel == "B":
            if level == b:
                raise ConfigError("channel B did not change level")
            b = level
        else:
            raise ConfigError(f"unknown encoder channel {channel!r}")
        new_phase = _QUAD_INDEX[(a, b)]
        if (new_phase - phase) & 3 == 1:
            out.append(1)
        elif (new_phase - phase) & 3 == 3:
            out.append(-1)
        else:
            raise ConfigError("illegal quadrature transition")
        phase = new_phase
    return out


class Joint:
    """One revolute joint: motor dynamics plus encoder readout.

    ``step`` advances one tick and returns the signed count spikes decoded
    from the encoder edges of that tick.  The absolute count is always the
    calibrated function of the angle, so the decoded spike sum can never
    drift from the true count.
    """

    def __init__(self, params: MotorParams, scale: CountScale, dt_us: int,
                 pulse_width_ticks: int, angle0_deg: float = 0.0):
        self.params = params
        self.scale = scale
        self.dt_s = dt_us / 1e6
        self.expander = PulseExpander(pulse_width_ticks)
        self.angle = float(angle0_deg)
        self.velocity = 0.0
        self.count = scale.count_of(self.angle)
        # exact discrete decay over one tick
        self._beta = math.exp(-dt_us / (params.tau_motor_ms * 1000.0))
        self._visc = math.exp(-params.viscous * self.dt_s) if params.viscous else 1.0
        self.hit_limit = False

    def apply_event(self, direction: int) -> None:
        self.expander.event(direction)

    def step(self) -> list[int]:
        p = self.params
        duty = self.expander.duty()
        v = self.velocity * self._beta + (1.0 - self._beta) * p.gain * duty
        if self._visc != 1.0:
            v *= self._visc
        if v > p.v_max:
            v = p.v_max
        elif v < -p.v_max:
            v = -p.v_max
        angle = self.angle + v * self.dt_s
        if angle <= p.limit_lo_deg:
            angle = p.limit_lo_deg
            v = 0.0
            self.hit_limit = True
        elif angle >= p.limit_hi_deg:
            angle = p.limit_hi_deg
            v = 0.0
            self.hit_limit = True
        self.velocity = v
        self.angle = angle
        new_count = self.scale.count_of(angle)
        if new_count == self.count:
            return []
        edges = quadrature_edges(self.count, new_count)
        spikes = decode_quadrature(self.count, edges)
        self.count = new_count
        return spikes

"""Spike-based PID control in the encoder-count domain.

The controller never sees analog signals: the reference arrives as a burst
of signed count spikes that walks an accumulator to the commanded 16-bit
position, feedback arrives as signed encoder spikes integrated by the
Integrate-and-Generate block, and the output is pulse-frequency modulated.
Each output event is expanded to a fixed-width motor pulse on the far side
of the inter-board link; that expansion is the proportional actuation
stage, so command magnitude lives purely in pulse frequency.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .angles import HOME_COUNT
from .errors import ConfigError


@dataclass(frozen=True)
class SpidParams:
    """Gains and output shaping for one joint controller.

    ``freq_scale`` converts the control value (counts-ish units) to a pulse
    frequency.  ``ref_rate_base``/``ref_rate_unit`` set how fast a command
    burst walks the reference accumulator: base + spike_ref * unit counts/s
    (the base keeps home, whose spike reference is 0, reachable).
    """

    kp: float = 0.8
    ki: float = 0.02
    kd: float = 0.1
    pfm_max_hz: float = 5000.0
    pulse_width_ms: float = 0.2
    i_clamp: float = 500.0          # bound on the integrated error, counts*s
    d_window_ms: float = 10.0
    freq_scale: float = 2.0         # Hz of output per unit of control value
    ref_rate_base: float = 4000.0   # counts/s
    ref_rate_unit: float = 10.0     # extra counts/s per spike-ref unit

    def __post_init__(self):
        if self.pfm_max_hz <= 0:
            raise ConfigError("pfm_max_hz must be positive")
        if self.pulse_width_ms <= 0:
            raise ConfigError("pulse_width_ms must be positive")
        if self.i_clamp < 0:
            raise ConfigError("i_clamp must be nonnegative")
        if self.d_window_ms <= 0:
            raise ConfigError("d_window_ms must be positive")
        if self.ref_rate_base < 0 or self.ref_rate_unit < 0:
            raise ConfigError("reference rates must be nonnegative")


@dataclass(frozen=True)
class SignedSpike:
    """One count spike: +1 or -1 at a microsecond timestamp."""

    t: int
    sign: int


class IntegrateAndGenerate:
    """Position feedback: pure integration of signed encoder spikes."""

    def __init__(self, home: int = HOME_COUNT):
        self.position = home

    def feed(self, sign: int) -> int:
        self.position += sign
        return self.position

    def feed_many(self, signs) -> int:
        for s in signs:
            self.position += s
        return self.position


class ReferenceGenerator:
    """Walks the reference accumulator to each commanded position.

    A new command schedules exactly (position16 - accumulator) net signed
    counts at base + spike_ref * unit counts per second, so the accumulator
    always lands on the last commanded table position no matter how
    commands interleave.
    """

    def __init__(self, params: SpidParams, dt_us: int, start: int = HOME_COUNT):
        self.params = params
        self.dt_s = dt_us / 1e6
        self.accumulator = start
        self.remaining = 0
        self.rate = 0.0
        self.phase = 0.0

    def command(self, position16: int, spike_ref: int) -> None:
        self.remaining = position16 - self.accumulator
        self.rate = self.params.ref_rate_base + spike_ref * self.params.ref_rate_unit
        self.phase = 0.0

    def emit_tick(self) -> int:
        """Signed counts emitted this tick (0 when idle or between spikes)."""
        if self.remaining == 0:
            return 0
        self.phase += self.rate * self.dt_s
        n = int(self.phase)
        if n == 0:
            return 0
        self.phase -= n
        n = min(n, abs(self.remaining))
        step = n if self.remaining > 0 else -n
        self.remaining -= step
        self.accumulator += step
        return step


def reference_burst(current: int, position16: int, spike_ref: int,
                    params: SpidParams, t0_us: int = 0,
                    dt_us: int = 100) -> list[SignedSpike]:
    """Materialize one command burst as signed spikes (test/inspection aid)."""
    gen = ReferenceGenerator(params, dt_us, start=current)
    gen.command(position16, spike_ref)
    out: list[SignedSpike] = []
    t = t0_us
    while gen.remaining != 0:
        step = gen.emit_tick()
        sign = 1 if step > 0 else -1
        for _ in range(abs(step)):
            out.append(SignedSpike(t, sign))
        t += dt_us
    return out


class SpidController:
    """One joint's tick-driven spike PID with PFM output.

    Call order per tick: ``command`` (if one arrived), then ``tick`` to get
    the output event, then ``feed_feedback`` with that tick's encoder
    spikes.  The derivative acts on the feedback estimate over a short
    window, so reference steps cause no derivative kick.
    """

    def __init__(self, params: SpidParams, dt_us: int, home: int = HOME_COUNT):
        self.params = params
        self.dt_us = dt_us
        self.dt_s = dt_us / 1e6
        self.reference = ReferenceGenerator(params, dt_us, start=home)
        self.feedback = IntegrateAndGenerate(home)
        self.integral = 0.0
        n_hist = max(1, round(params.d_window_ms * 1000.0 / dt_us))
        self._est_hist: deque[int] = deque([home] * n_hist, maxlen=n_hist)
        self._d_span_s = n_hist * self.dt_s
        self.phase = 0.0
        self.u = 0.0
        self.pulse_freq = 0.0
        self.pulse_ticks = max(1, round(params.pulse_width_ms * 1000.0 / dt_us))

    @property
    def target(self) -> int:
        return self.reference.accumulator

    @property
    def estimate(self) -> int:
        return self.feedback.position

    def command(self, position16: int, spike_ref: int) -> None:
        self.reference.command(position16, spike_ref)

    def feed_feedback(self, signs) -> None:
        self.feedback.feed_many(signs)

    def tick(self) -> int:
        """Advance one tick; returns the PFM event: -1, 0 or +1."""
        self.reference.emit_tick()
        est = self.feedback.position
        e = self.target - est

        self.integral += e * self.dt_s
        clamp = self.params.i_clamp
        if self.integral > clamp:
            self.integral = clamp
        elif self.integral < -clamp:
            self.integral = -clamp

        oldest = self._est_hist[0]
        self._est_hist.append(est)
        d_est = (est - oldest) / self._d_span_s

        u = (self.params.kp * e
             + self.params.ki * self.integral
             + self.params.kd * (-d_est))
        self.u = u
        if u == 0.0:
            self.pulse_freq = 0.0
            return 0
        f = abs(u) * self.params.freq_scale
        if f > self.params.pfm_max_hz:
            f = self.params.pfm_max_hz
        self.pulse_freq = f
        self.phase += f * self.dt_s
        if self.phase >= 1.0:
            self.phase -= 1.0
            return 1 if u > 0 else -1
        return 0

    def telemetry(self) -> tuple[int, int, int, float, float]:
        """(target, estimate, error, u, pulse_freq) for the log."""
        est = self.feedback.position
        return (self.target, est, self.target - est, self.u, self.pulse_freq)

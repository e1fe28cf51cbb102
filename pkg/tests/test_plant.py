"""Joint model: motor dynamics, hard stops, quadrature encoder fidelity."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikearm.angles import CountScale, HOME_COUNT
from spikearm.errors import ConfigError
from spikearm.plant import (Joint, MotorParams, PulseExpander,
                            decode_quadrature, quadrature_edges,
                            quadrature_phase)

DT = 100


def make_joint(angle0=0.0, params=None, pulse_ticks=2):
    return Joint(params if params is not None else MotorParams(),
                 CountScale(), DT, pulse_ticks, angle0_deg=angle0)


def test_params_validation():
    with pytest.raises(ConfigError, match="tau_motor_ms"):
        MotorParams(tau_motor_ms=0.0)
    with pytest.raises(ConfigError, match="v_max"):
        MotorParams(v_max=0.0)
    with pytest.raises(ConfigError, match="limit_lo_deg"):
        MotorParams(limit_lo_deg=10.0, limit_hi_deg=-10.0)


def test_pulse_expander_width_and_restart():
    ex = PulseExpander(3)
    ex.event(1)
    assert [ex.duty() for _ in range(5)] == [1, 1, 1, 0, 0]
    ex.event(-1)
    assert ex.duty() == -1
    ex.event(1)                       # restart mid-pulse flips direction
    assert [ex.duty() for _ in range(4)] == [1, 1, 1, 0]
    with pytest.raises(ConfigError, match="direction"):
        ex.event(0)
    with pytest.raises(ConfigError, match="width"):
        PulseExpander(0)


def test_zero_drive_state_unchanged():
    j = make_joint()
    for _ in range(1000):
        assert j.step() == []
    assert j.angle == 0.0 and j.velocity == 0.0 and j.count == HOME_COUNT


def test_velocity_63_percent_at_tau():
    # continuous full duty from rest: first-order rise, 63.2% of gain at tau
    p = MotorParams(v_max=1000.0)      # keep the clip out of the way
    j = make_joint(params=p, pulse_ticks=1)
    n_tau = int(p.tau_motor_ms * 1000 / DT)
    for _ in range(n_tau):
        j.apply_event(1)
        j.step()
    expected = p.gain * (1.0 - math.exp(-1.0))
    assert j.velocity == pytest.approx(expected, rel=0.02)


def test_velocity_bounded_by_v_max():
    j = make_joint(pulse_ticks=1)
    vmax = j.params.v_max
    for _ in range(40_000):
        j.apply_event(1)
        j.step()
        assert abs(j.velocity) <= vmax
        if j.hit_limit:
            break
    assert j.hit_limit


def test_upper_limit_pins_angle():
    p = MotorParams()
    j = make_joint(angle0=124.0, params=p, pulse_ticks=1)
    for _ in range(30_000):
        j.apply_event(1)
        j.step()
    assert j.angle == p.limit_hi_deg
    assert j.velocity == 0.0
    assert j.count == j.scale.count_of(p.limit_hi_deg)


def test_lower_limit_pins_angle():
    p = MotorParams()
    j = make_joint(angle0=-9.5, params=p, pulse_ticks=1)
    for _ in range(30_000):
        j.apply_event(-1)
        j.step()
    assert j.angle == p.limit_lo_deg
    assert j.velocity == 0.0


def test_forward_sweep_emits_exact_positive_counts():
    # 0 deg -> 10.4 deg is exactly +1318 signed spikes (34086 - 32768)
    j = make_joint(pulse_ticks=1)
    spikes = []
    while j.angle < 10.4:
        j.apply_event(1)
        spikes.extend(j.step())
    over = j.count - 34086            # whatever the last tick overshot
    assert sum(spikes) == 1318 + over
    assert spikes.count(-1) == 0

    # and per-tick sums always reconcile with the absolute count
    assert j.count == HOME_COUNT + sum(spikes)


def test_forward_then_backward_nets_zero():
    j = make_joint(pulse_ticks=1)
    total = []
    for _ in range(5000):
        j.apply_event(1)
        total.extend(j.step())
    for _ in range(20_000):
        j.apply_event(-1)
        if j.angle <= 0.0:
            break
        total.extend(j.step())
    # drive back to exactly home
    for _ in range(200_000):
        if j.count == HOME_COUNT:
            break
        j.apply_event(1 if j.count < HOME_COUNT else -1)
        total.extend(j.step())
    assert j.count == HOME_COUNT
    assert sum(total) == 0


def test_count_conservation_every_tick():
    j = make_joint(pulse_ticks=2)
    acc = j.count
    drive = [1] * 3000 + [-1] * 2000 + [1] * 1000
    for i, d in enumerate(drive):
        if i % 3 == 0:
            j.apply_event(d)
        for s in j.step():
            acc += s
        assert acc == j.count
        assert j.count == j.scale.count_of(j.angle)


def test_quadrature_phase_gray_sequence():
    seen = [quadrature_phase(c) for c in range(8)]
    assert seen[:4] == [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert seen[4:] == seen[:4]
    # one channel flips per step, in both directions
    for a, b in zip(seen, seen[1:]):
        assert (a[0] != b[0]) + (a[1] != b[1]) == 1


def test_quadrature_edges_and_decode():
    edges = quadrature_edges(0, 5)
    assert len(edges) == 5            # one edge per count
    assert decode_quadrature(0, edges) == [1] * 5
    edges = quadrature_edges(5, 2)
    assert decode_quadrature(5, edges) == [-1] * 3
    assert quadrature_edges(7, 7) == []


def test_quadrature_decode_rejects_illegal_streams():
    with pytest.raises(ConfigError, match="channel A"):
        decode_quadrature(0, [("A", 0)])          # no level change
    with pytest.raises(ConfigError, match="unknown encoder channel"):
        decode_quadrature(0, [("C", 1)])


@settings(max_examples=60, deadline=None)
@given(st.integers(-2000, 2000), st.integers(-2000, 2000))
def test_quadrature_round_trip_property(c0, delta):
    c1 = c0 + delta
    steps = decode_quadrature(c0, quadrature_edges(c0, c1))
    assert sum(steps) == delta
    assert all(s == (1 if delta > 0 else -1) for s in steps)

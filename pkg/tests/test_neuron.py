"""Neural substrate: parameter checks, hardware caps, single-neuron dynamics."""

import numpy as np
import pytest

from conftest import single_neuron
from spikearm.engine import run
from spikearm.errors import ConfigError
from spikearm.events import InputStream
from spikearm.generators import custom_schedule, poisson_events
from spikearm.neuron import (EXC, INH, MAX_FAN_IN, MAX_NEURONS, N_CORES,
                             NEURONS_PER_CORE, NetworkBuilder, NeuronParams,
                             SynapseEntry)


def test_params_defaults():
    p = NeuronParams()
    assert p.tau_mem == 20.0 and p.tau_syn_exc == 5.0 and p.tau_syn_inh == 5.0
    assert p.v_threshold == 1.0 and p.v_reset == 0.0 and p.refractory == 2.0


@pytest.mark.parametrize("kwargs,msg", [
    ({"tau_mem": 0.0}, "time constants"),
    ({"tau_syn_exc": -1.0}, "time constants"),
    ({"tau_syn_inh": 0.0}, "time constants"),
    ({"v_threshold": 0.0, "v_reset": 0.0}, "v_threshold"),
    ({"v_threshold": -1.0, "v_reset": 0.5}, "v_threshold"),
    ({"refractory": -0.1}, "refractory"),
    ({"delta_t": -1.0}, "delta_t"),
])
def test_params_validation(kwargs, msg):
    with pytest.raises(ConfigError, match=msg):
        NeuronParams(**kwargs)


def test_weight_code_four_bits():
    SynapseEntry(0, 15, EXC, 1.0)
    with pytest.raises(ConfigError, match="weight_code"):
        SynapseEntry(0, 16, EXC, 1.0)
    with pytest.raises(ConfigError, match="weight_code"):
        SynapseEntry(0, -1, EXC, 1.0)
    with pytest.raises(ConfigError, match="branch"):
        SynapseEntry(0, 1, "shunt", 1.0)


def test_fan_in_cap_rejects_65th_synapse():
    b = NetworkBuilder()
    post = b.add_neuron()
    pres = [b.add_neuron() for _ in range(MAX_FAN_IN + 1)]
    for pre in pres[:MAX_FAN_IN]:
        b.connect(pre, post, 1)
    with pytest.raises(ConfigError, match=f"{MAX_FAN_IN} synapses"):
        b.connect(pres[MAX_FAN_IN], post, 1)


def test_neuron_id_and_core_caps():
    b = NetworkBuilder()
    b.add_neuron(neuron_id=5)
    with pytest.raises(ConfigError, match="already in use"):
        b.add_neuron(neuron_id=5)
    with pytest.raises(ConfigError, match="neuron_id"):
        b.add_neuron(neuron_id=MAX_NEURONS)
    with pytest.raises(ConfigError, match="core"):
        b.add_neuron(neuron_id=6, core=N_CORES)

    b2 = NetworkBuilder()
    for _ in range(NEURONS_PER_CORE):
        b2.add_neuron(core=0)
    with pytest.raises(ConfigError, match="core 0"):
        b2.add_neuron(neuron_id=1000, core=0)


def test_default_core_from_id():
    b = NetworkBuilder()
    b.add_neuron(neuron_id=700)
    net = b.build()
    net.check_budget()
    assert list(net.neuron_ids()) == [700]


def test_connect_requires_existing_endpoints():
    b = NetworkBuilder()
    nid = b.add_neuron()
    with pytest.raises(ConfigError, match="postsynaptic"):
        b.connect(nid, nid + 1, 1)
    with pytest.raises(ConfigError, match="presynaptic"):
        b.connect(nid + 1, nid, 1)
    with pytest.raises(ConfigError, match="not declared"):
        b.connect_input(0, nid, 1)


def test_zero_input_stays_silent():
    net, _ = single_neuron()
    trace = run(net, InputStream.empty(), duration_us=100_000)
    assert len(trace) == 0


def test_single_strong_event_one_spike_then_refractory_silence():
    # code 15 at scale 16 crosses threshold within the delivery tick; the
    # fast synapse drains the residual during refractory, so no second spike
    p = NeuronParams(tau_syn_exc=0.5)
    net, nid = single_neuron(p, weight_code=15, weight_scale=16.0)
    trace = run(net, custom_schedule([(5000, 0)]), duration_us=50_000)
    assert list(trace.neuron_id) == [nid]
    assert list(trace.t_us) == [5000]


def test_refractoriness_bounds_isi():
    p = NeuronParams(refractory=2.0)
    net, _ = single_neuron(p, weight_code=15, weight_scale=0.2)
    stim = poisson_events(2000.0, 2000.0, seed=3)
    trace = run(net, stim, duration_us=2_000_000)
    assert len(trace) > 100
    isi = np.diff(trace.t_us)
    assert isi.min() >= 2000


def test_excitation_monotone_in_weight_code():
    stim = poisson_events(300.0, 2000.0, seed=11)
    counts = []
    for code in range(16):
        net, _ = single_neuron(weight_code=code, weight_scale=0.1)
        counts.append(len(run(net, stim, duration_us=2_000_000)))
    assert counts == sorted(counts)
    assert counts[0] == 0 and counts[15] > 0


def test_inhibition_reduces_firing():
    stim = poisson_events(500.0, 1000.0, seed=7)
    b = NetworkBuilder()
    nid = b.add_neuron()
    line = b.add_input()
    b.connect_input(line, nid, 10, EXC, weight_scale=0.1)
    base = len(run(b.build(), stim, duration_us=1_000_000))

    b = NetworkBuilder()
    nid = b.add_neuron()
    line = b.add_input()
    b.connect_input(line, nid, 10, EXC, weight_scale=0.1)
    b.connect_input(line, nid, 10, INH, weight_scale=0.05)
    with_inh = len(run(b.build(), stim, duration_us=1_000_000))
    assert base > 0
    assert with_inh < base


def test_run_validation():
    net, _ = single_neuron()
    with pytest.raises(ConfigError, match="duration"):
        run(net, InputStream.empty(), duration_us=0)
    with pytest.raises(ConfigError, match="outside"):
        run(net, custom_schedule([(200_000, 0)]), duration_us=100_000)
    with pytest.raises(ConfigError, match="undeclared line"):
        run(net, InputStream.from_pairs([(0, 3)]), duration_us=1000)


def test_run_repeatable():
    net, _ = single_neuron(weight_code=12, weight_scale=0.1)
    stim = poisson_events(400.0, 500.0, seed=21)
    a = run(net, stim, duration_us=500_000)
    b = run(net, stim, duration_us=500_000)
    np.testing.assert_array_equal(a.t_us, b.t_us)
    np.testing.assert_array_equal(a.neuron_id, b.neuron_id)


def test_budget_check_passes_on_max_network():
    b = NetworkBuilder()
    for i in range(MAX_NEURONS):
        b.add_neuron(neuron_id=i)
    net = b.build()
    net.check_budget()
    assert net.n_slots == MAX_NEURONS


def test_sustained_poisson_rate_matches_fine_reference():
    # 10 s of 400 Hz drive; the independent 1 us integrator must agree on
    # the mean output rate within 5%
    from oracle_lif import lif_reference_rate

    stim = poisson_events(400.0, 10_000.0, seed=21, line=0)
    tq = (stim.t_us // 100) * 100    # grid-align so only step size differs
    net, _ = single_neuron(weight_code=8, weight_scale=0.1)
    trace = run(net, custom_schedule([(int(t), 0) for t in tq]),
                duration_us=10_000_000)
    r_prod = len(trace) / 10.0
    r_ref = lif_reference_rate([(int(t), 0.8) for t in tq], NeuronParams(),
                               10_000_000)
    assert r_prod > 10.0
    assert abs(r_prod - r_ref) <= 0.05 * r_ref

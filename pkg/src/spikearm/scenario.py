"""Scenario files: one TOML document describes a complete closed-loop run.

Sections: [run] timing and seed, [wta] network overrides, [filter] debounce
config, [spid] controller gains, [plant] motor constants, [links] handshake
timing, and repeated [[stimulus]] phases driving cluster input lines.
Unknown keys are rejected so a typo cannot silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ScenarioError
from .events import InputStream, merge_streams
from .generators import poisson_events
from .neuron import NeuronParams
from .plant import MotorParams
from .spid import SpidParams
from .wta import WtaConfig


@dataclass(frozen=True)
class StimulusPhase:
    t_start_us: int
    t_end_us: int
    cluster: int
    rate_hz: float


@dataclass(frozen=True)
class Scenario:
    duration_us: int
    seed: int
    dt_us: int
    log_every_us: int
    transition_window_us: int
    wta: WtaConfig
    filter_mode: str
    filter_threshold: int
    filter_leak_tau_ms: float | None
    spid: SpidParams
    motor: MotorParams
    angle0_deg: float
    link_req_us: float
    link_ack_us: float
    link_timeout_us: float
    stimulus: tuple[StimulusPhase, ...]


def _section(doc: dict, name: str, allowed: set[str]) -> dict:
    sec = doc.pop(name, {})
    if not isinstance(sec, dict):
        raise ScenarioError(f"[{name}] must be a table")
    unknown = set(sec) - allowed
    if unknown:
        raise ScenarioError(
            f"[{name}] has unknown keys: {', '.join(sorted(unknown))}")
    return sec


def _num(sec: dict, section: str, key: str, default, lo=None, hi=None):
    val = sec.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{section}.{key} must be a number, got {val!r}")
    if lo is not None and val < lo:
        raise ScenarioError(f"{section}.{key} = {val} is below {lo}")
    if hi is not None and val > hi:
        raise ScenarioError(f"{section}.{key} = {val} is above {hi}")
    return val


_WTA_KEYS = {
    "n_clusters", "n_exc", "n_inh", "inh_fanout", "seed",
    "w_input", "w_exc_exc", "w_exc_inh", "w_inh_exc",
    "scale_input", "scale_exc", "scale_exc_inh", "scale_inh_exc",
    "exc_tau_mem_ms", "exc_refractory_ms",
    "inh_tau_mem_ms", "inh_refractory_ms",
}

_SPID_KEYS = {f.name for f in dataclasses.fields(SpidParams)}
_PLANT_KEYS = {f.name for f in dataclasses.fields(MotorParams)} | {"angle0_deg"}


def _build_wta(sec: dict) -> WtaConfig:
    base = WtaConfig()
    kwargs = {}
    for key in ("n_clusters", "n_exc", "n_inh", "inh_fanout", "seed",
                "w_input", "w_exc_exc", "w_exc_inh", "w_inh_exc"):
        if key in sec:
            val = sec[key]
            if not isinstance(val, int) or isinstance(val, bool):
                raise ScenarioError(f"wta.{key} must be an integer")
            kwargs[key] = val
    for key in ("scale_input", "scale_exc", "scale_exc_inh", "scale_inh_exc"):
        if key in sec:
            kwargs[key] = float(_num(sec, "wta", key, None, lo=0.0))
    exc = base.exc_params
    if "exc_tau_mem_ms" in sec or "exc_refractory_ms" in sec:
        exc = NeuronParams(
            tau_mem=float(_num(sec, "wta", "exc_tau_mem_ms", exc.tau_mem, lo=0.001)),
            refractory=float(_num(sec, "wta", "exc_refractory_ms", exc.refractory, lo=0.0)),
        )
    inh = base.inh_params
    if "inh_tau_mem_ms" in sec or "inh_refractory_ms" in sec:
        inh = NeuronParams(
            tau_mem=float(_num(sec, "wta", "inh_tau_mem_ms", inh.tau_mem, lo=0.001)),
            refractory=float(_num(sec, "wta", "inh_refractory_ms", inh.refractory, lo=0.0)),
        )
    try:
        return dataclasses.replace(base, exc_params=exc, inh_params=inh, **kwargs)
    except Exception as exc_err:
        raise ScenarioError(f"[wta]: {exc_err}") from exc_err


def load_scenario(path) -> Scenario:
    """Parse and validate one scenario file; raises ScenarioError."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as err:
            raise ScenarioError(f"{path}: {err}") from err

    run = _section(doc, "run", {"duration_ms", "seed", "dt_us", "log_every_us",
                                "transition_window_ms"})
    duration_ms = _num(run, "run", "duration_ms", None, lo=0.001)
    if duration_ms is None:
        raise ScenarioError("run.duration_ms is required")
    dt_us = int(_num(run, "run", "dt_us", 100, lo=1))
    seed = run.get("seed", 1)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("run.seed must be an integer")

    wta = _build_wta(_section(doc, "wta", _WTA_KEYS))

    filt = _section(doc, "filter", {"mode", "threshold", "leak_tau_ms"})
    mode = filt.get("mode", "if")
    if mode not in ("if", "isi"):
        raise ScenarioError(f"filter.mode must be 'if' or 'isi', got {mode!r}")
    threshold = filt.get("threshold", 50)
    if not isinstance(threshold, int) or isinstance(threshold, bool) or threshold < 1:
        raise ScenarioError("filter.threshold must be a positive integer")
    leak = _num(filt, "filter", "leak_tau_ms", None, lo=0.001)

    spid_sec = _section(doc, "spid", _SPID_KEYS)
    try:
        spid = SpidParams(**{k: float(_num(spid_sec, "spid", k, None))
                             for k in spid_sec})
    except ScenarioError:
        raise
    except Exception as err:
        raise ScenarioError(f"[spid]: {err}") from err

    plant_sec = _section(doc, "plant", _PLANT_KEYS)
    angle0 = float(_num(plant_sec, "plant", "angle0_deg", 0.0))
    plant_sec.pop("angle0_deg", None)
    try:
        motor = MotorParams(**{k: float(_num(plant_sec, "plant", k, None))
                               for k in plant_sec})
    except ScenarioError:
        raise
    except Exception as err:
        raise ScenarioError(f"[plant]: {err}") from err
    if not motor.limit_lo_deg <= angle0 <= motor.limit_hi_deg:
        raise ScenarioError("plant.angle0_deg outside joint limits")

    links = _section(doc, "links", {"req_us", "ack_us", "timeout_us"})
    req_us = float(_num(links, "links", "req_us", 0.5, lo=0.0))
    ack_us = float(_num(links, "links", "ack_us", 0.5, lo=0.0))
    timeout_us = float(_num(links, "links", "timeout_us", 100.0, lo=0.001))

    phases = doc.pop("stimulus", [])
    if not isinstance(phases, list):
        raise ScenarioError("[[stimulus]] must be an array of tables")
    duration_us = int(round(duration_ms * 1000))
    stim: list[StimulusPhase] = []
    for i, row in enumerate(phases):
        where = f"stimulus[{i}]"
        if not isinstance(row, dict):
            raise ScenarioError(f"{where} must be a table")
        unknown = set(row) - {"t_start_ms", "t_end_ms", "cluster", "rate_hz"}
        if unknown:
            raise ScenarioError(f"{where} has unknown keys: {', '.join(sorted(unknown))}")
        t0 = _num(row, where, "t_start_ms", None, lo=0)
        t1 = _num(row, where, "t_end_ms", None, lo=0)
        cluster = row.get("cluster")
        rate = _num(row, where, "rate_hz", None, lo=0)
        if t0 is None or t1 is None or cluster is None or rate is None:
            raise ScenarioError(
                f"{where} needs t_start_ms, t_end_ms, cluster, rate_hz")
        if not isinstance(cluster, int) or isinstance(cluster, bool):
            raise ScenarioError(f"{where}.cluster must be an integer")
        if not 1 <= cluster <= wta.n_clusters:
            raise ScenarioError(
                f"{where}.cluster = {cluster} outside 1..{wta.n_clusters}")
        t0_us, t1_us = int(round(t0 * 1000)), int(round(t1 * 1000))
        if not t0_us < t1_us:
            raise ScenarioError(f"{where}: t_start_ms must be before t_end_ms")
        if t1_us > duration_us:
            raise ScenarioError(f"{where}: t_end_ms beyond run.duration_ms")
        stim.append(StimulusPhase(t0_us, t1_us, cluster, float(rate)))

    if doc:
        raise ScenarioError(f"unknown sections: {', '.join(sorted(doc))}")

    return Scenario(
        duration_us=duration_us,
        seed=seed,
        dt_us=dt_us,
        log_every_us=int(_num(run, "run", "log_every_us", 1000, lo=1)),
        transition_window_us=int(
            _num(run, "run", "transition_window_ms", 100, lo=1) * 1000),
        wta=wta,
        filter_mode=mode,
        filter_threshold=threshold,
        filter_leak_tau_ms=None if leak is None else float(leak),
        spid=spid,
        motor=motor,
        angle0_deg=angle0,
        link_req_us=req_us,
        link_ack_us=ack_us,
        link_timeout_us=timeout_us,
        stimulus=tuple(stim),
    )


def build_stimulus(s: Scenario) -> InputStream:
    """Realize the stimulus program as one merged input stream.

    Each phase gets its own generator seed derived from the run seed and
    the phase index, so editing one phase does not shift the others.
    """
    streams = []
    for i, ph in enumerate(s.stimulus):
        dur_ms = (ph.t_end_us - ph.t_start_us) / 1000.0
        row_seed = s.seed * 100003 + 7919 * i
        streams.append(poisson_events(ph.rate_hz, dur_ms, row_seed,
                                      line=ph.cluster - 1,
                                      t_offset_us=ph.t_start_us))
    return merge_streams(streams) if streams else InputStream.empty()

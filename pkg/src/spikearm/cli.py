"""Command-line front end: run, analyze, plot, validate."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from importlib import resources
from pathlib import Path

from .analysis import (analyze_settling, monotonicity, read_commands_csv,
                       read_joint_csv)
from .errors import ConfigError, ScenarioError
from .events import SpikeTrace
from .pipeline import run_scenario
from .scenario import load_scenario


def _resolve_scenario(name: str) -> Path:
    """A scenario argument is a path, or the name of a bundled scenario."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("spikearm") / "scenarios"
    for candidate in (name, name + ".scenario"):
        target = bundled / candidate
        if target.is_file():
            return Path(str(target))
    raise ScenarioError(
        f"no scenario file {name!r}; bundled: "
        + ", ".join(sorted(f.name for f in bundled.iterdir()
                           if f.name.endswith(".scenario"))))


def _cmd_run(args) -> int:
    scenario_path = _resolve_scenario(args.scenario)
    s = load_scenario(scenario_path)
    if args.seed is not None:
        s = dataclasses.replace(s, seed=args.seed)
    out = Path(args.out) if args.out else Path(f"{scenario_path.stem}.out")
    result = run_scenario(s, out_dir=out)
    r = result.report
    print(f"run: {scenario_path.name} seed={s.seed} backend={r.backend}")
    print(f"  {r.n_spikes} spikes, {r.n_decoded} decoded, "
          f"{r.n_commands} commands, {r.n_transitions} transitions")
    settled = [x for x in r.settling if x["settle_ms"] is not None]
    if r.settling:
        print(f"  settled {len(settled)}/{len(r.settling)} commands")
    print(f"  wrote {out}/")
    if r.violations:
        print(f"  {len(r.violations)} violations:", file=sys.stderr)
        for v in r.violations:
            print(f"    {v}", file=sys.stderr)
        return 1
    return 0


def _cmd_analyze(args) -> int:
    run_dir = Path(args.run_dir)
    t, angle, _vel, _count = read_joint_csv(run_dir / "joint.csv")
    commands = read_commands_csv(run_dir / "commands.csv")
    if not commands:
        print("no commands in this run")
        return 0
    duration = int(t[-1]) if len(t) else 0
    results = analyze_settling(t, angle, commands, duration)
    print(f"{'t_cmd_ms':>10} {'cluster':>7} {'target':>7} {'step':>6} "
          f"{'settle_ms':>9} {'final_err_deg':>13}")
    for r in results:
        settle = f"{r.settle_ms:.0f}" if r.settle_ms is not None else "never"
        print(f"{r.t_cmd_us / 1000:>10.0f} {r.cluster:>7} {r.target_position:>7} "
              f"{r.step_counts:>6} {settle:>9} {r.final_err_deg:>13.3f}")
    pairs = monotonicity(results)
    if pairs:
        print("settling vs step size (counts -> ms):")
        for step, ms in pairs:
            print(f"  {step:>5} -> {ms:.0f}")
    return 0


def _cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    run_dir = Path(args.run_dir)
    raster = SpikeTrace.from_csv(run_dir / "raster.csv")
    fig, ax = plt.subplots(figsize=(10, 4))
    if len(raster):
        ax.plot(raster.t_us / 1e6, raster.neuron_id, ",k", markersize=1)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("neuron id")
    ax.set_title("network raster")
    fig.tight_layout()
    fig.savefig(run_dir / "raster.png", dpi=120)
    plt.close(fig)

    t, angle, _vel, _count = read_joint_csv(run_dir / "joint.csv")
    commands = read_commands_csv(run_dir / "commands.csv")
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(t / 1e6, angle, "-b", label="joint angle")
    if commands:
        ct = [c.t_us / 1e6 for c in commands]
        ca = [c.entry.angle_deg for c in commands]
        ax.step(ct + [t[-1] / 1e6], ca + [ca[-1]], where="post",
                color="r", alpha=0.6, label="commanded")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("angle (deg)")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(run_dir / "staircase.png", dpi=120)
    plt.close(fig)
    print(f"wrote {run_dir}/raster.png and {run_dir}/staircase.png")
    return 0


def _cmd_validate(args) -> int:
    try:
        s = load_scenario(_resolve_scenario(args.scenario))
    except ScenarioError as err:
        print(f"invalid: {err}", file=sys.stderr)
        return 2
    print(f"ok: {len(s.stimulus)} stimulus phases, "
          f"{s.duration_us / 1000:.0f} ms, seed {s.seed}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spikearm",
        description="Closed-loop spiking motor-control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario and write a run directory")
    p.add_argument("scenario", help="scenario file or bundled name")
    p.add_argument("--seed", type=int, default=None, help="override run seed")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("analyze", help="settling report for a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("plot", help="render raster and staircase PNGs")
    p.add_argument("run_dir")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

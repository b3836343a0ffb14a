"""Command-line front end.

    fanetsim run [CONFIG] [--density 50000] [--antennas 16] ...
    fanetsim route [CONFIG] --protocol BA-SMURF [--network 3]
    fanetsim probe-link [CONFIG] I J
    fanetsim validate-config [CONFIG]

CONFIG defaults to the shipped reference file. Exit status: 0 on success,
1 for configuration problems, 2 for failures while running.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, apply_overrides, default_config_path, load_config
from .harness import (
    VARIANTS,
    ExperimentConfig,
    run_experiment,
    simulate_scenario,
    summarize,
    summary_path,
    swarm_size,
)
from .routing import PROTOCOLS, NetworkBelief, estimate_links, route
from .uncertainty import link_existence_probability

OUTPUT_DIR_ENV = "FANETSIM_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _protocol(text: str) -> str:
    up = text.upper()
    if up not in PROTOCOLS:
        raise argparse.ArgumentTypeError(f"unknown protocol {text!r}; choose from {', '.join(PROTOCOLS)}")
    return up


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", help=f"INI file (default: shipped {default_config_path().name})")
    common.add_argument("--density", type=_float_list, help="UAVs/km^3, comma separated")
    common.add_argument("--antennas", type=_int_list, help="UPA element counts, comma separated")
    common.add_argument("--protocol", type=_protocol, action="append",
                        help="protocol to run (repeatable); default all")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--samples", type=int, help="Monte Carlo samples per routing call")
    common.add_argument("--output", help="runs CSV path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="fanetsim", description="Beam-aware routing simulator for UAV swarms.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="full sweep to CSV")
    p.add_argument("--networks", type=int, help="networks per density")
    p.add_argument("--jobs", type=int, help="worker processes")

    for name, helptext in (("route", "route one generated network"),
                           ("probe-link", "Monte Carlo estimate of one link")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--network", type=int, default=0, help="network index (default 0)")
        p.add_argument("--variant", choices=VARIANTS, default="tracked")
        if name == "route":
            p.add_argument("--source", type=int)
            p.add_argument("--dest", type=int)
        else:
            p.add_argument("i", type=int)
            p.add_argument("j", type=int)

    sub.add_parser("validate-config", parents=[common], help="check a config file, write nothing")
    return parser


def resolve_config(args) -> ExperimentConfig:
    """Config file merged with command-line overrides."""
    config = load_config(args.config)
    output = args.output
    if output is None and os.environ.get(OUTPUT_DIR_ENV) and not Path(config.output).is_absolute():
        output = str(Path(os.environ[OUTPUT_DIR_ENV]) / Path(config.output).name)
    return apply_overrides(
        config,
        densities=args.density,
        antennas=args.antennas,
        protocols=args.protocol,
        master_seed=args.seed,
        n_mc_samples=args.samples,
        output=output,
        n_networks=getattr(args, "networks", None),
        n_jobs=getattr(args, "jobs", None),
    )


def _mbps(x: float) -> str:
    return f"{x / 1e6:9.2f}"


def cmd_run(config: ExperimentConfig, out) -> None:
    records = run_experiment(config, progress=True)
    rows = summarize(records)
    print(f"{len(records)} runs -> {config.output}", file=out)
    print(f"summary -> {summary_path(config.output)}", file=out)
    print(f"{'protocol':>9} {'var':>7} {'density':>8} {'M':>3} {'mean':>9} {'p25':>9} {'p50':>9} {'p75':>9}"
          f" {'intf dB':>8}  (Mb/s)", file=out)
    for r in rows:
        print(f"{r['protocol']:>9} {r['variant']:>7} {r['density']:8.0f} {r['antennas']:3d} {_mbps(r['mean_bps'])}"
              f" {_mbps(r['p25_bps'])} {_mbps(r['p50_bps'])} {_mbps(r['p75_bps'])}"
              f" {r['mean_interference_db']:8.2f}", file=out)


def _scenario_belief(config: ExperimentConfig, args):
    density = config.densities[0]
    m = config.antennas[0]
    scenario = simulate_scenario(config, density, args.network)
    swarm = scenario.tracked if args.variant == "tracked" else scenario.ideal
    upa = config.upa(m)
    rho = np.full(scenario.k, config.cross_traffic)
    return scenario, NetworkBelief(swarm, config.channel, upa, None, rho), density, m


def _check_node(name: str, value: int, k: int) -> None:
    if not 0 <= value < k:
        raise ConfigError(f"{name} {value} is not a UAV id (network has {k} UAVs, ids 0..{k - 1})")


def cmd_route(config: ExperimentConfig, args, out) -> None:
    scenario, belief, density, m = _scenario_belief(config, args)
    source = scenario.source if args.source is None else args.source
    dest = scenario.dest if args.dest is None else args.dest
    _check_node("source", source, scenario.k)
    _check_node("dest", dest, scenario.k)
    est = estimate_links(belief, config.n_mc_samples, config.master_seed)
    print(f"network {args.network}: density {density:g}, K={scenario.k}, M={m}, {args.variant} belief", file=out)
    for protocol in config.protocols:
        kw = {"metric": config.dbr_metric} if protocol == "DBR" else {}
        r = route(protocol, belief, source, dest, estimates=est, **kw)
        print(f"\n{protocol}: path {' -> '.join(map(str, r.path))}", file=out)
        print(f"  bottleneck {r.bottleneck_capacity / 1e6:.2f} Mb/s", file=out)
        for (i, j), w, (taz, tel, raz, rel) in zip(r.hops, r.link_weights, r.aims):
            print(f"  {i:3d}->{j:<3d} E[C]={w.expected_capacity / 1e6:8.2f} Mb/s  P={w.existence_probability:.3f}"
                  f"  tx aim ({math.degrees(taz):7.1f}, {math.degrees(tel):6.1f}) deg"
                  f"  rx aim ({math.degrees(raz):7.1f}, {math.degrees(rel):6.1f}) deg", file=out)


def cmd_probe(config: ExperimentConfig, args, out) -> None:
    scenario, belief, density, m = _scenario_belief(config, args)
    _check_node("i", args.i, scenario.k)
    _check_node("j", args.j, scenario.k)
    if args.i == args.j:
        raise ConfigError("i and j must differ")
    est = estimate_links(belief, config.n_mc_samples, config.master_seed)
    w = est.weight(args.i, args.j)
    p = link_existence_probability(belief.swarm, args.i, args.j, config.channel.max_distance,
                                   config.n_mc_samples, config.master_seed)
    d = float(np.linalg.norm(belief.swarm.means[args.i] - belief.swarm.means[args.j]))
    print(f"link {args.i}->{args.j} (network {args.network}, density {density:g}, M={m}, {args.variant})", file=out)
    print(f"  estimated distance   {d:.2f} m", file=out)
    print(f"  expected capacity    {w.expected_capacity / 1e6:.3f} Mb/s  (s.e. {w.mc_std_error / 1e6:.3f})", file=out)
    print(f"  existence probability {p.probability:.4f}  (s.e. {p.std_error:.4f}, n={config.n_mc_samples})",
          file=out)


def cmd_validate(config: ExperimentConfig, out) -> None:
    sizes = ", ".join(f"{d:g}->{swarm_size(d, config.box)}" for d in config.densities)
    print("config OK", file=out)
    print(f"  densities -> UAVs: {sizes}", file=out)
    print(f"  antennas {config.antennas}; protocols {config.protocols}; variants {config.variants}", file=out)
    print(f"  {config.n_networks} networks per density, {config.n_mc_samples} MC samples, seed {config.master_seed}",
          file=out)
    print(f"  output would go to {config.output}", file=out)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = resolve_config(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"fanetsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "validate-config":
            cmd_validate(config, out)
        elif args.command == "run":
            cmd_run(config, out)
        elif args.command == "route":
            cmd_route(config, args, out)
        else:
            cmd_probe(config, args, out)
    except ConfigError as exc:
        print(f"fanetsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report, then signal failure
        print(f"fanetsim: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Experiment orchestration: random swarms, tracking, protocol comparison.

Every network is simulated once (mobility plus UKF tracking); all antenna
configurations, protocols and variants are then evaluated on that same
network, so comparisons between them are paired.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .beamforming import UpaConfig, full_beam, upa_shape
from .channel import ChannelParams
from .geometry import Attitude, UavState, pairwise_distances
from .routing import (
    PROTOCOLS,
    DisconnectedError,
    LinkEstimates,
    NetworkBelief,
    RouteResult,
    achieved_throughput,
    estimate_links,
    interference_db,
    route,
)
from .tracking import (
    MobilityParams,
    SwarmKinematics,
    TrackerParams,
    TrackerState,
    advance,
    initial_velocities,
    swarm_belief,
    ukf_predict_update,
    velocity_attitudes,
)
from .uncertainty import SwarmBelief

log = logging.getLogger(__name__)

VARIANTS = ("tracked", "ideal")
VARIANT_SUFFIX = {"tracked": "T", "ideal": "I"}
CSV_COLUMNS = ("protocol", "variant", "density", "antennas", "seed", "K", "path_len",
               "throughput_bps", "interference_db", "runtime_s")
SUMMARY_COLUMNS = ("protocol", "variant", "density", "antennas", "n", "mean_bps", "p25_bps",
                   "p50_bps", "p75_bps", "mean_interference_db")


@dataclass
class ExperimentConfig:
    densities: list[float] = field(default_factory=lambda: [50000.0])
    antennas: list[int] = field(default_factory=lambda: [16])
    n_networks: int = 240
    n_mc_samples: int = 1000
    protocols: list[str] = field(default_factory=lambda: list(PROTOCOLS))
    variants: list[str] = field(default_factory=lambda: list(VARIANTS))
    channel: ChannelParams = field(default_factory=ChannelParams)
    mobility: MobilityParams = field(default_factory=MobilityParams)
    tracker: TrackerParams = field(default_factory=TrackerParams)
    element_spacing: float = 0.5
    warmup: float = 10.0
    source_dest: str = "farthest"
    cross_traffic: float = 0.0
    dbr_metric: str = "hops"
    floor_throughput: float = 0.0
    connected_only: bool = True
    max_redraws: int = 100
    master_seed: int = 2023
    output: str = "results/runs.csv"
    n_jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.densities or any(not (d > 0) for d in self.densities):
            raise ValueError("densities: every density must be > 0")
        if not self.antennas or any(int(m) != m or m < 1 for m in self.antennas):
            raise ValueError("antennas: element counts must be positive integers")
        if self.n_networks < 1:
            raise ValueError("n_networks must be >= 1")
        if self.n_mc_samples < 1:
            raise ValueError("n_mc_samples must be >= 1")
        bad = [p for p in self.protocols if p not in PROTOCOLS]
        if bad or not self.protocols:
            raise ValueError(f"protocols: unknown {bad}; choose from {list(PROTOCOLS)}")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise ValueError(f"variants: unknown {bad}; choose from {list(VARIANTS)}")
        if self.warmup <= 0:
            raise ValueError("warmup must be > 0 seconds")
        if self.source_dest != "farthest":
            raise ValueError("source_dest: only 'farthest' is supported")
        if not 0.0 <= self.cross_traffic <= 1.0:
            raise ValueError("cross_traffic must lie in [0, 1]")
        if self.dbr_metric not in ("hops", "capacity"):
            raise ValueError("dbr_metric must be 'hops' or 'capacity'")
        if self.floor_throughput < 0:
            raise ValueError("floor_throughput must be >= 0")
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be > 0")
        if self.max_redraws < 0:
            raise ValueError("max_redraws must be >= 0")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")

    @property
    def box(self) -> tuple[float, float, float]:
        return self.mobility.box

    def upa(self, m: int) -> UpaConfig:
        m_h, m_v = upa_shape(m)
        return UpaConfig(m_h, m_v, self.element_spacing, self.element_spacing, self.channel.wavelength)


@dataclass
class RunRecord:
    protocol: str
    variant: str
    density: float
    antennas: int
    seed: int
    k: int
    path: list[int]
    throughput_bps: float
    interference_db: float
    runtime_s: float = 0.0

    @property
    def label(self) -> str:
        return f"{self.protocol}-{VARIANT_SUFFIX[self.variant]}"

    def row(self) -> list[str]:
        return [self.protocol, self.variant, _fmt(self.density), str(self.antennas), str(self.seed),
                str(self.k), str(max(len(self.path) - 1, 0)), _fmt(self.throughput_bps),
                _fmt(self.interference_db), _fmt(self.runtime_s)]


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def swarm_size(density: float, box) -> int:
    """Number of UAVs for a density in UAVs/km^3 over a box given in meters."""
    volume_km3 = float(np.prod(box)) * 1e-9
    return int(round(density * volume_km3))


def generate_network(density: float, box=(200.0, 200.0, 10.0), seed=0,
                     mobility: MobilityParams | None = None) -> list[UavState]:
    """Uniformly placed swarm with random initial headings."""
    if density <= 0:
        raise ValueError("density must be > 0")
    mobility = mobility or MobilityParams(box=tuple(box))
    k = swarm_size(density, box)
    if k < 2:
        raise ValueError(f"density {density} gives only {k} UAV(s) in the box")
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0, 1, (k, 3)) * np.asarray(box, dtype=float)
    vel = initial_velocities(k, mobility, rng)
    att = velocity_attitudes(vel)
    return [UavState(i, pos[i], vel[i], Attitude(*att[i])) for i in range(k)]


@dataclass
class Scenario:
    """One network at its routing instant."""

    seed: int
    density: float
    truth_positions: np.ndarray
    truth_attitudes: np.ndarray
    tracked: SwarmBelief
    ideal: SwarmBelief
    source: int
    dest: int

    @property
    def k(self) -> int:
        return len(self.truth_positions)


def _network_seed(master_seed: int, density: float, index: int, attempt: int = 0) -> np.random.SeedSequence:
    key = [int(master_seed), int(round(density)), int(index)]
    return np.random.SeedSequence(key + [int(attempt)] if attempt else key)


def is_connected(positions, max_distance: float) -> bool:
    """Whether the range graph ``d < max_distance`` on ``positions`` is connected."""
    adj = pairwise_distances(positions) < max_distance
    n, _ = connected_components(csr_matrix(adj), directed=False)
    return n == 1


def simulate_scenario(config: ExperimentConfig, density: float, index: int) -> Scenario:
    """Fly the swarm for the warm-up period while the controller tracks it
    from noisy position reports, then freeze truth and belief.

    With ``config.connected_only`` a network whose true range graph is split
    at routing time is redrawn (up to ``max_redraws`` times) so that density
    sweeps compare routing choices rather than partition rates.
    """
    for attempt in range(config.max_redraws + 1):
        scenario = _simulate(config, density, index, attempt)
        if not config.connected_only or is_connected(scenario.truth_positions, config.channel.max_distance):
            return scenario
    raise RuntimeError(f"no connected network at density {density} after {config.max_redraws} redraws")


def _simulate(config: ExperimentConfig, density: float, index: int, attempt: int) -> Scenario:
    ss = _network_seed(config.master_seed, density, index, attempt)
    place_ss, move_ss, meas_ss = ss.spawn(3)
    states = generate_network(density, config.box, place_ss, config.mobility)
    kin = SwarmKinematics.from_states(states)
    move_rng = np.random.default_rng(move_ss)
    meas_rng = np.random.default_rng(meas_ss)
    sigma = config.tracker.measurement_std
    dt = config.mobility.update_interval

    def measure(p):
        return p + sigma * meas_rng.standard_normal(p.shape)

    tracker = TrackerState.from_measurement(measure(kin.positions), config.tracker)
    n_steps = max(1, int(math.ceil(config.warmup / dt - 1e-9)))
    for _ in range(n_steps):
        kin = advance(kin, config.mobility, dt, move_rng)
        tracker, _ = ukf_predict_update(tracker, measure(kin.positions), dt, config.box)
    t = n_steps * dt
    tracked = swarm_belief(tracker, t)
    ideal = SwarmBelief.exact(kin.positions, [Attitude(*a) for a in kin.attitudes], t)
    source, dest = farthest_pair(tracked.means)
    return Scenario(int(index), float(density), kin.positions.copy(), kin.attitudes.copy(), tracked, ideal,
                    source, dest)


def farthest_pair(positions) -> tuple[int, int]:
    d = pairwise_distances(positions)
    i, j = np.unravel_index(np.argmax(d), d.shape)
    return (int(min(i, j)), int(max(i, j)))


def _belief_for(scenario: Scenario, variant: str) -> SwarmBelief:
    return scenario.tracked if variant == "tracked" else scenario.ideal


def evaluate_scenario(config: ExperimentConfig, scenario: Scenario,
                      antennas: Iterable[int] | None = None) -> list[RunRecord]:
    """Route every protocol and variant on one network and score the routes
    against the true positions."""
    records = []
    antennas = list(config.antennas if antennas is None else antennas)
    rho = np.full(scenario.k, config.cross_traffic)
    for m in antennas:
        upa = config.upa(m)
        beam = full_beam(upa)
        mc_seed = np.random.SeedSequence([config.master_seed, int(round(scenario.density)), scenario.seed, int(m), 1])
        for variant in config.variants:
            belief = NetworkBelief(_belief_for(scenario, variant), config.channel, upa, beam, rho)
            t0 = time.perf_counter()
            exact = not np.any(belief.swarm.covariances) and not np.any(belief.swarm.attitude_covariances)
            estimates = estimate_links(belief, 1 if exact else config.n_mc_samples, mc_seed)
            shared = time.perf_counter() - t0
            for protocol in config.protocols:
                t1 = time.perf_counter()
                records.append(_run_one(config, scenario, protocol, variant, m, belief, estimates, rho))
                records[-1].runtime_s = time.perf_counter() - t1 + shared / len(config.protocols)
    return records


def _run_one(config, scenario, protocol, variant, m, belief: NetworkBelief, estimates: LinkEstimates, rho):
    kw = {"metric": config.dbr_metric} if protocol == "DBR" else {}
    try:
        r = route(protocol, belief, scenario.source, scenario.dest, estimates=estimates, **kw)
    except DisconnectedError:
        return RunRecord(protocol, variant, scenario.density, m, scenario.seed, scenario.k, [],
                         config.floor_throughput, float("-inf"))
    thr = achieved_throughput(r, scenario.truth_positions, scenario.truth_attitudes, belief.channel, belief.upa,
                              belief.beam, rho)
    intf = interference_db(r, scenario.truth_positions, scenario.truth_attitudes, belief.channel, belief.upa,
                           belief.beam)
    return RunRecord(protocol, variant, scenario.density, m, scenario.seed, scenario.k, r.path,
                     max(thr, config.floor_throughput), intf)


def evaluate_protocol(config: ExperimentConfig, protocol: str, variant: str, seed: int,
                      density: float | None = None, antennas: int | None = None) -> RunRecord:
    """Single run: network ``seed`` at one density and antenna count."""
    if protocol not in PROTOCOLS or variant not in VARIANTS:
        raise ValueError(f"unknown protocol/variant {protocol}/{variant}")
    density = config.densities[0] if density is None else density
    antennas = config.antennas[0] if antennas is None else antennas
    cfg = replace(config, protocols=[protocol], variants=[variant])
    scenario = simulate_scenario(cfg, density, seed)
    return evaluate_scenario(cfg, scenario, [antennas])[0]


def interference_metric(record_or_route, scenario: Scenario | None = None, config: ExperimentConfig | None = None,
                        antennas: int | None = None) -> float:
    """Interference of a run in dB over the noise floor (see
    :func:`fanetsim.routing.interference_db`)."""
    if isinstance(record_or_route, RunRecord):
        return record_or_route.interference_db
    if scenario is None or config is None or antennas is None:
        raise ValueError("a bare route needs its scenario, config and antenna count")
    upa = config.upa(antennas)
    return interference_db(record_or_route, scenario.truth_positions, scenario.truth_attitudes, config.channel,
                           upa, full_beam(upa))


def _network_task(args):
    config, density, index = args
    return evaluate_scenario(config, simulate_scenario(config, density, index))


def iter_records(config: ExperimentConfig, progress: bool = False) -> list[RunRecord]:
    tasks = [(config, d, n) for d in config.densities for n in range(config.n_networks)]
    out: list[RunRecord] = []
    if config.n_jobs > 1:
        with ProcessPoolExecutor(config.n_jobs) as pool:
            for recs in pool.map(_network_task, tasks, chunksize=4):
                out.extend(recs)
    else:
        for done, task in enumerate(tasks, 1):
            out.extend(_network_task(task))
            if progress and done % 20 == 0:
                log.info("%d/%d networks", done, len(tasks))
    order = {p: i for i, p in enumerate(config.protocols)}
    vorder = {v: i for i, v in enumerate(config.variants)}
    out.sort(key=lambda r: (order[r.protocol], vorder[r.variant], r.density, r.antennas, r.seed))
    return out


def summarize(records: Sequence[RunRecord]) -> list[dict]:
    cells: dict[tuple, list[RunRecord]] = {}
    for r in records:
        cells.setdefault((r.protocol, r.variant, r.density, r.antennas), []).append(r)
    rows = []
    for (p, v, d, m), recs in cells.items():
        thr = np.array([r.throughput_bps for r in recs])
        intf = np.array([r.interference_db for r in recs])
        intf = intf[np.isfinite(intf)]
        rows.append({
            "protocol": p, "variant": v, "density": d, "antennas": m, "n": len(recs),
            "mean_bps": float(thr.mean()), "p25_bps": float(np.percentile(thr, 25)),
            "p50_bps": float(np.percentile(thr, 50)), "p75_bps": float(np.percentile(thr, 75)),
            "mean_interference_db": float(intf.mean()) if intf.size else float("-inf"),
        })
    return rows


def write_runs(path, records: Sequence[RunRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.row())


def write_summary(path, rows: Sequence[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in rows:
            w.writerow([row[c] if isinstance(row[c], str) else (str(row[c]) if isinstance(row[c], int) else _fmt(row[c]))
                        for c in SUMMARY_COLUMNS])


def summary_path(runs_path) -> Path:
    p = Path(runs_path)
    return p.with_name(p.stem + "_summary" + p.suffix)


def run_experiment(config: ExperimentConfig, progress: bool = False) -> list[RunRecord]:
    """Full sweep (protocol x variant x density x antennas x network); writes
    the per-run CSV and a per-cell summary next to it."""
    out_dir = os.path.dirname(os.path.abspath(config.output))
    if not os.access(out_dir if os.path.isdir(out_dir) else os.path.dirname(out_dir) or ".", os.W_OK):
        raise PermissionError(f"output directory {out_dir} is not writable")
    records = iter_records(config, progress)
    write_runs(config.output, records)
    write_summary(summary_path(config.output), summarize(records))
    return records

"""Route computation at the central controller.

Three protocols share one Monte Carlo engine:

* BA-SMURF: widest path on expected beam-aware link capacities.
* SMURF: most reliable path on link-existence probabilities.
* DBR: distance-only routing on the estimated positions.

Every route is scored with the same beam-aware capacity model, so the
protocols differ only in how they pick the path.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .beamforming import BeamPattern, UpaConfig, full_beam, steered_response
from .channel import ChannelParams, sinr_capacity
from .geometry import body_angles, pairwise_distances
from .uncertainty import SwarmBelief, log_link_probability, sample_attitudes, sample_swarm

PROTOCOLS = ("DBR", "SMURF", "BA-SMURF")


class DisconnectedError(RuntimeError):
    """No path joins the source and the destination."""


@dataclass
class LinkWeight:
    i: int
    j: int
    expected_capacity: float
    existence_probability: float
    mc_std_error: float


@dataclass
class RouteResult:
    """A route from ``path[0]`` to ``path[-1]``.

    ``aims`` holds, per hop, the (azimuth, elevation) the transmitter and the
    receiver steer toward each other, in their own body frames, as computed
    from the belief the route was planned on.
    """

    path: list[int]
    bottleneck_capacity: float
    link_weights: list[LinkWeight]
    aims: list[tuple[float, float, float, float]]
    protocol: str = ""

    @property
    def hops(self) -> list[tuple[int, int]]:
        return list(zip(self.path[:-1], self.path[1:]))


@dataclass
class NetworkBelief:
    swarm: SwarmBelief
    channel: ChannelParams = field(default_factory=ChannelParams)
    upa: UpaConfig = field(default_factory=UpaConfig)
    beam: BeamPattern | None = None
    cross_traffic: np.ndarray | None = None
    active_routes: list[RouteResult] = field(default_factory=list)

    def __post_init__(self):
        k = len(self.swarm)
        if self.beam is None:
            self.beam = full_beam(self.upa)
        self.beam.check(self.upa)
        if self.cross_traffic is None:
            self.cross_traffic = np.zeros(k)
        self.cross_traffic = np.asarray(self.cross_traffic, dtype=float)
        if self.cross_traffic.shape != (k,):
            raise ValueError(f"need one cross-traffic fraction per UAV ({k})")
        if np.any((self.cross_traffic < 0) | (self.cross_traffic > 1)):
            raise ValueError("cross-traffic fractions must lie in [0, 1]")
        for r in self.active_routes:
            if any(not 0 <= n < k for n in r.path):
                raise ValueError(f"active route {r.path} references unknown UAVs")

    def __len__(self) -> int:
        return len(self.swarm)


# ---------------------------------------------------------------------------
# beam-aware capacity model


def aim_angles(positions, attitudes):
    """``(K, K)`` azimuth/elevation that UAV ``i`` steers toward UAV ``j``."""
    p = np.asarray(positions, dtype=float)
    att = np.asarray(attitudes, dtype=float)
    delta = p[..., None, :, :] - p[..., :, None, :]
    return body_angles(delta, att[..., :, None, 0], att[..., :, None, 1])


def _interferers(routes: Sequence[RouteResult]) -> list[tuple[int, float, float]]:
    """(transmitter, aim azimuth, aim elevation) for every hop of other routes."""
    out = []
    for r in routes:
        for (t, _), aim in zip(r.hops, r.aims):
            out.append((t, aim[0], aim[1]))
    return out


def capacity_matrix(positions, attitudes, aim_az, aim_el, channel: ChannelParams, upa: UpaConfig,
                    beam: BeamPattern, interferers=()):
    """Directed link capacities ``C[..., i, j]`` in bit/s for true states.

    ``positions`` ``(..., K, 3)`` and ``attitudes`` ``(..., K, 2)`` are the
    actual states; ``aim_*[i, j]`` is where ``i`` points its beam when it
    talks to ``j``. Links longer than the maximum distance carry nothing.
    Returns ``(capacity, in_range)``.
    """
    pos = np.asarray(positions, dtype=float)
    att = np.asarray(attitudes, dtype=float)
    k = pos.shape[-2]
    act_az, act_el = aim_angles(pos, att)
    resp = steered_response(act_az, act_el, aim_az, aim_el, beam, upa)
    norm = upa.m * beam.n_active
    gain = resp * np.swapaxes(resp, -1, -2) / norm
    d = pairwise_distances(pos)
    eye = np.eye(k, dtype=bool)
    d = np.where(eye, np.inf, d)
    in_range = d <= channel.max_distance
    attenuation = (channel.reference_distance / d) ** channel.gamma
    signal = channel.p_tx * gain**2 * attenuation
    interference = np.zeros_like(signal)
    for t, t_az, t_el in interferers:
        # transmitter t beams toward its own next hop; receiver j listens toward i
        tx_resp = steered_response(act_az[..., t, :], act_el[..., t, :], t_az, t_el, beam, upa)
        rx_resp = steered_response(act_az[..., :, t][..., None, :], act_el[..., :, t][..., None, :],
                                   aim_az.T, aim_el.T, beam, upa)
        # rx_resp[..., i, j]: j's response toward t while aimed at i
        g = tx_resp[..., None, :] * rx_resp / norm
        p_t = channel.p_tx * g**2 * attenuation[..., t, :][..., None, :]
        p_t = np.where(np.isfinite(p_t), p_t, 0.0)
        p_t[..., t, :] = 0.0
        p_t[..., :, t] = 0.0
        interference = interference + p_t
    cap = sinr_capacity(signal, interference, channel)
    cap = np.where(in_range & ~eye, cap, 0.0)
    return cap, in_range & ~eye


@dataclass
class LinkEstimates:
    """Monte Carlo summary of every directed link of one belief."""

    capacity: np.ndarray  # (K, K) sample mean, bit/s
    capacity_se: np.ndarray  # (K, K) standard error of the mean
    probability: np.ndarray  # (K, K) fraction of draws within range
    aim_az: np.ndarray
    aim_el: np.ndarray
    n_samples: int

    def weight(self, i: int, j: int) -> LinkWeight:
        return LinkWeight(i, j, float(self.capacity[i, j]), float(self.probability[i, j]),
                          float(self.capacity_se[i, j]))


def estimate_links(belief: NetworkBelief, n_samples: int = 1000, seed=0, batch: int = 250) -> LinkEstimates:
    """Expected capacity and existence probability of all links.

    Each Monte Carlo sample draws the whole swarm (positions and attitudes)
    from the belief, so all links share common random numbers. Beams are
    aimed from the belief's means; gains are realised at the drawn states.
    """
    if n_samples < 1:
        raise ValueError("insufficient samples: need n_samples >= 1")
    swarm = belief.swarm
    swarm.validate()
    aim_az, aim_el = aim_angles(swarm.means, swarm.attitudes)
    ss = np.random.SeedSequence(seed if not isinstance(seed, np.random.SeedSequence) else seed.entropy)
    pos_seed, att_seed = ss.spawn(2)
    positions = sample_swarm(swarm, pos_seed, n_samples)
    attitudes = sample_attitudes(swarm, att_seed, n_samples)
    interferers = _interferers(belief.active_routes)
    k = len(swarm)
    total = np.zeros((k, k))
    total_sq = np.zeros((k, k))
    inside = np.zeros((k, k))
    for lo in range(0, n_samples, batch):
        cap, rng_ok = capacity_matrix(positions[lo:lo + batch], attitudes[lo:lo + batch], aim_az, aim_el,
                                      belief.channel, belief.upa, belief.beam, interferers)
        total += cap.sum(axis=0)
        total_sq += (cap**2).sum(axis=0)
        inside += rng_ok.sum(axis=0)
    mean = total / n_samples
    var = np.clip(total_sq / n_samples - mean**2, 0.0, None)
    se = np.sqrt(var * n_samples / max(n_samples - 1, 1) / n_samples)
    return LinkEstimates(mean, se, inside / n_samples, aim_az, aim_el, n_samples)


def expected_link_capacity(belief: NetworkBelief, i: int, j: int, n_samples: int = 1000, seed=0) -> LinkWeight:
    if i == j:
        raise ValueError("a link needs two distinct UAVs")
    return estimate_links(belief, n_samples, seed).weight(i, j)


# ---------------------------------------------------------------------------
# graph search


def _adjacency(edges: Mapping[tuple[int, int], float]):
    adj: dict[int, dict[int, float]] = {}
    for (u, v), w in edges.items():
        if u == v:
            continue
        adj.setdefault(u, {})[v] = w
        adj.setdefault(v, {})[u] = w
    return adj


def maximum_spanning_forest(edges: Mapping[tuple[int, int], float]) -> dict[int, dict[int, float]]:
    """Kruskal over descending weights; returns the forest as adjacency."""
    parent: dict[int, int] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree: dict[int, dict[int, float]] = {}
    for (u, v), w in sorted(edges.items(), key=lambda e: (-e[1], min(e[0]), max(e[0]))):
        if u == v:
            continue
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            tree.setdefault(u, {})[v] = w
            tree.setdefault(v, {})[u] = w
    return tree


def _tree_path(tree, source, dest):
    prev = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == dest:
            break
        for v in tree.get(u, {}):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if dest not in prev:
        return None
    path = [dest]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def fewest_hops_path(adj, source, dest, allowed=lambda w: True):
    """Lexicographically smallest among the minimum-hop paths using only
    edges whose weight passes ``allowed``."""
    dist = {dest: 0}
    queue = deque([dest])
    while queue:
        u = queue.popleft()
        for v, w in adj.get(u, {}).items():
            if v not in dist and allowed(w):
                dist[v] = dist[u] + 1
                queue.append(v)
    if source not in dist:
        return None
    path = [source]
    while path[-1] != dest:
        u = path[-1]
        path.append(min(v for v, w in adj[u].items() if allowed(w) and dist.get(v) == dist[u] - 1))
    return path


def widest_path(edges: Mapping[tuple[int, int], float], source: int, dest: int) -> tuple[list[int], float]:
    """Maximum-bottleneck path in an undirected weighted graph.

    The bottleneck value comes from the path in the maximum spanning tree.
    Among all paths reaching that bottleneck the one with the fewest hops
    (then the lexicographically smallest node sequence) is returned.
    """
    if source == dest:
        raise ValueError("source and destination coincide")
    tree = maximum_spanning_forest(edges)
    tree_path = _tree_path(tree, source, dest)
    if tree_path is None:
        raise DisconnectedError(f"no path between {source} and {dest}")
    best = min(tree[u][v] for u, v in zip(tree_path[:-1], tree_path[1:]))
    path = fewest_hops_path(_adjacency(edges), source, dest, lambda w: w >= best)
    return path, best


def lexicographic_shortest_path(edges: Mapping[tuple[int, int], float], source: int, dest: int,
                                secondary: Mapping[tuple[int, int], float] | None = None):
    """Dijkstra on nonnegative costs with ties broken by a secondary additive
    cost, then hop count, then the node sequence."""
    if source == dest:
        raise ValueError("source and destination coincide")
    adj = _adjacency(edges)
    sec = _adjacency(secondary) if secondary is not None else None
    heap = [(0.0, 0.0, 0, (source,))]
    done = set()
    while heap:
        cost, cost2, hops, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dest:
            return list(path), cost
        for v, w in adj.get(u, {}).items():
            if v not in done:
                w2 = sec[u][v] if sec is not None else 0.0
                heapq.heappush(heap, (cost + w, cost2 + w2, hops + 1, path + (v,)))
    raise DisconnectedError(f"no path between {source} and {dest}")


def route_capacity(path: Sequence[int], link_capacities, rho) -> float:
    """``min over hops of (1 - rho_tx) * C / 2``; ``link_capacities`` maps
    ``(i, j)`` to bit/s (a mapping or a ``(K, K)`` array)."""
    if len(path) < 2:
        raise ValueError("a route needs at least one hop")
    rho = np.asarray(rho, dtype=float)
    caps = []
    for i, j in zip(path[:-1], path[1:]):
        try:
            c = link_capacities[i, j] if isinstance(link_capacities, np.ndarray) else link_capacities[(i, j)]
        except (KeyError, IndexError):
            raise KeyError(f"missing link weight for hop ({i}, {j})") from None
        caps.append((1.0 - rho[i]) * c / 2.0)
    return float(min(caps))


# ---------------------------------------------------------------------------
# protocols


def _result(path, est: LinkEstimates, rho, protocol) -> RouteResult:
    hops = list(zip(path[:-1], path[1:]))
    return RouteResult(
        path=list(path),
        bottleneck_capacity=route_capacity(path, est.capacity, rho),
        link_weights=[est.weight(i, j) for i, j in hops],
        aims=[(float(est.aim_az[i, j]), float(est.aim_el[i, j]), float(est.aim_az[j, i]), float(est.aim_el[j, i]))
              for i, j in hops],
        protocol=protocol,
    )


def _check_ids(belief: NetworkBelief, source: int, dest: int):
    k = len(belief)
    if not (0 <= source < k and 0 <= dest < k):
        raise ValueError(f"source/destination must be in 0..{k - 1}")
    if source == dest:
        raise ValueError("source and destination coincide")


def route_basmurf(belief: NetworkBelief, source: int, dest: int, n_samples: int = 1000, seed=0,
                  estimates: LinkEstimates | None = None) -> RouteResult:
    """Widest path on available expected capacity ``(1 - rho_i) E[C_ij] / 2``.

    Each undirected edge takes the smaller of its two directions.
    """
    _check_ids(belief, source, dest)
    est = estimates or estimate_links(belief, n_samples, seed)
    avail = (1.0 - belief.cross_traffic)[:, None] * est.capacity / 2.0
    avail = np.minimum(avail, avail.T)
    k = len(belief)
    edges = {(i, j): float(avail[i, j]) for i in range(k) for j in range(i + 1, k) if avail[i, j] > 0}
    path, _ = widest_path(edges, source, dest)
    return _result(path, est, belief.cross_traffic, "BA-SMURF")


def reliability_costs(swarm: SwarmBelief, max_distance: float) -> dict[tuple[int, int], float]:
    """``log(-log P_ij)`` for every pair that can be in range.

    Costs live in the log domain: for well-separated beliefs ``-log P_ij``
    is far below double precision, yet the ranking between such links is
    exactly what separates safe routes from marginal ones.
    """
    means, covs = swarm.means, swarm.covariances
    out = {}
    for i in range(len(means)):
        for j in range(i + 1, len(means)):
            lp = log_link_probability(means[i] - means[j], covs[i] + covs[j], max_distance)
            if lp.log_inside == -np.inf:
                continue
            if lp.log_outside < -30.0:
                out[(i, j)] = lp.log_outside  # -log(1 - q) = q to double precision
            elif lp.log_inside == 0.0:
                out[(i, j)] = -np.inf
            else:
                out[(i, j)] = float(np.log(-lp.log_inside))
    return out


def most_reliable_path(log_costs: Mapping[tuple[int, int], float], source: int, dest: int):
    """Path minimising ``sum(-log P)`` given per-edge ``log(-log P)``.

    Path costs are accumulated with ``logaddexp`` so nothing underflows. When
    two totals round to the same double (typically because one shared weak
    link swamps everything else) the paths are compared edge by edge from
    their weakest link down, the exact order of the sums; then by the node
    sequence. Returns the path and its log cost.
    """
    if source == dest:
        raise ValueError("source and destination coincide")
    adj = _adjacency(log_costs)
    heap = [(-np.inf, (), (source,))]
    done = set()
    while heap:
        cost, edges, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dest:
            return list(path), float(cost)
        for v, w in adj.get(u, {}).items():
            if v not in done:
                ranked = tuple(sorted(edges + (w,), reverse=True))  # weakest link first
                heapq.heappush(heap, (float(np.logaddexp(cost, w)), ranked, path + (v,)))
    raise DisconnectedError(f"no path between {source} and {dest}")


# position variances (m^2) below this are round-off from a noiseless tracker
EXACT_VARIANCE = 1e-10


def route_smurf(belief: NetworkBelief, source: int, dest: int, n_samples: int = 1000, seed=0,
                estimates: LinkEstimates | None = None) -> RouteResult:
    """Single path maximising the product of link-existence probabilities.

    The probabilities come from the Gaussian position beliefs alone (no
    beams), evaluated deterministically so that near-certain links can
    still be told apart. Exact beliefs use the zero-noise limit of the same
    ranking (see :func:`range_margins`).
    """
    _check_ids(belief, source, dest)
    est = estimates or estimate_links(belief, n_samples, seed)
    swarm = belief.swarm
    if np.all(np.trace(swarm.covariances, axis1=-2, axis2=-1) <= EXACT_VARIANCE):
        path, _ = leximin_path(range_margins(swarm.means, belief.channel.max_distance), source, dest)
    else:
        path, _ = most_reliable_path(reliability_costs(swarm, belief.channel.max_distance), source, dest)
    return _result(path, est, belief.cross_traffic, "SMURF")


def range_margins(positions, max_distance: float) -> dict[tuple[int, int], float]:
    """``D - d_ij`` for pairs in range.

    As the position uncertainty shrinks, ``-log P_ij`` of a link behaves like
    ``exp(-margin^2 / 4 sigma^2)``, so a path's total is dominated by its
    smallest margin, then its second smallest, and so on. Ranking paths by
    their sorted margins (:func:`leximin_path`) is therefore the zero-noise
    limit of the reliability ranking.
    """
    d = pairwise_distances(positions)
    k = len(d)
    return {(i, j): float(max_distance - d[i, j]) for i in range(k) for j in range(i + 1, k)
            if d[i, j] <= max_distance}


def leximin_path(weights: Mapping[tuple[int, int], float], source: int, dest: int):
    """Path whose ascending-sorted edge weights are lexicographically largest.

    A path that is a prefix-match of another but shorter wins, which is the
    order of sums of infinitely separated positive costs; Dijkstra applies
    because appending an edge never improves a path. Remaining ties go to
    the smaller node sequence. Returns the path and its sorted weights.
    """
    if source == dest:
        raise ValueError("source and destination coincide")
    adj = _adjacency(weights)
    heap = [((), (source,))]
    done = set()
    while heap:
        key, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == dest:
            return list(path), [-w for w in key]
        for v, w in adj.get(u, {}).items():
            if v not in done:
                # negated weights sorted ascending: the worst edge comes first
                heapq.heappush(heap, (tuple(sorted(key + (-w,), reverse=True)), path + (v,)))
    raise DisconnectedError(f"no path between {source} and {dest}")


DBR_METRICS = ("hops", "capacity")


def deterministic_capacities(belief: NetworkBelief) -> np.ndarray:
    """Link capacities if the estimated means and attitudes were exact."""
    swarm = belief.swarm
    aim_az, aim_el = aim_angles(swarm.means, swarm.attitudes)
    cap, _ = capacity_matrix(swarm.means, swarm.attitudes, aim_az, aim_el, belief.channel, belief.upa,
                             belief.beam, _interferers(belief.active_routes))
    return cap


def route_dbr(belief: NetworkBelief, source: int, dest: int, n_samples: int = 1000, seed=0,
              estimates: LinkEstimates | None = None, metric: str = "hops") -> RouteResult:
    """Distance-based routing on the estimated positions, blind to uncertainty.

    Links exist where the estimated distance is below the maximum range.
    ``metric="hops"`` takes the fewest hops, ties going to the shorter total
    distance; ``metric="capacity"`` takes the widest path on the capacities
    the estimated positions would give. The returned bottleneck is still the
    beam-aware expected capacity of the chosen path.
    """
    _check_ids(belief, source, dest)
    if metric not in DBR_METRICS:
        raise ValueError(f"unknown DBR metric {metric!r}")
    means = belief.swarm.means
    d = pairwise_distances(means)
    k = len(belief)
    links = [(i, j) for i in range(k) for j in range(i + 1, k) if d[i, j] < belief.channel.max_distance]
    if metric == "hops":
        path, _ = lexicographic_shortest_path({e: 1.0 for e in links}, source, dest,
                                              secondary={e: float(d[e]) for e in links})
    else:
        cap = deterministic_capacities(belief)
        avail = (1.0 - belief.cross_traffic)[:, None] * cap / 2.0
        avail = np.minimum(avail, avail.T)
        path, _ = widest_path({e: float(avail[e]) for e in links if avail[e] > 0}, source, dest)
    est = estimates or estimate_links(belief, n_samples, seed)
    return _result(path, est, belief.cross_traffic, "DBR")


def route(protocol: str, belief: NetworkBelief, source: int, dest: int, n_samples: int = 1000, seed=0,
          estimates: LinkEstimates | None = None, **kw) -> RouteResult:
    fn = {"BA-SMURF": route_basmurf, "SMURF": route_smurf, "DBR": route_dbr}.get(protocol.upper())
    if fn is None:
        raise ValueError(f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}")
    return fn(belief, source, dest, n_samples=n_samples, seed=seed, estimates=estimates, **kw)


# ---------------------------------------------------------------------------
# sharing and ground-truth evaluation


def tdma_share(routes: Sequence[RouteResult]) -> list[float]:
    """Time share each route gets: a UAV carrying ``k`` routes gives each
    ``1/k``, and a route runs at the smallest share along it."""
    load: dict[int, int] = {}
    for r in routes:
        for n in set(r.path):
            load[n] = load.get(n, 0) + 1
    return [min(1.0 / load[n] for n in r.path) for r in routes]


def hop_capacities(route: RouteResult, positions, attitudes, channel: ChannelParams, upa: UpaConfig,
                   beam: BeamPattern, other_routes: Sequence[RouteResult] = ()) -> np.ndarray:
    """Realised capacity of each hop at the given (true) states, with the
    beams steered as the route prescribes."""
    pos = np.asarray(positions, dtype=float)
    att = np.asarray(attitudes, dtype=float)
    k = len(pos)
    aim_az = np.zeros((k, k))
    aim_el = np.zeros((k, k))
    for (i, j), (taz, tel, raz, rel) in zip(route.hops, route.aims):
        aim_az[i, j], aim_el[i, j] = taz, tel
        aim_az[j, i], aim_el[j, i] = raz, rel
    cap, _ = capacity_matrix(pos, att, aim_az, aim_el, channel, upa, beam, _interferers(other_routes))
    return np.array([cap[i, j] for i, j in route.hops])


def achieved_throughput(route: RouteResult, positions, attitudes, channel: ChannelParams, upa: UpaConfig,
                        beam: BeamPattern, rho=None, other_routes: Sequence[RouteResult] = (),
                        share: float = 1.0) -> float:
    """Ground-truth ``C(r)`` times the route's TDMA share."""
    caps = hop_capacities(route, positions, attitudes, channel, upa, beam, other_routes)
    rho = np.zeros(len(positions)) if rho is None else np.asarray(rho, dtype=float)
    tx = np.array([i for i, _ in route.hops])
    return float(np.min((1.0 - rho[tx]) * caps / 2.0) * share)


def interference_power(route: RouteResult, positions, attitudes, channel: ChannelParams, upa: UpaConfig,
                       beam: BeamPattern) -> np.ndarray:
    """Power (W) each UAV off the route receives from the route's
    transmitters, listening with an unsteered beam along its boresight.

    Returns an array over the non-route UAVs (possibly empty).
    """
    pos = np.asarray(positions, dtype=float)
    att = np.asarray(attitudes, dtype=float)
    on_route = set(route.path)
    victims = np.array([k for k in range(len(pos)) if k not in on_route], dtype=int)
    if victims.size == 0 or not route.hops:
        return np.zeros(0)
    total = np.zeros(victims.size)
    for (t, _), (taz, tel, _, _) in zip(route.hops, route.aims):
        delta = pos[victims] - pos[t]
        az, el = body_angles(delta, att[t, 0], att[t, 1])
        h_tx = steered_response(az, el, taz, tel, beam, upa)
        raz, rel = body_angles(-delta, att[victims, 0], att[victims, 1])
        h_rx = steered_response(raz, rel, 0.0, 0.0, beam, upa)
        g = h_tx * h_rx / (upa.m * beam.n_active)
        d = np.linalg.norm(delta, axis=1)
        total += channel.p_tx * g**2 * (channel.reference_distance / d) ** channel.gamma
    return total


def interference_db(route: RouteResult, positions, attitudes, channel: ChannelParams, upa: UpaConfig,
                    beam: BeamPattern) -> float:
    """Mean interference over non-route UAVs relative to the noise floor, dB.

    ``-inf`` when nobody is left to interfere with or nothing transmits.
    """
    p = interference_power(route, positions, attitudes, channel, upa, beam)
    if p.size == 0 or not np.any(p > 0):
        return float("-inf")
    return float(10.0 * np.log10(p.mean() / channel.noise_power))

import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from fanetsim.beamforming import UpaConfig, full_beam, upa_shape
from fanetsim.channel import ChannelParams, path_loss
from fanetsim.routing import (
    DisconnectedError,
    NetworkBelief,
    RouteResult,
    estimate_links,
    expected_link_capacity,
    interference_db,
    leximin_path,
    most_reliable_path,
    route,
    route_basmurf,
    route_capacity,
    route_dbr,
    route_smurf,
    tdma_share,
    widest_path,
)
from fanetsim.uncertainty import PositionEstimate, SwarmBelief

CH = ChannelParams()


def all_simple_paths(edges, s, t):
    adj = {}
    for (u, v) in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    stack = [(s, [s])]
    while stack:
        u, path = stack.pop()
        if u == t:
            yield path
            continue
        for v in adj.get(u, ()):
            if v not in path:
                stack.append((v, path + [v]))


def weight(edges, u, v):
    return edges[(u, v)] if (u, v) in edges else edges[(v, u)]


def brute_bottleneck(edges, s, t):
    best = None
    for p in all_simple_paths(edges, s, t):
        b = min(weight(edges, u, v) for u, v in zip(p[:-1], p[1:]))
        best = b if best is None else max(best, b)
    return best


def random_graph(rng, n, p=0.5, integer=False):
    edges = {}
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges[(u, v)] = float(rng.integers(1, 6)) if integer else float(rng.uniform(0.1, 10))
    return edges


def belief(positions, sigma=0.0, m=1, rho=None, attitude_sigma=0.0):
    positions = np.asarray(positions, dtype=float)
    ests = [PositionEstimate(p, sigma**2 * np.eye(3), attitude_covariance=attitude_sigma**2 * np.eye(2))
            for p in positions]
    return NetworkBelief(SwarmBelief(ests), CH, UpaConfig(*upa_shape(m)), cross_traffic=rho)


def fake_route(path):
    return RouteResult(list(path), 0.0, [], [(0.0, 0.0, 0.0, 0.0)] * (len(path) - 1))


# --- widest path ------------------------------------------------------------


def test_single_edge():
    assert widest_path({(0, 1): 5.0}, 0, 1) == ([0, 1], 5.0)


def test_triangle():
    s, t, a = 0, 1, 2
    path, b = widest_path({(s, t): 1.0, (s, a): 3.0, (a, t): 2.0}, s, t)
    assert path == [s, a, t] and b == 2.0


def test_disconnected():
    with pytest.raises(DisconnectedError):
        widest_path({(0, 1): 1.0, (2, 3): 1.0}, 0, 3)
    with pytest.raises(ValueError):
        widest_path({(0, 1): 1.0}, 0, 0)


def test_widest_path_matches_enumeration():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(500):
        n = int(rng.integers(2, 9))
        edges = random_graph(rng, n, p=rng.uniform(0.2, 0.9), integer=rng.random() < 0.5)
        s, t = rng.choice(n, 2, replace=False)
        expected = brute_bottleneck(edges, s, t)
        if expected is None:
            with pytest.raises(DisconnectedError):
                widest_path(edges, s, t)
            continue
        path, b = widest_path(edges, s, t)
        assert b == expected
        assert min(weight(edges, u, v) for u, v in zip(path[:-1], path[1:])) == b
        assert path[0] == s and path[-1] == t and len(set(path)) == len(path)
        checked += 1
    assert checked > 300


@settings(max_examples=50)
@given(st.integers(0, 2**31), st.sampled_from([np.exp, np.cbrt, lambda w: 3 * w + 1, np.log1p]))
def test_widest_path_invariant_under_monotone_maps(seed, fn):
    rng = np.random.default_rng(seed)
    edges = random_graph(rng, 7, 0.6)
    try:
        path, b = widest_path(edges, 0, 6)
    except DisconnectedError:
        return
    path2, b2 = widest_path({e: float(fn(w)) for e, w in edges.items()}, 0, 6)
    assert path2 == path
    assert b2 == pytest.approx(float(fn(b)))


# --- most reliable path -----------------------------------------------------


def test_reliability_chain():
    s, a, t = 0, 1, 2
    costs = {(s, t): math.log(-math.log(0.5)), (s, a): math.log(-math.log(0.9)), (a, t): math.log(-math.log(0.9))}
    path, cost = most_reliable_path(costs, s, t)
    assert path == [s, a, t]
    assert math.exp(-math.exp(cost)) == pytest.approx(0.81)


def test_most_reliable_path_matches_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(2, 8))
        probs = {e: float(rng.uniform(0.05, 0.999)) for e in random_graph(rng, n, 0.6)}
        best = None
        for p in all_simple_paths(probs, 0, n - 1):
            prod = math.prod(weight(probs, u, v) for u, v in zip(p[:-1], p[1:]))
            best = prod if best is None else max(best, prod)
        costs = {e: math.log(-math.log(p)) for e, p in probs.items()}
        if best is None:
            with pytest.raises(DisconnectedError):
                most_reliable_path(costs, 0, n - 1)
            continue
        path, _ = most_reliable_path(costs, 0, n - 1)
        got = math.prod(weight(probs, u, v) for u, v in zip(path[:-1], path[1:]))
        assert got == pytest.approx(best, rel=1e-12)


def test_leximin_matches_enumeration():
    rng = np.random.default_rng(9)
    for _ in range(200):
        n = int(rng.integers(2, 8))
        edges = random_graph(rng, n, 0.6, integer=rng.random() < 0.5)
        paths = list(all_simple_paths(edges, 0, n - 1))
        if not paths:
            with pytest.raises(DisconnectedError):
                leximin_path(edges, 0, n - 1)
            continue

        def key(p):
            # larger sorted weights win; a shorter path wins a prefix tie
            return tuple(-w for w in sorted(weight(edges, u, v) for u, v in zip(p[:-1], p[1:])))

        best = min(paths, key=key)
        path, ws = leximin_path(edges, 0, n - 1)
        assert key(path) == key(best)
        assert ws == sorted(ws)


def test_leximin_prefers_stronger_second_link():
    # both routes share the weak 1-2 hop; the second-weakest hop decides
    edges = {(0, 1): 9.0, (1, 2): 1.0, (2, 5): 3.0, (2, 3): 8.0, (3, 4): 8.0, (4, 5): 8.0}
    assert widest_path(edges, 0, 5)[0] == [0, 1, 2, 5]
    assert leximin_path(edges, 0, 5)[0] == [0, 1, 2, 3, 4, 5]


def test_saturated_reliability_ties_follow_weaker_links():
    # one hop so unreliable that the float sums of both routes coincide
    weak, a, b = -1.0, -800.0, -700.0
    costs = {(0, 1): weak, (1, 2): a, (2, 4): a, (1, 3): b, (3, 4): -900.0}
    path, cost = most_reliable_path(costs, 0, 4)
    assert cost == weak
    assert path == [0, 1, 2, 4]


def test_certain_links_cost_nothing():
    path, cost = most_reliable_path({(0, 1): -math.inf, (1, 2): -math.inf, (0, 2): -50.0}, 0, 2)
    assert path == [0, 1, 2] and cost == -math.inf


# --- route capacity and sharing ---------------------------------------------


def test_route_capacity_examples():
    assert route_capacity([0, 1], {(0, 1): 100e6}, [0, 0]) == 50e6
    assert route_capacity([0, 1, 2], {(0, 1): 100e6, (1, 2): 60e6}, [0, 0, 0]) == 30e6
    assert route_capacity([0, 1, 2], {(0, 1): 100e6, (1, 2): 60e6}, [0, 0.5, 0]) == 15e6
    with pytest.raises(KeyError):
        route_capacity([0, 2], {(0, 1): 1.0}, [0, 0, 0])


def test_tdma_share_examples():
    four = [fake_route([k, 9, 10 + k]) for k in range(4)]
    assert tdma_share(four) == [0.25] * 4
    assert tdma_share([fake_route([0, 1]), fake_route([2, 3])]) == [1.0, 1.0]
    assert tdma_share([fake_route([0, 1, 2]), fake_route([3, 1, 4]), fake_route([5, 6])]) == [0.5, 0.5, 1.0]


# --- link estimates ---------------------------------------------------------


def test_unit_snr_link_gives_bandwidth():
    d = 60.0
    ch = ChannelParams(p_tx=CH.noise_power / path_loss(d, CH))
    b = NetworkBelief(SwarmBelief.exact([[0, 0, 0], [d, 0, 0]]), ch, UpaConfig(1, 1))
    w = expected_link_capacity(b, 0, 1, n_samples=10)
    assert w.expected_capacity == pytest.approx(ch.bandwidth, rel=1e-12)
    assert w.existence_probability == 1.0 and w.mc_std_error == 0.0


def test_far_link_is_empty():
    w = expected_link_capacity(belief([[0, 0, 0], [400, 0, 0]], sigma=0.5), 0, 1, n_samples=500)
    assert w.expected_capacity == 0.0 and w.existence_probability == 0.0


def test_same_node_and_sample_count_rejected():
    b = belief([[0, 0, 0], [50, 0, 0]])
    with pytest.raises(ValueError):
        expected_link_capacity(b, 1, 1)
    with pytest.raises(ValueError):
        estimate_links(b, n_samples=0)


@pytest.mark.parametrize("dist, sigma", [(60.0, 5.0), (95.0, 4.0), (100.0, 10.0)])
def test_isotropic_single_antenna_against_quadrature(dist, sigma):
    n = 20_000
    # the two beliefs add up to sigma^2 I on the separation
    b = belief([[0, 0, 0], [dist, 0, 0]], sigma=sigma / math.sqrt(2))
    w = expected_link_capacity(b, 0, 1, n_samples=n, seed=12)

    def density(r):
        z = sigma * math.sqrt(2 * math.pi)
        return r / (dist * z) * (math.exp(-(r - dist) ** 2 / (2 * sigma**2)) - math.exp(-(r + dist) ** 2 / (2 * sigma**2)))

    def capacity(r):
        return CH.bandwidth * math.log2(1 + CH.p_tx * path_loss(r, CH) / CH.noise_power)

    lo = max(1e-9, dist - 12 * sigma)
    exact, _ = integrate.quad(lambda r: capacity(r) * density(r), lo, CH.max_distance, limit=200)
    assert abs(w.expected_capacity - exact) <= 3 * w.mc_std_error


def test_estimates_deterministic_in_seed():
    rng = np.random.default_rng(0)
    b = belief(rng.uniform(0, 150, (6, 3)), sigma=2.0, m=16, attitude_sigma=0.1)
    e1, e2, e3 = estimate_links(b, 200, 5), estimate_links(b, 200, 5), estimate_links(b, 200, 6)
    assert np.array_equal(e1.capacity, e2.capacity) and np.array_equal(e1.probability, e2.probability)
    assert not np.array_equal(e1.capacity, e3.capacity)


def test_estimate_bounds():
    rng = np.random.default_rng(1)
    b = belief(rng.uniform(0, 150, (6, 3)), sigma=3.0, m=4)
    e = estimate_links(b, 300, 1)
    assert np.all(e.capacity >= 0) and np.all((e.probability >= 0) & (e.probability <= 1))
    assert np.all(np.diag(e.capacity) == 0)


# --- protocols --------------------------------------------------------------


@pytest.mark.parametrize("protocol", ["DBR", "SMURF", "BA-SMURF"])
def test_two_nodes_use_the_direct_link(protocol):
    r = route(protocol, belief([[0, 0, 0], [70, 10, 2]], sigma=1.0, m=4), 0, 1, n_samples=100)
    assert r.path == [0, 1]
    assert r.bottleneck_capacity == pytest.approx(r.link_weights[0].expected_capacity / 2)


def test_basmurf_matches_enumeration_on_same_estimates():
    rng = np.random.default_rng(11)
    for trial in range(5):
        b = belief(rng.uniform(0, 160, (8, 3)) * [1, 1, 0.06], sigma=3.0, m=8, attitude_sigma=0.05,
                   rho=rng.uniform(0, 0.5, 8))
        est = estimate_links(b, 100, trial)
        avail = (1 - b.cross_traffic)[:, None] * est.capacity / 2
        avail = np.minimum(avail, avail.T)
        edges = {(i, j): avail[i, j] for i in range(8) for j in range(i + 1, 8) if avail[i, j] > 0}
        expected = brute_bottleneck(edges, 0, 7)
        if expected is None:
            continue
        r = route_basmurf(b, 0, 7, estimates=est)
        assert min(avail[i, j] for i, j in r.hops) == expected


def test_dbr_ignores_links_just_beyond_range():
    b = belief([[0, 0, 0], [100.5, 0, 0], [50, 10, 0]], sigma=5.0)
    assert route_dbr(b, 0, 1, n_samples=50).path == [0, 2, 1]


def test_dbr_capacity_metric_matches_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(5):
        pts = rng.uniform(0, 160, (7, 3)) * [1, 1, 0.06]
        b = belief(pts, m=4)
        d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        est = estimate_links(b, 1, 0)  # exact belief: one draw is the truth
        edges = {(i, j): est.capacity[i, j] / 2 for i in range(7) for j in range(i + 1, 7) if d[i, j] < CH.max_distance}
        expected = brute_bottleneck(edges, 0, 6)
        if expected is None:
            continue
        r = route_dbr(b, 0, 6, estimates=est, metric="capacity")
        assert r.bottleneck_capacity == pytest.approx(expected, rel=1e-12)


def test_smurf_with_exact_positions_stays_in_range():
    rng = np.random.default_rng(8)
    pts = rng.uniform(0, 200, (15, 3)) * [1, 1, 0.05]
    b = belief(pts)
    r = route_smurf(b, 0, 14, n_samples=1)
    assert all(lw.existence_probability == 1.0 for lw in r.link_weights)


def test_unknown_protocol_and_ids():
    b = belief([[0, 0, 0], [50, 0, 0]])
    with pytest.raises(ValueError):
        route("AODV", b, 0, 1)
    with pytest.raises(ValueError):
        route("DBR", b, 0, 2)
    with pytest.raises(ValueError):
        route("DBR", b, 0, 0)
    with pytest.raises(ValueError):
        NetworkBelief(SwarmBelief.exact([[0, 0, 0]]), cross_traffic=[1.5])


positions_strategy = st.lists(
    st.tuples(st.integers(0, 1500), st.integers(0, 1500), st.integers(0, 100)),
    min_size=3, max_size=7, unique=True)


@settings(max_examples=30, deadline=None)
@given(positions_strategy)
def test_no_uncertainty_single_antenna_basmurf_equals_dbr(points):
    pts = np.array(points) / 10  # 0.1 m grid
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    assume(np.all(d[np.triu_indices(len(pts), 1)] > 1.0))
    b = belief(pts)
    est = estimate_links(b, 1, 0)
    try:
        dbr = route_dbr(b, 0, len(pts) - 1, estimates=est, metric="capacity")
    except DisconnectedError:
        return
    ba = route_basmurf(b, 0, len(pts) - 1, estimates=est)
    assert ba.bottleneck_capacity == pytest.approx(dbr.bottleneck_capacity, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["DBR", "SMURF", "BA-SMURF"]))
def test_routes_simple_and_bounded_by_first_hop(seed, protocol):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 200, (12, 3)) * [1, 1, 0.05]
    b = belief(pts, sigma=1.0, m=4, rho=rng.uniform(0, 0.6, 12), attitude_sigma=0.05)
    est = estimate_links(b, 40, seed)
    try:
        r = route(protocol, b, 0, 11, estimates=est)
    except DisconnectedError:
        return
    assert r.path[0] == 0 and r.path[-1] == 11 and len(set(r.path)) == len(r.path)
    s, first = r.hops[0]
    assert r.bottleneck_capacity <= (1 - b.cross_traffic[s]) * est.capacity[s, first] / 2 + 1e-9
    assert len(r.aims) == len(r.hops)


def test_interference_lower_with_many_antennas():
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 200, (20, 3)) * [1, 1, 0.05]
    att = np.zeros((20, 2))
    r = route_basmurf(belief(pts), 0, 1, n_samples=1)  # aims depend on geometry only
    levels = [interference_db(r, pts, att, CH, UpaConfig(*upa_shape(m)), full_beam(UpaConfig(*upa_shape(m))))
              for m in (1, 64)]
    assert levels[0] > levels[1] > -math.inf


def test_interference_without_bystanders():
    r = route_basmurf(belief([[0, 0, 0], [60, 0, 0]]), 0, 1, n_samples=1)
    one = UpaConfig(1, 1)
    assert interference_db(r, [[0, 0, 0], [60, 0, 0]], np.zeros((2, 2)), CH, one, full_beam(one)) == -math.inf

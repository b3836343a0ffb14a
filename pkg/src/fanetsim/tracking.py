"""Swarm mobility and controller-side position tracking.

The tracker is an unscented Kalman filter on a constant-velocity model with
position-only measurements. All filter functions accept leading batch
dimensions, so a whole swarm (one independent filter per UAV) advances in a
single call.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .geometry import Attitude, UavState
from .uncertainty import CovarianceError, PSD_TOL, PositionEstimate, SwarmBelief, sqrt_factor

STATE_DIM = 6
MEAS_DIM = 3


@dataclass(frozen=True)
class MobilityParams:
    """Gauss-Markov mobility inside an axis-aligned box.

    ``memory`` is the velocity correlation over one second; a step of ``dt``
    uses ``memory ** dt``. The random velocity spread is relative to each
    UAV's mean speed (``horizontal_spread`` on x/y, ``vertical_spread`` on z).
    """

    box: tuple[float, float, float] = (200.0, 200.0, 10.0)
    speed_range: tuple[float, float] = (3.0, 8.0)
    model: str = "gauss-markov"
    update_interval: float = 0.1
    memory: float = 0.8
    horizontal_spread: float = 0.3
    vertical_spread: float = 0.05

    def __post_init__(self):
        if len(self.box) != 3 or min(self.box) <= 0:
            raise ValueError(f"map box must have three positive sides, got {self.box}")
        lo, hi = self.speed_range
        if lo < 0 or hi < lo:
            raise ValueError(f"speed range must satisfy 0 <= min <= max, got {self.speed_range}")
        if self.model not in ("gauss-markov", "random-waypoint"):
            raise ValueError(f"unknown mobility model {self.model!r}")
        if self.update_interval <= 0:
            raise ValueError("update interval must be positive")
        if not 0.0 <= self.memory <= 1.0:
            raise ValueError("Gauss-Markov memory must lie in [0, 1]")
        if self.horizontal_spread < 0 or self.vertical_spread < 0:
            raise ValueError("velocity spreads must be nonnegative")


@dataclass
class SwarmKinematics:
    """Array form of a swarm's true state: what the mobility model advances.

    ``target`` is the Gauss-Markov mean velocity for gauss-markov swarms and
    the current waypoint for random-waypoint swarms.
    """

    positions: np.ndarray
    velocities: np.ndarray
    target: np.ndarray
    attitudes: np.ndarray

    @classmethod
    def from_states(cls, states: Sequence[UavState]) -> "SwarmKinematics":
        pos = np.array([s.position for s in states]).reshape(-1, 3)
        vel = np.array([s.velocity for s in states]).reshape(-1, 3)
        att = np.array([(s.attitude.yaw, s.attitude.pitch) for s in states]).reshape(-1, 2)
        return cls(pos, vel, vel.copy(), att)

    def to_states(self) -> list[UavState]:
        return [
            UavState(k, p.copy(), v.copy(), Attitude(a[0], a[1]))
            for k, (p, v, a) in enumerate(zip(self.positions, self.velocities, self.attitudes))
        ]


def velocity_attitudes(velocities, previous=None) -> np.ndarray:
    """(yaw, pitch) of each velocity; rows with zero velocity keep ``previous``."""
    v = np.asarray(velocities, dtype=float)
    horizontal = np.hypot(v[..., 0], v[..., 1])
    att = np.stack([np.arctan2(v[..., 1], v[..., 0]), np.arctan2(v[..., 2], horizontal)], axis=-1)
    if previous is not None:
        still = (horizontal == 0) & (v[..., 2] == 0)
        att = np.where(still[..., None], previous, att)
    return att


def _reflect(pos, vel, target, box, waypoints: bool):
    hi = np.asarray(box, dtype=float)
    for _ in range(2):
        below, above = pos < 0, pos > hi
        pos = np.where(below, -pos, np.where(above, 2 * hi - pos, pos))
        flip = below | above
        vel = np.where(flip, -vel, vel)
        if not waypoints:
            # the mean velocity turns away from the wall together with the UAV
            target = np.where(flip, -target, target)
    return np.clip(pos, 0.0, hi), vel, target


def advance(kin: SwarmKinematics, params: MobilityParams, dt: float, rng) -> SwarmKinematics:
    """One mobility step of length ``dt`` for array-form kinematics."""
    if dt <= 0:
        raise ValueError("mobility step needs dt > 0")
    rng = np.random.default_rng(rng)
    lo, hi = params.speed_range
    box = np.asarray(params.box, dtype=float)
    k = len(kin.positions)
    if params.model == "gauss-markov":
        a = params.memory**dt
        mean_v = kin.target
        scale = np.linalg.norm(mean_v, axis=1, keepdims=True)
        spread = scale * np.array([params.horizontal_spread, params.horizontal_spread, params.vertical_spread])
        vel = a * kin.velocities + (1 - a) * mean_v + np.sqrt(1 - a * a) * spread * rng.standard_normal((k, 3))
        speed = np.linalg.norm(vel, axis=1, keepdims=True)
        capped = np.where(speed > hi, hi / np.where(speed > 0, speed, 1.0), 1.0)
        vel = vel * capped
        target = mean_v
        pos = kin.positions + vel * dt
        pos, vel, target = _reflect(pos, vel, target, box, waypoints=False)
    else:
        target = kin.target.copy()
        to_go = target - kin.positions
        dist = np.linalg.norm(to_go, axis=1, keepdims=True)
        speed = np.linalg.norm(kin.velocities, axis=1, keepdims=True)
        arrived = (dist[:, 0] <= speed[:, 0] * dt) | (dist[:, 0] == 0)
        if arrived.any():
            n = int(arrived.sum())
            target[arrived] = rng.uniform(0, 1, (n, 3)) * box
            speed[arrived] = rng.uniform(lo, hi, (n, 1))
            to_go = target - kin.positions
            dist = np.linalg.norm(to_go, axis=1, keepdims=True)
        vel = speed * to_go / np.where(dist > 0, dist, 1.0)
        pos = kin.positions + vel * dt
        pos, vel, _ = _reflect(pos, vel, target, box, waypoints=True)
    return SwarmKinematics(pos, vel, target, velocity_attitudes(vel, kin.attitudes))


def step_mobility(states: Sequence[UavState], params: MobilityParams, dt: float, seed) -> list[UavState]:
    """Advance a list of UAV states by ``dt``; the Gauss-Markov mean velocity is
    taken to be each UAV's current velocity."""
    kin = SwarmKinematics.from_states(states)
    out = advance(kin, params, dt, seed).to_states()
    for new, old in zip(out, states):
        new.id = old.id
    return out


def initial_velocities(k: int, params: MobilityParams, rng) -> np.ndarray:
    """Random horizontal headings with speeds drawn from the speed range."""
    rng = np.random.default_rng(rng)
    speed = rng.uniform(*params.speed_range, size=k)
    heading = rng.uniform(-np.pi, np.pi, size=k)
    return np.stack([speed * np.cos(heading), speed * np.sin(heading), np.zeros(k)], axis=1)


# ---------------------------------------------------------------------------
# Unscented Kalman filter


@dataclass(frozen=True)
class TrackerParams:
    process_noise: float = 1.0  # white-noise acceleration PSD along track, m^2/s^3
    measurement_std: float = 0.3  # m
    # cross-track acceleration PSD as a fraction of the along-track one
    cross_track_ratio: float = 0.5
    alpha: float = 1e-3
    beta: float = 2.0
    kappa: float = 0.0
    initial_velocity_std: float = 10.0

    def __post_init__(self):
        if self.process_noise < 0 or self.measurement_std < 0:
            raise ValueError("noise levels must be nonnegative")
        if self.alpha <= 0:
            raise ValueError("UKF alpha must be positive")
        if not 0.0 <= self.cross_track_ratio <= 1.0:
            raise ValueError("cross-track ratio must lie in [0, 1]")


@dataclass
class TrackerState:
    """UKF state ``[x, y, z, vx, vy, vz]`` and covariance, possibly batched."""

    mean: np.ndarray
    cov: np.ndarray
    params: TrackerParams = field(default_factory=TrackerParams)
    attitude: np.ndarray | None = None

    @classmethod
    def from_measurement(cls, z, params: TrackerParams = TrackerParams()) -> "TrackerState":
        z = np.asarray(z, dtype=float)
        mean = np.concatenate([z, np.zeros(z.shape)], axis=-1)
        var = np.array([params.measurement_std**2] * 3 + [params.initial_velocity_std**2] * 3)
        cov = np.broadcast_to(np.diag(var), z.shape[:-1] + (STATE_DIM, STATE_DIM)).copy()
        return cls(mean, cov, params, np.zeros(z.shape[:-1] + (2,)))


def sigma_weights(n: int, alpha: float, beta: float, kappa: float):
    lam = alpha**2 * (n + kappa) - n
    wm = np.full(2 * n + 1, 0.5 / (n + lam))
    wc = wm.copy()
    wm[0] = lam / (n + lam)
    wc[0] = wm[0] + 1.0 - alpha**2 + beta
    return wm, wc, lam


def sigma_points(mean, cov, lam: float) -> np.ndarray:
    """``(..., 2n+1, n)`` symmetric sigma points."""
    n = mean.shape[-1]
    spread = sqrt_factor((n + lam) * cov)  # columns are the offsets
    offsets = np.swapaxes(spread, -1, -2)
    centre = mean[..., None, :]
    return np.concatenate([centre, centre + offsets, centre - offsets], axis=-2)


def _unscented(points, wm, wc):
    """Weighted mean and covariance of transformed sigma points.

    The mean is accumulated as offsets from the centre point, which keeps the
    large opposite-signed weights of small-alpha filters from cancelling badly.
    """
    centre = points[..., :1, :]
    mean = centre[..., 0, :] + np.einsum("s,...si->...i", wm, points - centre)
    dev = points - mean[..., None, :]
    cov = np.einsum("s,...si,...sj->...ij", wc, dev, dev)
    return mean, dev, cov


def transition(dt: float) -> np.ndarray:
    f = np.eye(STATE_DIM)
    f[:3, 3:] = dt * np.eye(3)
    return f


def process_noise(dt: float, q: float, velocity=None, cross_track_ratio: float = 1.0) -> np.ndarray:
    """White-noise-acceleration covariance for one step of ``dt``.

    With a ``velocity`` the acceleration PSD is ``q`` along the direction of
    travel and ``q * cross_track_ratio`` across it, so position errors grow
    fastest along track. Zero velocities (and ratio 1) give the isotropic
    model. Batched velocities return batched ``(..., 6, 6)`` matrices.
    """
    if velocity is None or cross_track_ratio == 1.0:
        intensity = q * np.eye(3)
    else:
        v = np.asarray(velocity, dtype=float)
        norm = np.linalg.norm(v, axis=-1, keepdims=True)
        u = v / np.where(norm > 0, norm, 1.0)
        aligned = cross_track_ratio * np.eye(3) + (1 - cross_track_ratio) * u[..., :, None] * u[..., None, :]
        intensity = q * np.where(norm[..., None] > 0, aligned, np.eye(3))
    top = np.concatenate([dt**3 / 3 * intensity, dt**2 / 2 * intensity], axis=-1)
    bottom = np.concatenate([dt**2 / 2 * intensity, dt * intensity], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _symmetrize(cov):
    return 0.5 * (cov + np.swapaxes(cov, -1, -2))


def wall_reflection(mean, box):
    """Per-component ``(sign, offset)`` that mirrors a predicted state back
    into ``box`` the way the UAVs bounce: positions past a wall are reflected
    and the matching velocity components reversed."""
    hi = np.asarray(box, dtype=float)
    pos = mean[..., :3]
    below, above = pos < 0, pos > hi
    flip = below | above
    sign = np.where(np.concatenate([flip, flip], axis=-1), -1.0, 1.0)
    offset = np.concatenate([np.where(above, 2 * hi, 0.0), np.zeros(pos.shape)], axis=-1)
    return sign, offset


def ukf_predict(tracker: TrackerState, dt: float, box=None) -> TrackerState:
    """Constant-velocity prediction. With a flight ``box`` the sigma points
    follow the same wall bounce as the predicted mean, so the filter knows
    about reversals it would otherwise learn only from later measurements."""
    if dt <= 0:
        raise ValueError("prediction step needs dt > 0")
    p = tracker.params
    wm, wc, lam = sigma_weights(STATE_DIM, p.alpha, p.beta, p.kappa)
    pts = sigma_points(tracker.mean, tracker.cov, lam)
    moved = pts @ transition(dt).T
    if box is not None:
        sign, offset = wall_reflection(moved[..., 0, :], box)
        moved = moved * sign[..., None, :] + offset[..., None, :]
    mean, _, cov = _unscented(moved, wm, wc)
    q = process_noise(dt, p.process_noise, mean[..., 3:], p.cross_track_ratio)
    cov = _symmetrize(cov + q)
    return replace(tracker, mean=mean, cov=cov)


def ukf_update(tracker: TrackerState, z) -> TrackerState:
    p = tracker.params
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("measurement must be finite")
    wm, wc, lam = sigma_weights(STATE_DIM, p.alpha, p.beta, p.kappa)
    pts = sigma_points(tracker.mean, tracker.cov, lam)
    zs = pts[..., :MEAS_DIM]
    z_mean, z_dev, s = _unscented(zs, wm, wc)
    s = s + p.measurement_std**2 * np.eye(MEAS_DIM)
    x_dev = pts - tracker.mean[..., None, :]
    pxz = np.einsum("s,...si,...sj->...ij", wc, x_dev, z_dev)
    try:
        gain = np.swapaxes(np.linalg.solve(s, np.swapaxes(pxz, -1, -2)), -1, -2)
    except np.linalg.LinAlgError:
        # noiseless measurements of an already exact state
        gain = pxz @ np.linalg.pinv(s, hermitian=True)
    mean = tracker.mean + np.einsum("...ij,...j->...i", gain, z - z_mean)
    cov = _symmetrize(tracker.cov - gain @ s @ np.swapaxes(gain, -1, -2))
    eig = np.linalg.eigvalsh(cov)
    if np.min(eig) < -PSD_TOL * max(1.0, float(np.max(np.abs(eig)))):
        raise CovarianceError("UKF covariance lost positive semi-definiteness; reset the filter")
    return replace(tracker, mean=mean, cov=cov)


def ukf_predict_update(tracker: TrackerState, measurement, dt: float, box=None):
    """One predict/update cycle; returns the new state and its position estimate(s)."""
    new = ukf_update(ukf_predict(tracker, dt, box), measurement)
    new = replace(new, attitude=attitude_estimate(new))
    return new, position_estimates(new)


def attitude_estimate(tracker: TrackerState) -> np.ndarray:
    """Estimated (yaw, pitch) from the velocity estimate, keeping the previous
    attitude where the velocity estimate is exactly zero."""
    return velocity_attitudes(tracker.mean[..., 3:], tracker.attitude)


def attitude_covariance(tracker: TrackerState) -> np.ndarray:
    """First-order (yaw, pitch) covariance propagated from the velocity block."""
    v = tracker.mean[..., 3:]
    pv = tracker.cov[..., 3:, 3:]
    vx, vy, vz = v[..., 0], v[..., 1], v[..., 2]
    h2 = vx**2 + vy**2
    s2 = h2 + vz**2
    h = np.sqrt(h2)
    safe_h2 = np.where(h2 > 0, h2, 1.0)
    safe_s2h = np.where((s2 > 0) & (h > 0), s2 * h, 1.0)
    jac = np.zeros(v.shape[:-1] + (2, 3))
    jac[..., 0, 0] = -vy / safe_h2
    jac[..., 0, 1] = vx / safe_h2
    jac[..., 1, 0] = -vz * vx / safe_s2h
    jac[..., 1, 1] = -vz * vy / safe_s2h
    jac[..., 1, 2] = h / np.where(s2 > 0, s2, 1.0)
    cov = jac @ pv @ np.swapaxes(jac, -1, -2)
    # a heading is never less certain than uniform on the circle
    cap = np.pi**2 / 3
    cov = np.where((h2 > 0)[..., None, None], cov, np.diag([cap, cap]))
    d = np.sqrt(np.clip(np.diagonal(cov, axis1=-2, axis2=-1), 0.0, None))
    scale = np.minimum(1.0, np.sqrt(cap) / np.where(d > 0, d, 1.0))
    return _symmetrize(cov * scale[..., :, None] * scale[..., None, :])


def position_estimates(tracker: TrackerState, with_attitude_uncertainty: bool = True):
    """PositionEstimate (or list of them for a batched tracker)."""
    att = attitude_estimate(tracker)
    att_cov = attitude_covariance(tracker) if with_attitude_uncertainty else np.zeros(att.shape + (2,))
    pos_cov = _symmetrize(tracker.cov[..., :3, :3])
    if tracker.mean.ndim == 1:
        return PositionEstimate(tracker.mean[:3].copy(), pos_cov, Attitude(*att), att_cov)
    return [
        PositionEstimate(m[:3].copy(), c, Attitude(a[0], a[1]), ac)
        for m, c, a, ac in zip(tracker.mean, pos_cov, att, att_cov)
    ]


def swarm_belief(tracker: TrackerState, timestamp: float, with_attitude_uncertainty: bool = True) -> SwarmBelief:
    return SwarmBelief(position_estimates(tracker, with_attitude_uncertainty), timestamp)


# ---------------------------------------------------------------------------
# Linear Kalman filter, the closed-form reference for the UKF on this model


def kf_step(mean, cov, z, dt: float, params: TrackerParams):
    f = transition(dt)
    h = np.hstack([np.eye(3), np.zeros((3, 3))])
    q = process_noise(dt, params.process_noise, mean[3:], params.cross_track_ratio)
    mean = f @ mean
    cov = f @ cov @ f.T + q
    s = h @ cov @ h.T + params.measurement_std**2 * np.eye(3)
    k = cov @ h.T @ np.linalg.inv(s)
    mean = mean + k @ (z - h @ mean)
    cov = cov - k @ s @ k.T
    return mean, 0.5 * (cov + cov.T)


def write_trace(path, rows) -> None:
    """CSV trace: one row per (time, uav) with true and estimated position and
    the estimated position variances."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "uav", "x", "y", "z", "est_x", "est_y", "est_z", "var_x", "var_y", "var_z"])
        for t, k, true_pos, est in rows:
            w.writerow(
                [f"{t:.9g}", k, *(f"{v:.9g}" for v in true_pos), *(f"{v:.9g}" for v in est.mean),
                 *(f"{v:.9g}" for v in np.diag(est.covariance))]
            )

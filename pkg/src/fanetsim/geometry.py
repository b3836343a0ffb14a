"""Three-dimensional geometry between UAVs.

Positions are plain ``numpy`` arrays of shape ``(..., 3)`` in meters. Angles
are in radians with azimuth in ``[-pi, pi)`` and elevation in
``[-pi/2, pi/2]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi
HALF_PI = 0.5 * np.pi


class CoincidentPointsError(ValueError):
    """Raised when a bearing is requested between two identical points."""


def wrap_angle(x):
    """Reduce angles into ``[-pi, pi)``."""
    wrapped = np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def canonical_direction(azimuth, elevation):
    """Map an (azimuth, elevation) pair to the same pointing direction with
    elevation folded into ``[-pi/2, pi/2]`` and azimuth wrapped.

    An elevation beyond the zenith points over the top, so the azimuth flips
    by ``pi``. The unit direction vector is unchanged.
    """
    az = np.asarray(azimuth, dtype=float)
    el = wrap_angle(elevation)
    el = np.asarray(el, dtype=float)
    over = el > HALF_PI
    under = el < -HALF_PI
    el = np.where(over, np.pi - el, np.where(under, -np.pi - el, el))
    az = np.where(over | under, az + np.pi, az)
    az = np.asarray(wrap_angle(az))
    if az.ndim == 0:
        return float(az), float(el)
    return az, el


def step(x):
    """Unit step: 1 for ``x > 0`` and 0 otherwise (including ``x == 0``)."""
    return np.where(np.asarray(x) > 0, 1.0, 0.0)


@dataclass(frozen=True)
class Attitude:
    yaw: float = 0.0
    pitch: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.yaw) and np.isfinite(self.pitch)):
            raise ValueError("attitude angles must be finite")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))
        if abs(self.pitch) > HALF_PI + 1e-12:
            raise ValueError(f"pitch {self.pitch} outside [-pi/2, pi/2]")
        object.__setattr__(self, "pitch", float(np.clip(self.pitch, -HALF_PI, HALF_PI)))

    @classmethod
    def from_velocity(cls, velocity, fallback: "Attitude | None" = None) -> "Attitude":
        """Yaw and pitch of the direction of travel.

        A zero velocity has no heading; ``fallback`` (or level flight along +x)
        is returned instead.
        """
        v = np.asarray(velocity, dtype=float)
        horizontal = float(np.hypot(v[0], v[1]))
        if horizontal == 0.0 and v[2] == 0.0:
            return fallback if fallback is not None else cls()
        return cls(float(np.arctan2(v[1], v[0])), float(np.arctan2(v[2], horizontal)))


@dataclass
class UavState:
    id: int
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: Attitude = field(default_factory=Attitude)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        if not np.all(np.isfinite(self.position)):
            raise ValueError(f"UAV {self.id}: position must be finite")


def distance(a, b):
    """Euclidean distance; broadcasts over leading dimensions."""
    d = np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), axis=-1)
    return float(d) if np.ndim(d) == 0 else d


def bearing(delta):
    """World-frame azimuth and elevation of displacement vectors ``delta``.

    Uses a four-quadrant arctangent for the azimuth; this is what the
    ``pi * step(dx) + arctan(dy / dx)`` form is after for every quadrant.
    """
    delta = np.asarray(delta, dtype=float)
    dx, dy, dz = delta[..., 0], delta[..., 1], delta[..., 2]
    az = np.arctan2(dy, dx)
    el = np.arctan2(dz, np.hypot(dx, dy))
    return az, el


def body_angles(delta, yaw, pitch):
    """Relative angles of ``delta`` seen from a body with the given attitude.

    Vectorised core of :func:`relative_angles` without the coincidence check.
    """
    az, el = bearing(delta)
    return canonical_direction(az - np.asarray(yaw), el - np.asarray(pitch))


def relative_angles(tx_position, tx_attitude: Attitude, rx_position) -> tuple[float, float]:
    """Azimuth and elevation of ``rx_position`` relative to a transmitter's
    position and attitude (yaw then pitch subtracted)."""
    delta = np.asarray(rx_position, dtype=float) - np.asarray(tx_position, dtype=float)
    if not np.any(delta):
        raise CoincidentPointsError("bearing undefined between coincident positions")
    return body_angles(delta, tx_attitude.yaw, tx_attitude.pitch)


def reciprocal_angles(azimuth, elevation):
    """Receiver-side counterpart ``(pi + az, pi + el)`` of a link's angles.

    The azimuth is wrapped; the elevation ``pi + el`` is folded back into
    ``[-pi/2, pi/2]`` keeping its sine, which leaves ``-el``: a peer seen
    above is seen from the peer as below.
    """
    az = wrap_angle(np.pi + np.asarray(azimuth, dtype=float))
    el = np.arcsin(np.clip(np.sin(np.pi + np.asarray(elevation, dtype=float)), -1.0, 1.0))
    if np.ndim(el) == 0:
        return float(az), float(el)
    return az, el


def pairwise_distances(positions):
    """All pairwise distances for positions of shape ``(..., K, 3)``."""
    p = np.asarray(positions, dtype=float)
    return np.linalg.norm(p[..., :, None, :] - p[..., None, :, :], axis=-1)

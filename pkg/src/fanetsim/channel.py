"""Free-space line-of-sight mmWave channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamforming import SPEED_OF_LIGHT


def dbm_per_hz_to_w(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    f0: float = 28e9
    gamma: float = 2.0
    bandwidth: float = 100e6
    n0: float = dbm_per_hz_to_w(-174.0)
    p_tx: float = 1.0
    max_distance: float = 100.0

    def __post_init__(self):
        for name in ("f0", "gamma", "bandwidth", "n0", "p_tx", "max_distance"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"channel parameter {name} must be positive and finite, got {value}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f0

    @property
    def noise_power(self) -> float:
        return self.n0 * self.bandwidth

    @property
    def reference_distance(self) -> float:
        """Distance at which the path-loss factor equals one."""
        return SPEED_OF_LIGHT / (4.0 * np.pi * self.f0)


def path_loss(d, p: ChannelParams):
    """Attenuation factor ``(c / (4 pi f0 d)) ** gamma``; multiply a transmit
    power by it to get the received power."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("path loss needs a positive distance")
    out = (p.reference_distance / d) ** p.gamma
    return float(out) if out.ndim == 0 else out


def received_power(gain, d, p: ChannelParams):
    gain = np.asarray(gain, dtype=float)
    if np.any(gain < 0):
        raise ValueError("beamforming gain must be nonnegative")
    out = p.p_tx * gain**2 * path_loss(d, p)
    return float(out) if np.ndim(out) == 0 else out


def sinr_capacity(signal, interference_sum, p: ChannelParams):
    """Shannon rate in bit/s for the given signal and interference powers (W)."""
    signal = np.asarray(signal, dtype=float)
    interference_sum = np.asarray(interference_sum, dtype=float)
    if np.any(signal < 0) or np.any(interference_sum < 0):
        raise ValueError("powers must be nonnegative")
    out = p.bandwidth * np.log2(1.0 + signal / (interference_sum + p.noise_power))
    return float(out) if out.ndim == 0 else out

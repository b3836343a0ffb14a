"""Uniform planar array (UPA) model with binary beam masks.

The array lies in the body y-z plane, so boresight is the body +x axis.
Element ``l`` (1-based) sits at ``[0, i(l) d_H lambda, j(l) d_V lambda]`` with
``i(l) = (l - 1) mod M_H`` and ``j(l) = (l - 1) // M_H``; that ordering is
column-stacking of an ``M_H x M_V`` mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class UpaConfig:
    m_h: int = 4
    m_v: int = 4
    d_h: float = 0.5
    d_v: float = 0.5
    wavelength: float = SPEED_OF_LIGHT / 28e9

    def __post_init__(self):
        if int(self.m_h) != self.m_h or int(self.m_v) != self.m_v or self.m_h < 1 or self.m_v < 1:
            raise ValueError(f"array dimensions must be positive integers, got {self.m_h}x{self.m_v}")
        if self.d_h <= 0 or self.d_v <= 0 or self.wavelength <= 0:
            raise ValueError("element spacing and wavelength must be positive")

    @property
    def m(self) -> int:
        return self.m_h * self.m_v

    def element_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Horizontal and vertical grid indices ``(i(l), j(l))`` for l = 1..M."""
        l0 = np.arange(self.m)
        return l0 % self.m_h, l0 // self.m_h

    def element_positions(self) -> np.ndarray:
        i, j = self.element_indices()
        u = np.zeros((self.m, 3))
        u[:, 1] = i * self.d_h * self.wavelength
        u[:, 2] = j * self.d_v * self.wavelength
        return u


def upa_shape(m: int) -> tuple[int, int]:
    """Most square ``(M_H, M_V)`` factorisation of ``m`` with ``M_H >= M_V``.

    >>> [upa_shape(m) for m in (1, 4, 8, 16, 32, 64)]
    [(1, 1), (2, 2), (4, 2), (4, 4), (8, 4), (8, 8)]
    """
    if m < 1:
        raise ValueError("element count must be >= 1")
    m_v = int(np.floor(np.sqrt(m)))
    while m % m_v:
        m_v -= 1
    return m // m_v, m_v


def element_position(l: int, cfg: UpaConfig) -> np.ndarray:
    if not 1 <= l <= cfg.m:
        raise IndexError(f"element index {l} outside 1..{cfg.m}")
    return cfg.element_positions()[l - 1]


def wave_vector(azimuth, elevation, wavelength: float) -> np.ndarray:
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    k = 2.0 * np.pi / wavelength
    return k * np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def steering_vector(azimuth, elevation, cfg: UpaConfig) -> np.ndarray:
    """``exp(1j * kappa . u_m)`` for every element; shape ``(..., M)``."""
    kappa = wave_vector(azimuth, elevation, cfg.wavelength)
    return np.exp(1j * kappa @ cfg.element_positions().T)


@dataclass(frozen=True)
class BeamPattern:
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask)
        if mask.ndim != 2:
            raise ValueError("beam mask must be an M_H x M_V matrix")
        if not np.isin(mask, (0, 1)).all():
            raise ValueError("beam mask entries must be 0 or 1")
        if not mask.any():
            raise ValueError("beam mask has no active element")
        object.__setattr__(self, "mask", mask.astype(bool))

    @property
    def stacked(self) -> np.ndarray:
        return self.mask.flatten(order="F").astype(float)

    @property
    def n_active(self) -> int:
        return int(self.mask.sum())

    @property
    def block(self) -> tuple[int, int] | None:
        """``(rows, cols)`` if the mask is a leading all-ones block, else None."""
        rows = int(self.mask[:, 0].sum())
        cols = int(self.mask[0, :].sum())
        if self.mask[:rows, :cols].all() and self.mask.sum() == rows * cols:
            return rows, cols
        return None

    def check(self, cfg: UpaConfig) -> None:
        if self.mask.shape != (cfg.m_h, cfg.m_v):
            raise ValueError(f"beam mask {self.mask.shape} does not fit a {cfg.m_h}x{cfg.m_v} array")


def make_beam(cfg: UpaConfig, active_cols: int, active_rows: int) -> BeamPattern:
    """Leading ``active_rows x active_cols`` block switched on; the trailing
    rows and columns are off. One element gives the widest beam, the full
    array the narrowest."""
    if active_rows < 1 or active_cols < 1:
        raise ValueError("a beam needs at least one active element")
    if active_rows > cfg.m_h or active_cols > cfg.m_v:
        raise ValueError(
            f"{active_rows}x{active_cols} active block exceeds the {cfg.m_h}x{cfg.m_v} array"
        )
    mask = np.zeros((cfg.m_h, cfg.m_v), dtype=bool)
    mask[:active_rows, :active_cols] = True
    return BeamPattern(mask)


def full_beam(cfg: UpaConfig) -> BeamPattern:
    return make_beam(cfg, cfg.m_v, cfg.m_h)


def beam_weights(beam: BeamPattern, cfg: UpaConfig, aim_azimuth, aim_elevation) -> np.ndarray:
    """Analog weights: steering phases toward the aim direction, amplitudes
    from the binary mask."""
    beam.check(cfg)
    return steering_vector(aim_azimuth, aim_elevation, cfg) * beam.stacked


def array_response(azimuth, elevation, weights, cfg: UpaConfig):
    """``|a(az, el)^H w|``; ``weights`` is a complex weight vector or a
    :class:`BeamPattern` (its stacked binary vector, i.e. unsteered)."""
    if isinstance(weights, BeamPattern):
        weights.check(cfg)
        weights = weights.stacked
    w = np.asarray(weights)
    if w.shape[-1] != cfg.m:
        raise ValueError(f"weight vector length {w.shape[-1]} != array size {cfg.m}")
    a = steering_vector(azimuth, elevation, cfg)
    r = np.abs(np.sum(np.conj(a) * w, axis=-1))
    return float(r) if np.ndim(r) == 0 else r


def link_gain(tx_angles, rx_angles, tx_weights, rx_weights, cfg: UpaConfig):
    """Transmit-times-receive array response over ``M_H * M_V``.

    Angles are the actual directions of the peer in each body frame; the
    weights carry whatever direction the beams were aimed at.
    """
    h_tx = array_response(tx_angles[0], tx_angles[1], tx_weights, cfg)
    h_rx = array_response(rx_angles[0], rx_angles[1], rx_weights, cfg)
    return h_tx * h_rx / cfg.m


def _dirichlet(n: int, x):
    """``|sum_{k<n} exp(1j k x)|``."""
    half = 0.5 * np.asarray(x)
    s = np.sin(half)
    small = np.abs(s) < 1e-12
    out = np.abs(np.sin(n * half) / np.where(small, 1.0, s))
    return np.where(small, float(n), out)


def steered_response(azimuth, elevation, aim_azimuth, aim_elevation, beam: BeamPattern, cfg: UpaConfig):
    """``|a(az, el)^H w|`` for ``w = beam_weights(beam, cfg, aim)``, broadcast
    over any array shapes.

    Leading-block masks factor into two Dirichlet kernels; other masks fall
    back to the explicit element sum.
    """
    az, el = np.asarray(azimuth, dtype=float), np.asarray(elevation, dtype=float)
    aaz, ael = np.asarray(aim_azimuth, dtype=float), np.asarray(aim_elevation, dtype=float)
    beam.check(cfg)
    block = beam.block
    # phase progression per element step along y and z
    dy = 2.0 * np.pi * cfg.d_h * (np.cos(ael) * np.sin(aaz) - np.cos(el) * np.sin(az))
    dz = 2.0 * np.pi * cfg.d_v * (np.sin(ael) - np.sin(el))
    if block is not None:
        rows, cols = block
        return _dirichlet(rows, dy) * _dirichlet(cols, dz)
    i, j = cfg.element_indices()
    on = beam.stacked.astype(bool)
    phase = dy[..., None] * i[on] + dz[..., None] * j[on]
    return np.abs(np.exp(1j * phase).sum(axis=-1))


def power_normalized_gain(raw_gain, tx_beam: BeamPattern, rx_beam: BeamPattern):
    """Gain with the transmit power split evenly over the active elements and
    a unit-norm receive combiner.

    ``raw_gain`` is :func:`link_gain` with binary-amplitude weights; dividing by
    ``sqrt(n_tx * n_rx)`` gives the unit-norm-weight value, which is 1 for a
    perfectly aligned full array of any size.
    """
    return np.asarray(raw_gain) / np.sqrt(tx_beam.n_active * rx_beam.n_active)

"""Gaussian position beliefs and Monte Carlo link-existence probabilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize, special

from .geometry import Attitude

PSD_TOL = 1e-9
CHOL_JITTER = 1e-12


class CovarianceError(ValueError):
    """A covariance matrix is not symmetric positive semi-definite."""


def check_psd(cov, name: str = "covariance") -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape[-2:] != (cov.shape[-1], cov.shape[-1]):
        raise CovarianceError(f"{name} must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise CovarianceError(f"{name} has non-finite entries")
    if np.max(np.abs(cov - np.swapaxes(cov, -1, -2)), initial=0.0) > PSD_TOL:
        raise CovarianceError(f"{name} is not symmetric")
    eig = np.linalg.eigvalsh(0.5 * (cov + np.swapaxes(cov, -1, -2)))
    if np.min(eig, initial=0.0) < -PSD_TOL:
        raise CovarianceError(f"{name} has negative eigenvalue {np.min(eig):.3g}")
    return cov


def sqrt_factor(cov) -> np.ndarray:
    """Lower factor ``L`` with ``L @ L.T == cov`` for (batches of) PSD matrices.

    Cholesky with a tiny diagonal jitter; falls back to an eigen square root
    for matrices that are singular beyond what the jitter absorbs.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[-1]
    for jitter in (0.0, CHOL_JITTER):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            pass
    w, v = np.linalg.eigh(0.5 * (cov + np.swapaxes(cov, -1, -2)))
    return v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]


@dataclass
class PositionEstimate:
    """Tracked position belief of one UAV.

    ``attitude_covariance`` is the (yaw, pitch) uncertainty; it is zero for a
    known attitude.
    """

    mean: np.ndarray
    covariance: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    attitude: Attitude = field(default_factory=Attitude)
    attitude_covariance: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(3)
        self.covariance = np.asarray(self.covariance, dtype=float).reshape(3, 3)
        self.attitude_covariance = np.asarray(self.attitude_covariance, dtype=float).reshape(2, 2)


@dataclass
class SwarmBelief:
    estimates: list[PositionEstimate]
    timestamp: float = 0.0

    def __len__(self) -> int:
        return len(self.estimates)

    @property
    def means(self) -> np.ndarray:
        return np.array([e.mean for e in self.estimates]).reshape(-1, 3)

    @property
    def covariances(self) -> np.ndarray:
        return np.array([e.covariance for e in self.estimates]).reshape(-1, 3, 3)

    @property
    def attitudes(self) -> np.ndarray:
        """``(K, 2)`` array of estimated (yaw, pitch)."""
        return np.array([(e.attitude.yaw, e.attitude.pitch) for e in self.estimates]).reshape(-1, 2)

    @property
    def attitude_covariances(self) -> np.ndarray:
        return np.array([e.attitude_covariance for e in self.estimates]).reshape(-1, 2, 2)

    def validate(self) -> None:
        for k, e in enumerate(self.estimates):
            check_psd(e.covariance, f"position covariance of UAV {k}")
            check_psd(e.attitude_covariance, f"attitude covariance of UAV {k}")

    @classmethod
    def exact(cls, positions, attitudes: Sequence[Attitude] | None = None, timestamp: float = 0.0):
        """Zero-uncertainty belief at the given positions."""
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        if attitudes is None:
            attitudes = [Attitude() for _ in positions]
        return cls([PositionEstimate(p, np.zeros((3, 3)), a) for p, a in zip(positions, attitudes)], timestamp)


def sample_swarm(belief: SwarmBelief, rng_seed, n_samples: int | None = None) -> np.ndarray:
    """Independent Gaussian draws of every UAV's true position.

    Returns ``(K, 3)`` for a single draw or ``(n_samples, K, 3)``.
    """
    belief.validate()
    rng = np.random.default_rng(rng_seed)
    means = belief.means
    chol = sqrt_factor(belief.covariances)
    shape = (1 if n_samples is None else n_samples, len(means), 3)
    z = rng.standard_normal(shape)
    draws = means + np.einsum("kij,nkj->nki", chol, z)
    # degenerate beliefs reproduce the means bit for bit
    draws = np.where(np.all(belief.covariances == 0, axis=(1, 2))[None, :, None], means, draws)
    return draws[0] if n_samples is None else draws


def sample_attitudes(belief: SwarmBelief, rng_seed, n_samples: int) -> np.ndarray:
    """``(n_samples, K, 2)`` Gaussian draws of (yaw, pitch) around the estimates."""
    rng = np.random.default_rng(rng_seed)
    mean = belief.attitudes
    chol = sqrt_factor(belief.attitude_covariances)
    z = rng.standard_normal((n_samples, len(mean), 2))
    draws = mean + np.einsum("kij,nkj->nki", chol, z)
    return np.where(np.all(belief.attitude_covariances == 0, axis=(1, 2))[None, :, None], mean, draws)


class LinkProbability(NamedTuple):
    probability: float
    std_error: float


def link_existence_probability(
    belief: SwarmBelief, i: int, j: int, max_distance: float, n_samples: int = 1000, rng_seed=0
) -> LinkProbability:
    """Monte Carlo estimate of ``P(||x_i - x_j|| <= D)``.

    The displacement is Gaussian with mean ``mean_i - mean_j`` and covariance
    ``Sigma_i + Sigma_j``; the result is the fraction of draws inside the ball.
    """
    if i == j:
        raise ValueError("link existence probability needs two distinct UAVs")
    if max_distance <= 0:
        raise ValueError("maximum link distance must be positive")
    if n_samples < 1:
        raise ValueError("need at least one Monte Carlo sample")
    ei, ej = belief.estimates[i], belief.estimates[j]
    mean = ei.mean - ej.mean
    cov = check_psd(ei.covariance) + check_psd(ej.covariance)
    if not cov.any():
        return LinkProbability(float(np.linalg.norm(mean) <= max_distance), 0.0)
    rng = np.random.default_rng(rng_seed)
    draws = mean + rng.standard_normal((n_samples, 3)) @ sqrt_factor(cov).T
    inside = np.linalg.norm(draws, axis=1) <= max_distance
    p = float(inside.mean())
    return LinkProbability(p, float(np.sqrt(p * (1.0 - p) / n_samples)))


class LogLinkProbability(NamedTuple):
    """Natural logs of ``P(||dx|| <= D)`` and of its complement."""

    log_inside: float
    log_outside: float


def _log_upper_tail(v: float, g: float) -> float:
    # log( Phi_c(v) + phi(v) * g ), computed through the Mills ratio so that
    # far tails do not underflow; falls back to the Gaussian tail if the
    # correction overshoots.
    mills = np.sqrt(np.pi / 2.0) * special.erfcx(v / np.sqrt(2.0))
    inner = mills + g
    log_phi = -0.5 * v * v - 0.5 * np.log(2.0 * np.pi)
    if inner > 0:
        return float(log_phi + np.log(inner))
    return float(special.log_ndtr(-v))


def log_link_probability(mean, cov, max_distance: float) -> LogLinkProbability:
    """Deterministic log-probability that ``dx ~ N(mean, cov)`` lies in the
    ball of radius ``max_distance``.

    ``||dx||^2`` is a weighted sum of noncentral chi-square terms; its tails
    come from a Lugannani-Rice saddlepoint approximation, which stays
    accurate (relative to the log) far beyond the range where Monte Carlo
    sees any outage at all. Use it when probabilities that are all close to
    one still have to be ranked.
    """
    mean = np.asarray(mean, dtype=float).reshape(3)
    cov = check_psd(np.asarray(cov, dtype=float).reshape(3, 3))
    if max_distance <= 0:
        raise ValueError("maximum link distance must be positive")
    x = float(max_distance) ** 2
    lam, vec = np.linalg.eigh(0.5 * (cov + cov.T))
    proj = vec.T @ mean
    live = lam > 1e-12 * max(float(lam.max()), 1e-300)
    const = float(np.sum(proj[~live] ** 2))
    lam = lam[live]
    nc = proj[live] ** 2 / lam if lam.size else lam  # noncentrality per axis
    if lam.size == 0 or const > x:
        inside = float(np.dot(mean, mean)) <= x
        return LogLinkProbability(0.0 if inside else -np.inf, -np.inf if inside else 0.0)

    def cgf(t, order):
        s = 1.0 - 2.0 * t * lam
        if order == 0:
            return const * t + float(np.sum(-0.5 * np.log(s) + lam * nc * t / s))
        if order == 1:
            return const + float(np.sum(lam / s + lam * nc / s**2))
        return float(np.sum(2.0 * lam**2 / s**2 + 4.0 * lam**2 * nc / s**3))

    t_max = 1.0 / (2.0 * lam.max())
    mean_sq = cgf(0.0, 1)
    if abs(x - mean_sq) <= 1e-9 * x:
        t_hat = 0.0
    elif x > mean_sq:
        hi = t_max * (1.0 - 1e-15)
        t_hat = optimize.brentq(lambda t: cgf(t, 1) - x, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    else:
        lo = -1.0 / lam.max()
        while cgf(lo, 1) > x:
            lo *= 2.0
        t_hat = optimize.brentq(lambda t: cgf(t, 1) - x, lo, 0.0, xtol=1e-300, rtol=1e-15, maxiter=500)
    k2 = cgf(t_hat, 2)
    w2 = 2.0 * (t_hat * x - cgf(t_hat, 0))
    if abs(t_hat) * np.sqrt(k2) < 1e-6 or w2 <= 0:
        # at the mean: second-order expansion of the tail around one half
        k3 = float(np.sum(8.0 * lam**3 * (1.0 + 3.0 * nc)))
        q = 0.5 - k3 / (6.0 * np.sqrt(2.0 * np.pi) * k2**1.5)
        return LogLinkProbability(float(np.log1p(-q)), float(np.log(q)))
    w = np.sign(t_hat) * np.sqrt(w2)
    u = t_hat * np.sqrt(k2)
    g = 1.0 / u - 1.0 / w
    if w > 0:
        log_out = min(_log_upper_tail(w, g), 0.0)
        return LogLinkProbability(float(_log1mexp(log_out)), log_out)
    log_in = min(_log_upper_tail(-w, -g), 0.0)
    return LogLinkProbability(log_in, float(_log1mexp(log_in)))


def _log1mexp(a: float) -> float:
    """``log(1 - exp(a))`` for ``a <= 0``."""
    if a == -np.inf:
        return 0.0
    if a > -np.log(2.0):
        return float(np.log(-np.expm1(a)))
    return float(np.log1p(-np.exp(a)))

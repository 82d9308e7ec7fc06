"""Monte Carlo outage probabilities over i.i.d. Rayleigh MIMO hops.

Channel draws come from a counter-based generator (Philox) keyed by the
seed, with a fixed number of random words per sample. Sample ``i`` is
therefore a function of ``(seed, i)`` alone, and splitting the index range
across workers never changes an estimate.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from relaydmt.curves import AntennaConfig
from relaydmt.protocols import max_multiplexing, vdf_allocation
from relaydmt.stats import wilson_interval

__all__ = [
    "ChannelSample",
    "OutageEstimate",
    "OutageSpec",
    "channel_block",
    "cutset_capacity",
    "estimate_outage",
    "estimate_outage_curve",
    "hop_capacity",
    "outage_event",
    "sample_channel",
]

SIM_PROTOCOLS = ("full_duplex", "fdf", "vdf", "ddf", "cutset")
MIN_SAMPLES = 10_000
CHUNK = 1 << 16

_TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class ChannelSample:
    h1: np.ndarray  # M2 x M1
    h2: np.ndarray  # M3 x M2


def _words_per_sample(config: AntennaConfig) -> int:
    n = config.m2 * config.m1 + config.m3 * config.m2
    # two uniforms per complex entry, padded to whole Philox blocks
    return 4 * math.ceil(2 * n / 4)


def channel_block(config: AntennaConfig, seed: int, start: int, stop: int):
    """Channels for sample indices ``start..stop-1``.

    Returns ``(h1, h2)`` with shapes ``(n, M2, M1)`` and ``(n, M3, M2)``.
    Each entry is ``sqrt(-ln u1) * exp(2 pi i u2)`` with independent
    uniforms, which is exactly CN(0, 1).
    """
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    if not 0 <= start <= stop:
        raise ValueError("need 0 <= start <= stop")
    w = _words_per_sample(config)
    bg = np.random.Philox(key=seed)
    bg.advance(start * w // 4)
    raw = bg.random_raw((stop - start) * w).reshape(stop - start, w)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    n1 = config.m2 * config.m1
    n2 = config.m3 * config.m2
    u1 = u[:, 0 : 2 * (n1 + n2) : 2]
    u2 = u[:, 1 : 2 * (n1 + n2) : 2]
    h = np.sqrt(-np.log(u1)) * np.exp(1j * _TWO_PI * u2)
    h1 = h[:, :n1].reshape(-1, config.m2, config.m1)
    h2 = h[:, n1:].reshape(-1, config.m3, config.m2)
    return h1, h2


def sample_channel(config: AntennaConfig, seed: int, index: int) -> ChannelSample:
    h1, h2 = channel_block(config, seed, index, index + 1)
    return ChannelSample(h1[0], h2[0])


def _gram(h: np.ndarray) -> np.ndarray:
    # the smaller of H H^H and H^H H; both give the same determinant
    rows, cols = h.shape[-2:]
    hc = np.conj(np.swapaxes(h, -1, -2))
    return h @ hc if rows <= cols else hc @ h


def _logdet2_identity_plus(g: np.ndarray, scale: float) -> np.ndarray:
    k = g.shape[-1]
    if k == 1:
        return np.log1p(scale * g[..., 0, 0].real) / math.log(2)
    m = np.eye(k) + scale * g
    chol = np.linalg.cholesky(m)
    diag = np.diagonal(chol, axis1=-2, axis2=-1).real
    return 2 * np.log2(diag).sum(axis=-1)


def hop_capacity(h, snr: float, m_tx: int):
    """``log2 det(I + (snr / m_tx) H H^H)`` in bits per channel use.

    ``h`` may be a single matrix or a stack with matrices in the last two
    axes. The determinant comes from a Cholesky factor of the
    positive-definite matrix.
    """
    h = np.asarray(h)
    if h.ndim < 2:
        raise ValueError("channel must be a matrix or a stack of matrices")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel has non-finite entries")
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    out = _logdet2_identity_plus(_gram(h), snr / m_tx)
    return float(out) if np.ndim(out) == 0 else out


def cutset_capacity(h, snr: float):
    """``log2 det(I + snr H H^H)``; the cut-set bound drops the per-antenna power split."""
    return hop_capacity(h, snr, 1)


@dataclass(frozen=True)
class OutageSpec:
    """A simulatable outage event.

    ``r`` sets the rate ``r log2 SNR``; ``rate`` overrides it with a fixed
    number of bits per channel use. ``a`` is the fDF time allocation.
    """

    config: AntennaConfig
    protocol: str
    r: float = 0.0
    a: float | None = None
    rate: float | None = None
    alloc: float | None = field(default=None, init=False, compare=False)

    def __post_init__(self):
        if self.protocol not in SIM_PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}; expected one of {SIM_PROTOCOLS}")
        if self.r < 0:
            raise ValueError("multiplexing gain must be nonnegative")
        if self.rate is not None and self.rate < 0:
            raise ValueError("rate must be nonnegative")
        if self.protocol == "fdf":
            if self.a is None or not 0 < self.a < 1:
                raise ValueError("fdf needs a time allocation a in (0, 1)")
            object.__setattr__(self, "alloc", float(self.a))
        elif self.protocol == "vdf":
            # high-SNR optimal allocation, used as-is at finite SNR
            object.__setattr__(self, "alloc", vdf_allocation(self.config, self.r))

    def rate_bits(self, snr_db: float) -> float:
        if self.rate is not None:
            return float(self.rate)
        return self.r * math.log2(10 ** (snr_db / 10))

    def to_dict(self) -> dict:
        c = self.config
        return {
            "M1": c.m1,
            "M2": c.m2,
            "M3": c.m3,
            "protocol": self.protocol,
            "r": self.r,
            "a": self.alloc,
            "rate": self.rate,
        }


def outage_event(spec: OutageSpec, c1, c2, rate):
    """Whether the target rate is in outage given the two hop capacities.

    For ``cutset`` the capacities must be the cut-set ones
    (:func:`cutset_capacity`). Works elementwise on arrays.
    """
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    if np.any(c1 < 0) or np.any(c2 < 0):
        raise ValueError("capacities must be nonnegative")
    p = spec.protocol
    if p == "full_duplex":
        out = rate > np.minimum(c1, c2)
    elif p in ("fdf", "vdf"):
        a = spec.alloc
        out = rate > np.minimum(a * c1, (1 - a) * c2)
    else:
        total = c1 + c2
        with np.errstate(divide="ignore", invalid="ignore"):
            harm = np.where(total > 0, c1 * c2 / total, 0.0)
        # zero capacity on either hop is an outage for any positive rate
        out = rate >= harm if p == "ddf" else rate > harm
    return bool(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OutageEstimate:
    spec: OutageSpec
    snr_db: float
    n_samples: int
    outages: int
    seed: int

    @property
    def p_hat(self) -> float:
        return self.outages / self.n_samples

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.outages, self.n_samples)

    def to_dict(self) -> dict:
        lo, hi = self.ci
        return {
            "spec": self.spec.to_dict(),
            "snr_db": self.snr_db,
            "n_samples": self.n_samples,
            "outages": self.outages,
            "p_hat": self.p_hat,
            "ci_low": lo,
            "ci_high": hi,
            "seed": self.seed,
        }


def _count_chunk(spec: OutageSpec, snrs_db, seed: int, start: int, stop: int) -> list[int]:
    h1, h2 = channel_block(spec.config, seed, start, stop)
    c = spec.config
    g1, g2 = _gram(h1), _gram(h2)
    counts = []
    for snr_db in snrs_db:
        snr = 10 ** (snr_db / 10)
        if spec.protocol == "cutset":
            c1 = _logdet2_identity_plus(g1, snr)
            c2 = _logdet2_identity_plus(g2, snr)
        else:
            c1 = _logdet2_identity_plus(g1, snr / c.m1)
            c2 = _logdet2_identity_plus(g2, snr / c.m2)
        counts.append(int(np.count_nonzero(outage_event(spec, c1, c2, spec.rate_bits(snr_db)))))
    return counts


def _default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def estimate_outage_curve(
    spec: OutageSpec,
    snr_grid_db,
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> list[OutageEstimate]:
    """Outage estimates on a grid of SNRs.

    Every SNR point sees the same channel draws (indices ``0..n-1``), so the
    result at each point equals a separate :func:`estimate_outage` call.
    Counts are integers, so the sum does not depend on how chunks are
    distributed over ``workers`` threads.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}, got {n_samples}")
    snrs = [float(s) for s in snr_grid_db]
    bounds = [(s, min(s + CHUNK, n_samples)) for s in range(0, n_samples, CHUNK)]
    workers = workers or _default_workers()
    if workers == 1:
        parts = [_count_chunk(spec, snrs, seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _count_chunk(spec, snrs, seed, *ab), bounds))
    totals = [sum(p[k] for p in parts) for k in range(len(snrs))]
    return [OutageEstimate(spec, s, n_samples, k, seed) for s, k in zip(snrs, totals)]


def estimate_outage(
    spec: OutageSpec,
    snr_db: float,
    n_samples: int,
    seed: int,
    workers: int | None = None,
) -> OutageEstimate:
    """Empirical outage probability at one SNR with a 95% Wilson interval."""
    return estimate_outage_curve(spec, [snr_db], n_samples, seed, workers)[0]


def beyond_dof(spec: OutageSpec) -> bool:
    """True when ``r`` exceeds the half-duplex degrees of freedom."""
    return spec.rate is None and spec.r > float(max_multiplexing(spec.config))

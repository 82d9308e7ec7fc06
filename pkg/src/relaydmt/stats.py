"""Binomial confidence intervals and high-SNR diversity slope fitting."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from statistics import NormalDist

import numpy as np
from scipy import stats

__all__ = ["SlopeFit", "fit_diversity", "wilson_interval"]

MIN_OUTAGE_EVENTS = 100


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


@dataclass
class SlopeFit:
    """Least-squares diversity slope of ``-log10 P`` against ``log10 SNR``.

    ``outage_estimates`` holds ``(p_hat, ci_low, ci_high, n_samples)`` per
    grid point; ``used`` flags the points that entered the regression.
    """

    snr_grid_db: list[float]
    outage_estimates: list[tuple[float, float, float, int]]
    slope: float
    slope_stderr: float
    intercept: float = 0.0
    used: list[bool] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def fit_diversity(points, min_events: int = MIN_OUTAGE_EVENTS) -> SlopeFit:
    """Fit the diversity slope to outage estimates.

    Parameters
    ----------
    points : sequence
        Either ``(snr_db, p)`` pairs, which are all trusted, or
        ``(snr_db, p, outages, n_samples)`` tuples, in which case points
        with fewer than ``min_events`` outages are dropped.

    Raises
    ------
    ValueError
        If fewer than three reliable points remain.
    """
    snr, est, used = [], [], []
    for pt in points:
        if len(pt) == 2:
            s, p = pt
            k = n = None
            ok = p > 0
            lo = hi = float(p)
        else:
            s, p, k, n = pt
            ok = p > 0 and k >= min_events
            lo, hi = wilson_interval(int(k), int(n))
        snr.append(float(s))
        est.append((float(p), lo, hi, int(n) if n is not None else 0))
        used.append(bool(ok))
    x = np.array([s / 10 for s, u in zip(snr, used) if u])
    y = np.array([-math.log10(e[0]) for e, u in zip(est, used) if u])
    if len(x) < 3:
        raise ValueError(f"need at least 3 reliable points for a slope fit, got {len(x)}")
    res = stats.linregress(x, y)
    return SlopeFit(
        snr_grid_db=snr,
        outage_estimates=est,
        slope=float(res.slope),
        slope_stderr=float(res.stderr),
        intercept=float(res.intercept),
        used=used,
    )

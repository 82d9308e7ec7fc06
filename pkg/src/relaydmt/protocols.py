"""DMT of full-duplex DF, static half-duplex DF (fixed and variable time
allocation) and dynamic DF over an (M1, M2, M3) multi-hop relay channel.

Curves for the piecewise-linear protocols are returned as exact
:class:`~relaydmt.curves.Polyline` objects. vDF and DDF are not
piecewise-linear and are evaluated pointwise in floating point.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from relaydmt.curves import AntennaConfig, Polyline, pointwise_min, pp_dmt, scale_arg, to_fraction

__all__ = [
    "PROTOCOLS",
    "ddf_closed_form_222",
    "ddf_closed_form_miso",
    "ddf_dmt",
    "fdf_dmt",
    "full_duplex_dmt",
    "golden_section_min",
    "hop_curves",
    "max_diversity",
    "max_multiplexing",
    "protocol_value",
    "vdf_allocation",
    "vdf_allocation_closed_form",
    "vdf_dmt",
]

PROTOCOLS = ("full_duplex", "fdf", "vdf", "ddf")

VDF_RESIDUAL_TOL = 1e-9
CLOSED_FORM_ROOT_TOL = 1e-6
DDF_GRID_STEP = 1e-4

_INV_PHI = (math.sqrt(5) - 1) / 2


def hop_curves(config: AntennaConfig) -> tuple[Polyline, Polyline]:
    """Point-to-point DMT of the source-relay and relay-destination links."""
    return pp_dmt(config.m1, config.m2), pp_dmt(config.m2, config.m3)


def max_multiplexing(config: AntennaConfig) -> Fraction:
    """Degrees of freedom ``M1* M2* / (M1* + M2*)`` of the half-duplex channel."""
    a, b = config.m1_star, config.m2_star
    return Fraction(a * b, a + b)


def max_diversity(config: AntennaConfig) -> int:
    return config.m2 * min(config.m1, config.m3)


def full_duplex_dmt(config: AntennaConfig) -> Polyline:
    d1, d2 = hop_curves(config)
    return pointwise_min(d1, d2)


def fdf_dmt(config: AntennaConfig, a) -> Polyline:
    """DMT of DF with the source transmitting over a fixed fraction ``a`` of the block."""
    a = to_fraction(a)
    if not 0 < a < 1:
        raise ValueError(f"time allocation must lie in (0, 1), got {a}")
    d1, d2 = hop_curves(config)
    return pointwise_min(scale_arg(d1, a), scale_arg(d2, 1 - a))


def _check_r(r) -> float:
    r = float(r)
    if not math.isfinite(r) or r < 0:
        raise ValueError(f"multiplexing gain must be a finite nonnegative number, got {r}")
    return r


def vdf_allocation(config: AntennaConfig, r) -> float:
    """Time allocation ``a(r)`` that equalizes the two hop diversities.

    Found by bisection on ``(r / M1*, 1 - r / M2*)``: the first-hop term
    ``d12(r / a)`` increases with ``a`` and the second-hop term
    ``d23(r / (1 - a))`` decreases, so their difference has a single root.
    """
    r = _check_r(r)
    rmax = max_multiplexing(config)
    if not 0 < to_fraction(r) < rmax:
        raise ValueError(f"r must lie in (0, {rmax}) for {config}, got {r}")
    d1, d2 = hop_curves(config)
    if d1 == d2:
        return 0.5

    def gap(a):
        return float(d1.sample(r / a)) - float(d2.sample(r / (1 - a)))

    lo, hi = r / config.m1_star, 1 - r / config.m2_star
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = gap(mid)
        if g == 0:
            lo = hi = mid
            break
        if g < 0:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    if abs(gap(a)) > VDF_RESIDUAL_TOL:
        raise RuntimeError(f"bisection failed to equalize hop diversities at r={r}")
    return a


def vdf_allocation_closed_form(m1: int, m3: int, r) -> float:
    """Closed-form ``a(r)`` for an ``(m1, 1, m3)`` channel.

    With ``A = m1 / m3`` and ``B = 1 - r - A (1 + r)`` the allocation solves
    ``(A - 1) a^2 + B a + A r = 0``. Both roots are tried; the one inside
    ``(0, 1)`` that actually equalizes ``m1 (1 - r/a)`` and
    ``m3 (1 - r/(1-a))`` is returned.
    """
    if m1 < 1 or m3 < 1:
        raise ValueError("antenna counts must be >= 1")
    r = _check_r(r)
    # both hops have a single degree of freedom
    if not 0 < r < 0.5:
        raise ValueError(f"r must lie in (0, 1/2), got {r}")
    if m1 == m3:
        return 0.5
    A = m1 / m3
    B = 1 - r - A * (1 + r)
    disc = B * B - 4 * A * (A - 1) * r
    if disc < 0:
        raise ValueError(f"no real time allocation at r={r}")
    sq = math.sqrt(disc)
    for root in ((-B + sq) / (2 * (A - 1)), (-B - sq) / (2 * (A - 1))):
        if 0 < root < 1:
            resid = m1 * (1 - r / root) - m3 * (1 - r / (1 - root))
            if abs(resid) <= CLOSED_FORM_ROOT_TOL:
                return root
    raise ValueError(f"no equalizing root in (0, 1) at r={r}")


def vdf_dmt(config: AntennaConfig, r) -> float:
    """Diversity of DF with the time allocation optimized for each ``r``."""
    exact = to_fraction(r)
    r = _check_r(r)
    d1, d2 = hop_curves(config)
    if r == 0:
        return float(min(d1.eval(0), d2.eval(0)))
    if exact >= max_multiplexing(config):
        return 0.0
    a = vdf_allocation(config, r)
    return float(d1.sample(r / a))


def golden_section_min(f, a: float, b: float, tol: float = 1e-12, maxiter: int = 200):
    """Golden-section search for a minimum of ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point visited, including the
    bracket ends, so a non-unimodal ``f`` still gets a sound upper bound.
    """
    best_x, best_f = (a, f(a))
    fb = f(b)
    if fb < best_f:
        best_x, best_f = b, fb
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def _ddf_boundary_cost(d1: Polyline, d2: Polyline, r: float, s1):
    # cost on the boundary s1 s2 / (s1 + s2) = r; s1 = r sends s2 to infinity
    s1 = np.asarray(s1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = np.where(s1 > r, r * s1 / (s1 - r), np.inf)
    return d1.sample(s1) + d2.sample(s2)


def ddf_dmt(config: AntennaConfig, r, grid_step: float = DDF_GRID_STEP) -> float:
    """Diversity of dynamic decode-and-forward at multiplexing gain ``r``.

    The weighted exponent sum is minimized over the closure of the DDF
    outage region. For fixed hop rates ``s1, s2`` the per-hop minimum is the
    point-to-point DMT at ``s_i``, so only a 1-D search along
    ``s1 s2 / (s1 + s2) = r`` with ``s1`` in ``[r, M1*]`` remains. The
    search evaluates a dense grid plus every kink preimage (integer ``s1``
    or integer ``s2``) and refines the best bracket by golden section.
    """
    exact = to_fraction(r)
    r = _check_r(r)
    d1, d2 = hop_curves(config)
    if r == 0:
        return float(min(d1.eval(0), d2.eval(0)))
    if exact >= max_multiplexing(config):
        return 0.0
    lo, hi = r, float(config.m1_star)
    n = int(math.ceil((hi - lo) / grid_step)) + 1
    grid = np.linspace(lo, hi, n)
    kinks = [float(k) for k in range(1, config.m1_star + 1) if lo < k < hi]
    kinks += [r * k / (k - r) for k in range(1, config.m2_star + 1) if k > r]
    kinks = [s for s in kinks if lo < s < hi]
    s1 = np.unique(np.concatenate([grid, kinks]))
    cost = _ddf_boundary_cost(d1, d2, r, s1)
    k = int(np.argmin(cost))
    best = float(cost[k])
    left, right = s1[max(k - 1, 0)], s1[min(k + 1, len(s1) - 1)]
    if right > left:
        _, refined = golden_section_min(
            lambda x: float(_ddf_boundary_cost(d1, d2, r, x)), float(left), float(right)
        )
        best = min(best, refined)
    return max(best, 0.0)


def ddf_closed_form_miso(m1: int, m3: int, r):
    """DDF diversity of an ``(m1, 1, m3)`` channel."""
    if r < 0:
        raise ValueError(f"multiplexing gain must be nonnegative, got {r}")
    if r > Fraction(1, 2):
        return 0 * r
    return min(m1, m3) * (1 - 2 * r) / (1 - r)


def ddf_closed_form_222(r):
    """Three-branch closed-form DDF diversity of the ``(2, 2, 2)`` channel."""
    if r < 0:
        raise ValueError(f"multiplexing gain must be nonnegative, got {r}")
    if r > 1:
        return 0 * r
    if r < Fraction(1, 2):
        return 2 * (4 - 5 * r) / (2 - r)
    if r < Fraction(2, 3):
        return (3 - 4 * r) / (1 - r)
    return 4 * (1 - r) / (2 - r)


def protocol_value(config: AntennaConfig, protocol: str, r, a=None) -> float:
    """Diversity of ``protocol`` at ``r`` as a float.

    ``a`` is the fixed time allocation and is required for ``fdf`` only.
    """
    if protocol == "full_duplex":
        return float(full_duplex_dmt(config).eval(r))
    if protocol == "fdf":
        if a is None:
            raise ValueError("fdf needs a time allocation a")
        return float(fdf_dmt(config, a).eval(r))
    if protocol == "vdf":
        return vdf_dmt(config, r)
    if protocol == "ddf":
        return ddf_dmt(config, r)
    raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")

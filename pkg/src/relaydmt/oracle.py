"""Brute-force search over eigenvalue exponents for the DDF diversity.

This module is a check on :func:`relaydmt.protocols.ddf_dmt` and shares
none of its structure: it never uses the point-to-point DMT curve, only the
raw weighted exponent objective and the outage constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from relaydmt.curves import AntennaConfig

__all__ = ["DdfProblem", "ExponentVector", "ddf_alpha_grid_oracle", "enumerate_hop", "hop_min_cost"]

ALPHA_MAX = 1.5
MAX_ORACLE_DIM = 6
_EPS = 1e-9


def _harmonic(s1: float, s2: float) -> float:
    return 0.0 if s1 + s2 == 0 else s1 * s2 / (s1 + s2)


@dataclass(frozen=True)
class ExponentVector:
    """Eigenvalue exponents of both hops, each sorted nonincreasing."""

    alpha1: tuple[float, ...]
    alpha2: tuple[float, ...]

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            v = tuple(float(x) for x in getattr(self, name))
            if any(x < 0 for x in v):
                raise ValueError(f"{name} has a negative exponent")
            if any(x < y for x, y in zip(v, v[1:])):
                raise ValueError(f"{name} must be nonincreasing")
            object.__setattr__(self, name, v)

    @staticmethod
    def rate_exponent(alpha) -> float:
        return float(sum(max(0.0, 1.0 - x) for x in alpha))

    @property
    def s1(self) -> float:
        return self.rate_exponent(self.alpha1)

    @property
    def s2(self) -> float:
        return self.rate_exponent(self.alpha2)


@dataclass(frozen=True)
class DdfProblem:
    """Exponent minimization instance for the DDF outage probability."""

    config: AntennaConfig
    r: float
    weights: tuple[tuple[int, ...], tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("multiplexing gain must be nonnegative")
        c = self.config
        w1 = tuple(2 * j - 1 + abs(c.m1 - c.m2) for j in range(1, c.m1_star + 1))
        w2 = tuple(2 * j - 1 + abs(c.m2 - c.m3) for j in range(1, c.m2_star + 1))
        object.__setattr__(self, "weights", (w1, w2))

    @property
    def dim(self) -> int:
        return self.config.m1_star + self.config.m2_star

    def objective(self, x: ExponentVector) -> float:
        w1, w2 = self.weights
        return float(np.dot(w1, x.alpha1) + np.dot(w2, x.alpha2))

    def in_closure(self, x: ExponentVector) -> bool:
        """Whether ``x`` lies in the closure of the outage region."""
        if len(x.alpha1) != len(self.weights[0]) or len(x.alpha2) != len(self.weights[1]):
            raise ValueError("exponent vector has the wrong dimension")
        return _harmonic(x.s1, x.s2) <= self.r + _EPS


def _ordered_indices(n_values: int, dim: int) -> np.ndarray:
    # all index tuples i_1 >= i_2 >= ... >= i_dim with entries in [0, n_values)
    rows = np.arange(n_values, dtype=np.int32)[:, None]
    for _ in range(dim - 1):
        last = rows[:, -1]
        counts = last + 1
        rep = np.repeat(rows, counts, axis=0)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        nxt = np.arange(counts.sum(), dtype=np.int32) - starts
        rows = np.column_stack([rep, nxt.astype(np.int32)])
    return rows


def enumerate_hop(weights: tuple[int, ...], grid_step: float):
    """Every ordered exponent vector of one hop on the grid.

    Exponential in ``len(weights)``; used to cross-check
    :func:`hop_min_cost` on small cases. Returns ``(s, cost)`` arrays: the
    rate exponent ``sum (1 - alpha)^+`` and the weighted exponent sum of
    each grid vector.
    """
    n_values = int(np.floor(ALPHA_MAX / grid_step + 1e-9)) + 1
    idx = _ordered_indices(n_values, len(weights))
    alpha = idx * grid_step
    s = np.clip(1.0 - alpha, 0.0, None).sum(axis=1)
    cost = alpha @ np.asarray(weights, dtype=float)
    s.setflags(write=False)
    cost.setflags(write=False)
    return s, cost


def _grid_units(grid_step: float) -> int:
    units = round(1 / grid_step)
    if abs(units * grid_step - 1) > 1e-9:
        raise ValueError(f"1 / grid_step must be an integer, got step {grid_step}")
    return units


@lru_cache(maxsize=64)
def hop_min_cost(weights: tuple[int, ...], grid_step: float) -> np.ndarray:
    """Cheapest grid exponent vector for every attainable rate exponent.

    Entry ``k`` is the minimum weighted exponent sum over ordered grid
    vectors with ``sum (1 - alpha)^+`` equal to ``k * grid_step`` (``inf``
    if unattainable). Computed by dynamic programming over the coordinates,
    carrying the last grid index for the ordering constraint; this is the
    same minimum a full enumeration would find, without materializing the
    ``O(n^dim)`` vectors.
    """
    units = _grid_units(grid_step)
    n_values = int(np.floor(ALPHA_MAX / grid_step + 1e-9)) + 1
    v = np.arange(n_values)
    contrib = np.maximum(units - v, 0)
    n_s = len(weights) * units + 1
    table = np.full((n_values, n_s), np.inf)
    table[v, contrib] = weights[0] * v * grid_step
    for w in weights[1:]:
        # alpha_j <= alpha_{j-1}: take the best previous entry with index >= v
        suffix = np.minimum.accumulate(table[::-1], axis=0)[::-1]
        nxt = np.full_like(table, np.inf)
        for i in range(n_values):
            t = contrib[i]
            nxt[i, t:] = w * i * grid_step + suffix[i, : n_s - t]
        table = nxt
    out = table.min(axis=0)
    out.setflags(write=False)
    return out


def ddf_alpha_grid_oracle(problem: DdfProblem, grid_step: float) -> float:
    """Minimum of the weighted exponent sum over grid points in the outage closure.

    The grid is ``{0, step, 2 step, ...} cap [0, 1.5]`` in every coordinate,
    restricted to nonincreasing vectors per hop. Grid points are feasible
    when ``s1 s2 / (s1 + s2) <= r``, so the result upper-bounds the true
    infimum by at most about ``grid_step * sum(weights)``. ``1 / grid_step``
    must be an integer so that ``alpha = 1`` lies on the grid.
    """
    if not 0 < grid_step <= 0.1:
        raise ValueError(f"grid_step must lie in (0, 0.1], got {grid_step}")
    if problem.dim > MAX_ORACLE_DIM:
        raise ValueError(
            f"oracle dimension {problem.dim} exceeds {MAX_ORACLE_DIM}; "
            "use it only on small antenna configurations"
        )
    r = float(problem.r)
    w1, w2 = problem.weights
    cost1 = hop_min_cost(w1, grid_step)
    cost2 = hop_min_cost(w2, grid_step)
    s1 = np.arange(len(cost1)) * grid_step
    s2 = np.arange(len(cost2)) * grid_step
    best2 = np.minimum.accumulate(cost2)  # cheapest second hop with s2 <= each level

    # with s1 <= r any second hop is feasible, and alpha2 = 0 costs nothing
    with np.errstate(divide="ignore", invalid="ignore"):
        limit = np.where(s1 > r + _EPS, r * s1 / (s1 - r), np.inf)
    pos = np.searchsorted(s2, limit + _EPS, side="right") - 1
    cheapest2 = np.where(pos >= 0, best2[np.clip(pos, 0, None)], np.inf)
    cheapest2 = np.where(np.isinf(limit), 0.0, cheapest2)
    return float(np.min(cost1 + cheapest2))

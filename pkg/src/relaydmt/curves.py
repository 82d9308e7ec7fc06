"""Exact nonincreasing piecewise-linear tradeoff curves.

A :class:`Polyline` stores its breakpoints as :class:`fractions.Fraction`
pairs so that minima of curves, argument scaling and zero crossings stay
exact. Solvers that need speed use :meth:`Polyline.sample`, which converts
to floating point at the boundary.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "AntennaConfig",
    "Polyline",
    "evaluate",
    "first_zero",
    "pointwise_min",
    "pp_dmt",
    "scale_arg",
    "to_fraction",
]


def to_fraction(x) -> Fraction:
    """Convert ``x`` to a Fraction.

    Floats go through their shortest repr, so ``0.3`` becomes ``3/10``
    rather than the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts at source, relay and destination."""

    m1: int
    m2: int
    m3: int

    def __post_init__(self):
        for name in ("m1", "m2", "m3"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def m1_star(self) -> int:
        return min(self.m1, self.m2)

    @property
    def m2_star(self) -> int:
        return min(self.m2, self.m3)

    @classmethod
    def parse(cls, text: str) -> "AntennaConfig":
        """Parse ``"M1,M2,M3"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated antenna counts, got {text!r}")
        return cls(*(int(p) for p in parts))

    def __str__(self) -> str:
        return f"({self.m1},{self.m2},{self.m3})"


class Polyline:
    """Nonincreasing piecewise-linear curve ``d(r)`` on ``r >= 0``.

    Parameters
    ----------
    breakpoints : iterable of (r, d) pairs
        Strictly increasing ``r`` starting at 0, nonincreasing ``d`` ending
        at 0. Values are converted to Fractions. Collinear interior points
        and a flat zero tail are removed, so two equal curves always have
        identical breakpoints.
    """

    __slots__ = ("_points", "_float_cache")

    def __init__(self, breakpoints: Iterable[Sequence]):
        pts = [(to_fraction(r), to_fraction(d)) for r, d in breakpoints]
        if not pts:
            raise ValueError("a Polyline needs at least one breakpoint")
        if pts[0][0] != 0:
            raise ValueError("first breakpoint must be at r = 0")
        for (r0, d0), (r1, d1) in zip(pts, pts[1:]):
            if r1 <= r0:
                raise ValueError("breakpoint r-coordinates must be strictly increasing")
            if d1 > d0:
                raise ValueError("breakpoint d-coordinates must be nonincreasing")
        if pts[-1][1] != 0:
            raise ValueError("last breakpoint must have d = 0")
        if pts[0][1] < 0:
            raise ValueError("diversity gains must be nonnegative")
        self._points = _canonical(pts)
        self._float_cache = None

    @property
    def breakpoints(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return self._points

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polyline):
            return NotImplemented
        return self._points == other._points

    def __hash__(self) -> int:
        return hash(self._points)

    def __repr__(self) -> str:
        inner = ", ".join(f"({_fmt(r)}, {_fmt(d)})" for r, d in self._points)
        return f"Polyline([{inner}])"

    def eval(self, r) -> Fraction:
        """Exact value at ``r``; zero past the last breakpoint."""
        r = to_fraction(r)
        if r < 0:
            raise ValueError(f"multiplexing gain must be nonnegative, got {r}")
        pts = self._points
        if r >= pts[-1][0]:
            return Fraction(0)
        for (r0, d0), (r1, d1) in zip(pts, pts[1:]):
            if r <= r1:
                return d0 + (d1 - d0) * (r - r0) / (r1 - r0)
        return Fraction(0)  # pragma: no cover

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Breakpoints as two float arrays."""
        if self._float_cache is None:
            rs = np.array([float(r) for r, _ in self._points])
            ds = np.array([float(d) for _, d in self._points])
            self._float_cache = (rs, ds)
        return self._float_cache

    def sample(self, r) -> np.ndarray:
        """Floating-point evaluation, vectorized over ``r``."""
        rs, ds = self.arrays()
        r = np.asarray(r, dtype=float)
        if len(rs) == 1:
            return np.zeros_like(r)
        return np.interp(r, rs, ds, right=0.0)

    def to_json(self) -> str:
        rows = [[r.numerator, r.denominator, d.numerator, d.denominator] for r, d in self._points]
        return json.dumps({"breakpoints": rows})

    @classmethod
    def from_json(cls, text: str) -> "Polyline":
        data = json.loads(text)
        return cls((Fraction(rn, rd), Fraction(dn, dd)) for rn, rd, dn, dd in data["breakpoints"])

    def to_csv(self, grid: Iterable) -> str:
        """Two-column ``r,d`` CSV sampled on ``grid``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "d"])
        for r in grid:
            writer.writerow([format(float(r), ".15g"), format(float(self.eval(r)), ".15g")])
        return buf.getvalue()


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _canonical(pts):
    # drop everything after the first zero; the curve is 0 from there on
    for k, (_, d) in enumerate(pts):
        if d == 0:
            pts = pts[: k + 1]
            break
    out = [pts[0]]
    for p in pts[1:]:
        if len(out) >= 2:
            (r0, d0), (r1, d1) = out[-2], out[-1]
            r2, d2 = p
            if (d1 - d0) * (r2 - r0) == (d2 - d0) * (r1 - r0):
                out[-1] = p
                continue
        out.append(p)
    return tuple(out)


def pp_dmt(m: int, n: int) -> Polyline:
    """Optimal DMT of an ``m x n`` point-to-point MIMO link.

    Connects the points ``(k, (m - k)(n - k))`` for ``k = 0..min(m, n)``.
    """
    if m < 1 or n < 1:
        raise ValueError(f"antenna counts must be >= 1, got ({m}, {n})")
    return Polyline((k, (m - k) * (n - k)) for k in range(min(m, n) + 1))


def evaluate(curve: Polyline, r) -> Fraction:
    return curve.eval(r)


def pointwise_min(a: Polyline, b: Polyline) -> Polyline:
    """Exact lower envelope of two curves."""
    xs = sorted({r for r, _ in a.breakpoints} | {r for r, _ in b.breakpoints})
    cuts = list(xs)
    for x0, x1 in zip(xs, xs[1:]):
        # both curves are linear on [x0, x1]; add the crossing if interior
        g0 = a.eval(x0) - b.eval(x0)
        g1 = a.eval(x1) - b.eval(x1)
        if g0 * g1 < 0:
            cuts.append(x0 + (x1 - x0) * g0 / (g0 - g1))
    cuts.sort()
    return Polyline((x, min(a.eval(x), b.eval(x))) for x in cuts)


def scale_arg(curve: Polyline, a) -> Polyline:
    """Curve ``r -> curve(r / a)`` for ``0 < a <= 1``."""
    a = to_fraction(a)
    if not 0 < a <= 1:
        raise ValueError(f"scale must lie in (0, 1], got {a}")
    return Polyline((r * a, d) for r, d in curve.breakpoints)


def first_zero(curve: Polyline) -> Fraction:
    """Smallest ``r`` where the curve reaches zero."""
    return curve.breakpoints[-1][0]

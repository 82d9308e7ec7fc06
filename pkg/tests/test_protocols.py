import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.optimize import brentq

from relaydmt.curves import AntennaConfig, first_zero, pointwise_min, pp_dmt, scale_arg
from relaydmt.oracle import DdfProblem, ddf_alpha_grid_oracle
from relaydmt.protocols import (
    ddf_closed_form_222,
    ddf_closed_form_miso,
    ddf_dmt,
    fdf_dmt,
    full_duplex_dmt,
    golden_section_min,
    max_diversity,
    max_multiplexing,
    protocol_value,
    vdf_allocation,
    vdf_allocation_closed_form,
    vdf_dmt,
)

ALL_SMALL = [AntennaConfig(*m) for m in itertools.product(range(1, 5), repeat=3)]
ORACLE_CONFIGS = [c for c in ALL_SMALL if c.m1_star + c.m2_star <= 5]


def grid(stop, step):
    n = int(round(stop / step))
    return [k * step for k in range(n + 1)]


# -- full duplex and fDF -----------------------------------------------------

@pytest.mark.parametrize(
    "cfg, expected",
    [
        ((4, 2, 3), pp_dmt(2, 3)),
        ((2, 2, 2), pp_dmt(2, 2)),
        ((1, 1, 1), pp_dmt(1, 1)),
    ],
)
def test_full_duplex(cfg, expected):
    assert full_duplex_dmt(AntennaConfig(*cfg)) == expected


def test_fdf_fig2_endpoints():
    c = fdf_dmt(AntennaConfig(4, 2, 3), 0.3)
    assert c.eval(0) == 6
    assert c.eval(F(3, 5)) == 0
    assert first_zero(c) == F(3, 5)


@pytest.mark.parametrize("cfg", ALL_SMALL[::5])
def test_fdf_half_is_doubled_argument(cfg):
    d1, d2 = pp_dmt(cfg.m1, cfg.m2), pp_dmt(cfg.m2, cfg.m3)
    c = fdf_dmt(cfg, 0.5)
    for k in range(41):
        r = F(k, 20)
        assert c.eval(r) == min(d1.eval(2 * r), d2.eval(2 * r))


@pytest.mark.parametrize("a", [0, 1, -0.2, 1.3])
def test_fdf_domain(a):
    with pytest.raises(ValueError):
        fdf_dmt(AntennaConfig(2, 2, 2), a)


@pytest.mark.parametrize("cfg", ALL_SMALL[::3])
@pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.77])
def test_fdf_first_zero(cfg, a):
    fa = F(str(a))
    assert first_zero(fdf_dmt(cfg, a)) == min(fa * cfg.m1_star, (1 - fa) * cfg.m2_star)


# -- vDF ---------------------------------------------------------------------

def equalizing_root_413(r):
    # independent oracle: root of 4(1 - r/a) - 3(1 - r/(1-a)) on the open interval
    return brentq(lambda a: 4 * (1 - r / a) - 3 * (1 - r / (1 - a)), r / 1 + 1e-12, 1 - r - 1e-12, xtol=1e-15)


def test_vdf_allocation_413():
    cfg = AntennaConfig(4, 1, 3)
    oracle = equalizing_root_413(0.25)
    assert abs(oracle - 0.43126) < 2e-5
    assert vdf_allocation(cfg, 0.25) == pytest.approx(oracle, abs=1e-9)
    assert vdf_allocation_closed_form(4, 3, 0.25) == pytest.approx(oracle, abs=1e-9)


def test_vdf_closed_form_quadratic_413():
    A, r = 4 / 3, 0.25
    B = 1 - r - A * (1 + r)
    assert B == pytest.approx(-11 / 12)
    assert B * B - 4 * A * (A - 1) * r == pytest.approx(0.3958333333, abs=1e-9)


@pytest.mark.parametrize("cfg", [(3, 1, 3), (2, 2, 2), (4, 3, 4), (1, 2, 1)])
def test_vdf_symmetric_is_half(cfg):
    c = AntennaConfig(*cfg)
    for r in grid(float(max_multiplexing(c)), 0.05)[1:-1]:
        assert vdf_allocation(c, r) == 0.5
    assert vdf_allocation_closed_form(3, 3, 0.2) == 0.5


def test_vdf_symmetric_equals_doubled_argument():
    c = AntennaConfig(3, 2, 3)
    d = pp_dmt(3, 2)
    for r in grid(1.2, 0.05):
        assert vdf_dmt(c, r) == pytest.approx(float(d.eval(2 * F(r))), abs=1e-12)


def test_vdf_allocation_approaches_zero_as_r_vanishes():
    cfg = AntennaConfig(4, 1, 3)
    small = [vdf_allocation(cfg, r) for r in (1e-2, 1e-3, 1e-4)]
    assert small[0] > small[1] > small[2]
    assert small[2] < 1e-3


@pytest.mark.parametrize("cfg", [c for c in ALL_SMALL if c.m1 != c.m3][::4])
def test_vdf_residual(cfg):
    d1, d2 = pp_dmt(cfg.m1, cfg.m2), pp_dmt(cfg.m2, cfg.m3)
    top = float(max_multiplexing(cfg))
    for r in np.linspace(0, top, 23)[1:-1]:
        a = vdf_allocation(cfg, r)
        assert abs(float(d1.sample(r / a)) - float(d2.sample(r / (1 - a)))) < 1e-9


def test_vdf_allocation_domain():
    cfg = AntennaConfig(4, 1, 3)
    for r in (0, 0.5, 0.7, -0.1):
        with pytest.raises(ValueError):
            vdf_allocation(cfg, r)
    with pytest.raises(ValueError):
        vdf_allocation_closed_form(4, 3, 0.6)


def test_vdf_dmt_values():
    cfg = AntennaConfig(4, 1, 3)
    assert vdf_dmt(cfg, 0.25) == pytest.approx(4 * (1 - 0.25 / equalizing_root_413(0.25)), abs=1e-9)
    assert vdf_dmt(cfg, 0.25) == pytest.approx(1.6813, abs=1e-4)
    for c in ALL_SMALL:
        assert vdf_dmt(c, 0) == max_diversity(c)
        assert vdf_dmt(c, max_multiplexing(c)) == 0
        assert vdf_dmt(c, float(max_multiplexing(c)) + 0.1) == 0


# -- DDF ---------------------------------------------------------------------

def test_ddf_examples():
    assert ddf_dmt(AntennaConfig(2, 2, 2), 0.25) == pytest.approx(22 / 7, abs=1e-9)
    assert ddf_dmt(AntennaConfig(4, 1, 3), 0.25) == pytest.approx(2.0, abs=1e-9)
    assert ddf_dmt(AntennaConfig(2, 2, 2), 1) == 0
    with pytest.raises(ValueError):
        ddf_dmt(AntennaConfig(2, 2, 2), -0.1)


@pytest.mark.parametrize("m1, m3", [(2, 2), (4, 3), (3, 3), (1, 1), (1, 4)])
def test_ddf_matches_miso_closed_form(m1, m3):
    cfg = AntennaConfig(m1, 1, m3)
    for r in grid(0.7, 0.01):
        assert ddf_dmt(cfg, r) == pytest.approx(ddf_closed_form_miso(m1, m3, r), abs=1e-6)


def test_ddf_222_outside_middle_branch():
    cfg = AntennaConfig(2, 2, 2)
    for r in grid(1.2, 0.01):
        if 0.5 < r < 2 / 3:
            continue
        assert ddf_dmt(cfg, r) == pytest.approx(ddf_closed_form_222(r), abs=1e-6)


def test_ddf_222_middle_branch_is_below_closed_form():
    # On (1/2, 2/3) the closed-form middle branch (3-4r)/(1-r) exceeds the exponent
    # infimum; the first branch continues to hold there. The grid oracle never
    # uses the reduction, and it lands on the first branch too.
    cfg = AntennaConfig(2, 2, 2)
    for r in (0.55, 0.58, 0.6, 0.65):
        first_branch = 2 * (4 - 5 * r) / (2 - r)
        got = ddf_dmt(cfg, r)
        assert got == pytest.approx(first_branch, abs=1e-9)
        gap = (2 * r - 1) * (2 - 3 * r) / ((2 - r) * (1 - r))
        assert gap > 0
        assert ddf_closed_form_222(r) - got == pytest.approx(gap, abs=1e-9)
        oracle = ddf_alpha_grid_oracle(DdfProblem(cfg, r), 0.005)
        assert first_branch - 1e-9 <= oracle <= first_branch + 0.05


def test_ddf_222_explicit_exponent_witness():
    # alpha1 = (0, 0), alpha2 = (1, 1/7) sits on the outage boundary at r = 0.6
    p = DdfProblem(AntennaConfig(2, 2, 2), 0.6)
    from relaydmt.oracle import ExponentVector

    x = ExponentVector((0, 0), (1, 1 / 7))
    assert p.in_closure(x)
    assert p.objective(x) == pytest.approx(10 / 7)


@pytest.mark.parametrize("cfg", ORACLE_CONFIGS)
def test_ddf_matches_alpha_grid_oracle(cfg):
    top = float(max_multiplexing(cfg))
    for r in grid(top, 0.05):
        got = ddf_dmt(cfg, r)
        oracle = ddf_alpha_grid_oracle(DdfProblem(cfg, r), 0.005)
        assert abs(got - oracle) <= 0.05, (cfg, r, got, oracle)
        # the oracle only visits feasible grid points
        assert oracle >= got - 1e-9


@pytest.mark.parametrize("cfg", ALL_SMALL)
def test_ddf_endpoints(cfg):
    assert ddf_dmt(cfg, 0) == max_diversity(cfg)
    assert ddf_dmt(cfg, max_multiplexing(cfg)) == 0
    assert abs(ddf_dmt(cfg, float(max_multiplexing(cfg)))) <= 1e-9


# -- ordering ----------------------------------------------------------------

@pytest.mark.parametrize("cfg", ALL_SMALL[::2])
def test_protocol_ordering(cfg):
    fd = full_duplex_dmt(cfg)
    fdfs = [fdf_dmt(cfg, a) for a in grid(1, 0.01)[1:-1]]
    for r in np.linspace(0, float(max_multiplexing(cfg)), 15):
        v, d = vdf_dmt(cfg, r), ddf_dmt(cfg, r)
        assert v <= d + 1e-9
        assert d <= float(fd.eval(r)) + 1e-9
        for c in fdfs:
            assert float(c.sample(r)) <= v + 1e-9


@pytest.mark.parametrize("cfg", [(4, 1, 3), (2, 2, 2), (3, 2, 4)])
def test_protocol_curves_nonincreasing(cfg):
    c = AntennaConfig(*cfg)
    rs = np.linspace(0, float(max_multiplexing(c)) + 0.2, 60)
    for p in ("vdf", "ddf"):
        vals = [protocol_value(c, p, r) for r in rs]
        assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


# -- endpoints and closed forms ---------------------------------------------

def test_max_multiplexing_and_diversity():
    assert max_multiplexing(AntennaConfig(2, 2, 2)) == 1
    assert max_multiplexing(AntennaConfig(4, 1, 3)) == F(1, 2)
    assert max_multiplexing(AntennaConfig(1, 1, 1)) == F(1, 2)
    assert max_diversity(AntennaConfig(4, 2, 3)) == 6
    assert max_diversity(AntennaConfig(2, 2, 2)) == 4
    assert max_diversity(AntennaConfig(4, 1, 3)) == 3


def test_closed_forms():
    assert ddf_closed_form_miso(4, 3, 0) == 3
    assert ddf_closed_form_miso(4, 3, 0.5) == 0
    assert ddf_closed_form_miso(2, 2, F(1, 3)) == 1
    assert ddf_closed_form_miso(2, 2, 0.9) == 0
    assert ddf_closed_form_222(0) == 4
    assert ddf_closed_form_222(F(1, 2)) == 2
    assert 2 * (4 - 5 * F(1, 2)) / (2 - F(1, 2)) == 2
    assert ddf_closed_form_222(F(2, 3)) == 1
    assert (3 - 4 * F(2, 3)) / (1 - F(2, 3)) == 1
    assert ddf_closed_form_222(1) == 0
    assert ddf_closed_form_222(1.5) == 0


def test_golden_section_finds_kink():
    x, fx = golden_section_min(lambda t: abs(t - 0.3137) + 1, 0, 1)
    assert x == pytest.approx(0.3137, abs=1e-9)
    assert fx == pytest.approx(1, abs=1e-9)


def test_scale_matches_fdf_definition():
    cfg = AntennaConfig(4, 2, 3)
    expected = pointwise_min(scale_arg(pp_dmt(4, 2), F(3, 10)), scale_arg(pp_dmt(2, 3), F(7, 10)))
    assert fdf_dmt(cfg, 0.3) == expected

import itertools

import numpy as np
import pytest

from relaydmt.curves import AntennaConfig
from relaydmt.oracle import (
    DdfProblem,
    ExponentVector,
    ddf_alpha_grid_oracle,
    enumerate_hop,
    hop_min_cost,
)


def brute_force(problem, step):
    """Literal double loop over every ordered grid vector of both hops."""
    values = np.round(np.arange(0, 1.5 + 1e-9, step), 12)

    def ordered(k):
        return [v for v in itertools.product(values, repeat=k) if all(a >= b for a, b in zip(v, v[1:]))]

    c = problem.config
    best = np.inf
    hop2 = ordered(c.m2_star)
    for a1 in ordered(c.m1_star):
        for a2 in hop2:
            x = ExponentVector(a1, a2)
            if problem.in_closure(x):
                best = min(best, problem.objective(x))
    return best


@pytest.mark.parametrize("cfg", [(1, 1, 1), (2, 1, 2), (2, 2, 2), (2, 1, 1), (1, 2, 2), (3, 2, 1)])
@pytest.mark.parametrize("r", [0.05, 0.2, 0.35, 0.6, 0.9])
def test_oracle_matches_literal_brute_force(cfg, r):
    p = DdfProblem(AntennaConfig(*cfg), r)
    assert ddf_alpha_grid_oracle(p, 0.1) == pytest.approx(brute_force(p, 0.1), abs=1e-9)


@pytest.mark.parametrize("weights", [(1,), (3,), (1, 3), (2, 4), (1, 3, 5), (3, 5, 7)])
@pytest.mark.parametrize("step", [0.1, 0.05, 0.02])
def test_dynamic_program_matches_enumeration(weights, step):
    s, cost = enumerate_hop(weights, step)
    levels = np.rint(s / step).astype(int)
    expected = np.full(len(weights) * round(1 / step) + 1, np.inf)
    np.minimum.at(expected, levels, cost)
    np.testing.assert_allclose(hop_min_cost(weights, step), expected, atol=1e-12)


def test_oracle_examples():
    assert abs(ddf_alpha_grid_oracle(DdfProblem(AntennaConfig(2, 2, 2), 0.25), 0.005) - 22 / 7) <= 0.05
    assert abs(ddf_alpha_grid_oracle(DdfProblem(AntennaConfig(1, 1, 1), 0.25), 0.001) - 2 / 3) <= 0.01
    for cfg, rmax in [((2, 2, 2), 1), ((1, 1, 1), 0.5), ((4, 1, 3), 0.5), ((3, 2, 2), 1)]:
        p = DdfProblem(AntennaConfig(*cfg), rmax)
        assert ddf_alpha_grid_oracle(p, 0.01) == 0


def test_oracle_brackets_22_7_from_above():
    # feasible grid points only, so the value cannot undercut the infimum
    v = ddf_alpha_grid_oracle(DdfProblem(AntennaConfig(2, 2, 2), 0.25), 0.005)
    assert 22 / 7 <= v <= 22 / 7 + 0.005 * 8


def test_oracle_refuses_large_or_bad_grids():
    with pytest.raises(ValueError):
        ddf_alpha_grid_oracle(DdfProblem(AntennaConfig(4, 4, 4), 0.5), 0.01)
    p = DdfProblem(AntennaConfig(1, 1, 1), 0.25)
    for step in (0, 0.2, -0.01, 0.03):
        with pytest.raises(ValueError):
            ddf_alpha_grid_oracle(p, step)


def test_problem_weights():
    p = DdfProblem(AntennaConfig(4, 2, 3), 0.3)
    assert p.weights == ((3, 5), (2, 4))
    for w in p.weights:
        assert all(a < b for a, b in zip(w, w[1:]))
    assert p.dim == 4


def test_exponent_vector():
    x = ExponentVector((1.2, 0.5), (0.3,))
    assert x.s1 == pytest.approx(0.5)
    assert x.s2 == pytest.approx(0.7)
    with pytest.raises(ValueError):
        ExponentVector((0.2, 0.5), (0,))
    with pytest.raises(ValueError):
        ExponentVector((-0.1,), (0,))
    with pytest.raises(ValueError):
        DdfProblem(AntennaConfig(1, 1, 1), 0.2).in_closure(ExponentVector((0, 0), (0,)))

"""Diversity-multiplexing tradeoff of MIMO multi-hop relay channels.

Exact piecewise-linear curve algebra, per-protocol DMT curves (full-duplex
DF, fixed and variable half-duplex DF, dynamic DF), brute-force exponent
oracles, and a Monte Carlo outage simulator with slope fitting.
"""

from relaydmt.curves import AntennaConfig, Polyline, first_zero, pointwise_min, pp_dmt, scale_arg
from relaydmt.protocols import (
    ddf_closed_form_222,
    ddf_closed_form_miso,
    ddf_dmt,
    fdf_dmt,
    full_duplex_dmt,
    max_diversity,
    max_multiplexing,
    vdf_allocation,
    vdf_allocation_closed_form,
    vdf_dmt,
)
from relaydmt.oracle import DdfProblem, ExponentVector, ddf_alpha_grid_oracle

__version__ = "0.1.0"

__all__ = [
    "AntennaConfig",
    "DdfProblem",
    "ExponentVector",
    "Polyline",
    "ddf_alpha_grid_oracle",
    "ddf_closed_form_222",
    "ddf_closed_form_miso",
    "ddf_dmt",
    "fdf_dmt",
    "first_zero",
    "full_duplex_dmt",
    "max_diversity",
    "max_multiplexing",
    "pointwise_min",
    "pp_dmt",
    "scale_arg",
    "vdf_allocation",
    "vdf_allocation_closed_form",
    "vdf_dmt",
]

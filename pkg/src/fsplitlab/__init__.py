"""Frobenius-splitting invariants of hypersurface and toric singularities."""

__version__ = "0.1.0"

from .algebra import INF, Ambient, Poly, parse_poly, power_truncated, reduce_mod_p, weighted_order
from .frobenius import (FrobeniusProfile, NotFPure, RingPresentation, ThresholdBracket, bound_check,
                        fpt_bracket, mu_e, nu_e, nu_e_ideal, splitting_profile)
from .toric import ToricCone, polytope_volume, toric_fsignature, veronese_cone
from .sweep import RingSpec, emit_report, run_sweep

__all__ = [
    "INF", "Ambient", "Poly", "parse_poly", "power_truncated", "reduce_mod_p", "weighted_order",
    "FrobeniusProfile", "NotFPure", "RingPresentation", "ThresholdBracket", "bound_check",
    "fpt_bracket", "mu_e", "nu_e", "nu_e_ideal", "splitting_profile",
    "ToricCone", "polytope_volume", "toric_fsignature", "veronese_cone",
    "RingSpec", "emit_report", "run_sweep",
]

"""Detection of a target by mobile particles in a hyperbolic random graph."""

from .config import (
    DetectionOutcome,
    ExponentFit,
    ModelParams,
    MovementMode,
    ParetoSpec,
    PolarPoint,
    RadialBarrierSpec,
    Regime,
    RegionSpec,
    SimConfig,
    TailCurve,
    TailEntry,
)
from .dynamics import simulate_detection, step_angular, step_radial
from .geometry import distance, hyperbolic_distance, in_target_ball, phi, phi_inverse
from .harness import (
    QuadratureGrid,
    aggregate_tail,
    direct_tail_mc,
    estimate_point_detection,
    fit_exponent,
    tail_curve,
)
from .regions import measure_mu_D, membership
from .sampling import sample_configuration

__all__ = [
    "DetectionOutcome",
    "ExponentFit",
    "ModelParams",
    "MovementMode",
    "ParetoSpec",
    "PolarPoint",
    "QuadratureGrid",
    "RadialBarrierSpec",
    "Regime",
    "RegionSpec",
    "SimConfig",
    "TailCurve",
    "TailEntry",
    "aggregate_tail",
    "direct_tail_mc",
    "distance",
    "estimate_point_detection",
    "fit_exponent",
    "hyperbolic_distance",
    "in_target_ball",
    "measure_mu_D",
    "membership",
    "phi",
    "phi_inverse",
    "sample_configuration",
    "simulate_detection",
    "step_angular",
    "step_radial",
    "tail_curve",
]

"""Continuation and bifurcation analysis for pulses in bistable lattices.

The package traces steady-state branches of a one-dimensional lattice with
cubic bistable on-site dynamics, classifies their global topology (closed
loops versus snaking), computes spectral stability along branches, and
analyzes the planar map whose orbits are the steady states.
"""
from .config import ExperimentConfig, config_hash, parse_config
from .continuation import (
    Branch, BranchPoint, Closed, ContinuationSettings, Event, EventKind,
    LatticeSteadyStateProblem, Open, Snaking, branch_switch, continue_branch,
)
from .lattice import Boundary, DIRICHLET_ONE, DIRICHLET_ZERO, LatticeParams, LatticeProfile
from .planar_map import (
    FixedPointInfo, ManifoldArc, ManifoldSettings, TangencyEvent,
    check_reversibility, find_tangency, fixed_point_eigen, grow_manifold,
    verify_heteroclinic_loop,
)
from .pulses import PulseSpec, build_pulse, classify_symmetry
from .stability import SpectrumSummary, annotate_branch, spectrum, unstable_count

__version__ = "0.1.0"

__all__ = [
    "Boundary", "Branch", "BranchPoint", "Closed", "ContinuationSettings",
    "DIRICHLET_ONE", "DIRICHLET_ZERO", "Event", "EventKind",
    "ExperimentConfig", "FixedPointInfo", "LatticeParams", "LatticeProfile",
    "LatticeSteadyStateProblem", "ManifoldArc", "ManifoldSettings", "Open",
    "PulseSpec", "Snaking", "SpectrumSummary", "TangencyEvent",
    "annotate_branch", "branch_switch", "build_pulse", "check_reversibility",
    "classify_symmetry", "config_hash", "continue_branch", "find_tangency",
    "fixed_point_eigen", "grow_manifold", "parse_config", "spectrum",
    "unstable_count", "verify_heteroclinic_loop", "__version__",
]

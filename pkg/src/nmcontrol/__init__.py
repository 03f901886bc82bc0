"""Backflow-as-a-resource toolkit: BLP non-Markovianity and entangling pulse
optimization for a driven two-atom leaky cavity and a spin-star system."""

__version__ = "0.1.0"

from .blp import (DistanceTrajectory, NmResult, blp_measure,
                  distance_trajectory, single_atom_distance_trajectory)
from .cavity import (CavityParams, CavityState, CavityTrajectory,
                     assemble_density, cavity_rhs, concurrence_cavity,
                     integrate_cavity, single_atom_analytic)
from .linalg import (concurrence_wootters, hermitian_expm, partial_trace,
                     pauli_on_site, state_fidelity, trace_distance)
from .optimize import (CavityControlProblem, OptimizationOutcome,
                       SpinStarControlProblem, optimize_multistart,
                       optimize_problem)
from .pulses import AddressingMode, PulseSequence, StepField, expand_addressing
from .spinstar import (SpinStarOperators, SpinStarParams, SpinStarTrajectory,
                       SymmetricSector, build_operators,
                       concurrence_trajectory, propagate_spinstar)
from .sweep import (SweepConfig, SweepRecord, load_config, run_point,
                    run_sweep, sample_point, summarize)

__all__ = [
    "AddressingMode", "CavityControlProblem", "CavityParams", "CavityState",
    "CavityTrajectory", "DistanceTrajectory", "NmResult",
    "OptimizationOutcome", "PulseSequence", "SpinStarControlProblem",
    "SpinStarOperators", "SpinStarParams", "SpinStarTrajectory", "StepField",
    "SweepConfig", "SweepRecord", "SymmetricSector", "assemble_density",
    "blp_measure", "build_operators", "cavity_rhs", "concurrence_cavity",
    "concurrence_trajectory", "concurrence_wootters", "distance_trajectory",
    "expand_addressing", "hermitian_expm", "integrate_cavity", "load_config",
    "optimize_multistart", "optimize_problem", "partial_trace",
    "pauli_on_site", "propagate_spinstar", "run_point", "run_sweep",
    "sample_point", "single_atom_analytic", "single_atom_distance_trajectory",
    "state_fidelity", "summarize", "trace_distance",
]

"""Micromaser quantum battery charged by a stream of qubit collisions."""
from .analytics import (
    TrappingSpec,
    cotangent_state,
    incoherent_purity_closed_form,
    incoherent_steady_purity,
    incoherent_steady_state,
    theta_from_m,
    trapping_condition,
)
from .collision import (
    CollisionMap,
    apply_collision,
    apply_collision_diagonal,
    apply_collision_operator_form,
    jc_collision_map,
)
from .dissipation import LindbladBands, apply_damping, build_lindblad_bands, thermal_state
from .hilbert import QubitState, build_qubit_state, resize, vacuum_state, validate
from .observables import ObservableSet, energy, ergotropy, fano, measure, population_distribution, purity
from .runner import ModelParams, RunOptions, RunOutcome, TrajectoryRecord, classify_outcome, run_protocol

__version__ = "0.1.0"

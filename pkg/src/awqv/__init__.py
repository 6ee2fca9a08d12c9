"""Adaptive weighted QITE-VQE (AWQV) and baselines for MaxCut on a dense statevector simulator."""

from .ansatz import AnsatzSpec, apply_ansatz, build_ansatz, energy_gradient
from .awqv import awqv_run, qiv_run, update_weight, WeightSchedule
from .errors import AWQVError, CapacityError, FormatError, InputError, NumericError
from .gw import gw_solve, hyperplane_round
from .metrics import approximation_ratio, expected_best_alpha, ground_state_probability
from .optimize import adam_step, gd_step, vqe_run
from .pauli import PauliString, apply_pauli, apply_pauli_rotation
from .problem import (
    MaxCutInstance,
    brute_force_spectrum,
    generate_er_weighted,
    generate_regular,
    hamiltonian_diagonal,
    maxcut_cost,
)
from .qite import assemble_system, cqite_run, exact_ite_step, qite_run, solve_step
from .statevec import plus_state, zero_plus_state

__version__ = "0.1.0"

"""Darwin and spin-orbit corrections to guided electron and photon modes.

Modules
-------
specfun
    Bessel functions used by the mode solver.
medium
    Radial profiles and particle configurations.
modesolver
    Step-profile eigenmodes: roots, normalization, radial wavefunctions.
perturb
    First- and second-order corrections and perturbation matrices.
dynamics
    Precession of two-state superpositions.
cli
    Command-line front end.
"""

__version__ = "0.1.0"

from .errors import (DomainError, IllConditionedError, InconsistentRootError, NotGuidedError,
                     NumericalError, ScopeError, ValidationError, ZitterguideError)
from .medium import (LAMBDA_C, Particle, ParticleConfig, SmoothProfile, StepProfile,
                     match_electron_to_photon, photon_for_r, ramp, smoothstep, step,
                     waveguide_parameter)
from .modesolver import ModeIndex, ModeSolution, guided_modes, lp_label, solve_mode, solve_modes
from .perturb import (Kernel, ModeBasis, ShiftBreakdown, assemble_matrix, check_conditions,
                      delta_beta_step_closed_form, diagonal_shift, matrix_element, radial_bracket,
                      second_order_shift)
from .dynamics import (BlochState, PairKind, SuperpositionSpec, beat_length, evolve_t, evolve_z,
                       mode_phase)

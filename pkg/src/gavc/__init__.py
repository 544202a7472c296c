"""Gaussian arbitrarily varying channel toolkit.

Closed-form rates, a dirty-paper parameter optimizer, a max-min solver for
rank-one MIMO jammers and a desk-scale Monte Carlo simulator.
"""

from .channel import Codebook, RotationKeySet, ScalarAvcSpec, SeededRng, haar_rotation, random_codebook
from .dpc_opt import DpcOptResult, dpc_gamma_threshold, optimize_dpc
from .errors import BracketError, DegenerateError, FeasibilityError, GavcError, ParameterError, ScheduleError
from .mimo import (
    MimoSpec,
    full_rank_rate,
    maxmin_rate_221,
    maxmin_solver_general,
    mimo_rate,
    optimal_jam_index,
    upper_bound_rate,
    waterfill,
    worst_g_oracle,
)
from .rates import (
    BroadcastSpec,
    DpcSpec,
    alpha0,
    broadcast_region,
    deterministic_capacity,
    dpc_outer_bound,
    dpc_rate,
    key_size_schedule,
    randomized_capacity,
    watermark_covertext_power,
)

__version__ = "0.1.0"

"""Constrained autobidding with group-representation targets."""

from .errors import (ConfigError, DimensionError, FairbidError, HorizonExhausted,
                     InvalidDualError, NumericalError, PreconditionError, RefusalError)
from .model import (ConstraintEvaluation, FractionalAllocation, GroupSpec, Instance,
                    IntegerAllocation, Query, check_group_membership_consistency, evaluate)
from .lp import (DualCertificate, MWConfig, MWResult, SolverBounds, ThresholdVector,
                 derive_bounds, solve_mw, solve_one_dim, thresholds, thresholds_to_bids)
from .oracle import brute_force_integer_opt, exact_lp, verify_threshold_theorem
from .rounding import (FlexibilityReport, deterministic_round, deterministic_round_group,
                       flexibility, randomized_round, repair_round_condition)

__version__ = "0.1.0"

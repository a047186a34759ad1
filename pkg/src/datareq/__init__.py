"""Predict how much training data a mode-based statistical learner needs."""

__version__ = "0.1.0"

from .bounds import (
    GApproxParams,
    choose_truncation,
    ea_g_lower_bound,
    ea_uniform,
    empty_bin_prob_bound,
    empty_bin_prob_exact,
    g_lower_bound,
    min_training_size,
    nonempty_ea_bound,
    old_overall_bound,
)
from .core_math import (
    AccuracyEstimate,
    BinTable,
    Method,
    ProblemSpec,
    bin_accuracy,
    expected_accuracy_table,
    g_exact,
    log_binomial_pmf,
    majority_win_prob,
    optimal_accuracy,
)
from .distributions import (
    BinDistribution,
    expected_relevant_instances,
    uniform_weights,
    zipf_relevant_approx,
    zipf_weights,
)
from .exceptions import DomainError, ParameterError, UnreachableTargetError, ValidationError
from .simulator import SimulationConfig, SimulationPoint, run, run_trial, theoretical_curves

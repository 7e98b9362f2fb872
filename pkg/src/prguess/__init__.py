"""Exact no-signaling guessing probabilities for n noisy PR boxes."""

from .behavior import AttackDecomposition, Behavior, apply_transform, pr_box, pr_product
from .certify import Certificate, verify_certificate, verify_sandwich, vertex_check
from .estimator import GuessingProbabilityTransformer
from .guessprob import (
    GuessingResult,
    analytic_reference,
    assemble_full,
    assemble_reduced,
    beta_bound,
    beta_bound_product,
    entropy_rates,
    guessing_probability,
    trivial_bounds,
)
from .lp import LpProblem, LpSolution, LpStatus, solve
from .nosig import ConstraintSystem, ScenarioKind, normalization_rows, scenario_rows
from .numeric import Mode, format_scalar, parse_scalar

__version__ = "0.1.0"

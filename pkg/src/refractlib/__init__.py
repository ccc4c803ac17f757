"""Parisian ruin probabilities for refracted spectrally negative Levy risk processes."""

__version__ = "0.1.0"

# Export the public API so users can import directly from refractlib
from .config_node import ConfigNode, ConfigNodeType
from .config_parser import ConfigParser, ConfigParserError, ConfigSyntaxError
from .formatters import format_csv, format_errors, format_json
from .levy_model import (
    BrownianRisk, CramerLundbergExp, JumpDiffusionPhaseType, ModelKind, RefractedModel, StableThreeHalves,
    laplace_exponent, laplace_exponent_derivative, mean_at_one, net_profit_margin, phi_inverse, varphi_inverse
)
from .monte_carlo import Functional, McConfig, McEstimate, simulate_functional, simulate_parisian
from .parisian_ruin import (
    ParisianQuery, RuinMethod, RuinResult, classical_ruin_u, classical_ruin_x, classical_ruin_y,
    closed_form_parisian, exit_up_before_parisian, first_passage_up_u, lemma_E_L1, lemma_E_L2, lemma_E_L3,
    unrefracted_parisian, overshoot_laplace_y, parisian_laplace, parisian_laplace_to_barrier, parisian_ruin_prob,
    tau_up_within_r
)
from .positive_law import PositiveLaw, build_law, exp_kernel_identity_check, first_moment, weighted_integral
from .refract_errors import NumericError, RefractError, UnsupportedOperationError, ValidationError
from .scale_functions import (
    KernelMethod, ScaleContext, kernel_H, kernel_H_delta, kernel_W, kernel_W_delta, refracted_w, scale_context,
    scale_w, scale_w_prime, scale_w_y, scale_w_y_prime, scale_z, scale_z_y
)

# List what should be available when using `from refractlib import *`
__all__ = [
    "BrownianRisk",
    "ConfigNode",
    "ConfigNodeType",
    "ConfigParser",
    "ConfigParserError",
    "ConfigSyntaxError",
    "CramerLundbergExp",
    "Functional",
    "JumpDiffusionPhaseType",
    "KernelMethod",
    "McConfig",
    "McEstimate",
    "ModelKind",
    "NumericError",
    "ParisianQuery",
    "PositiveLaw",
    "RefractError",
    "RefractedModel",
    "RuinMethod",
    "RuinResult",
    "ScaleContext",
    "StableThreeHalves",
    "UnsupportedOperationError",
    "ValidationError",
    "build_law",
    "classical_ruin_u",
    "classical_ruin_x",
    "classical_ruin_y",
    "closed_form_parisian",
    "exit_up_before_parisian",
    "exp_kernel_identity_check",
    "first_moment",
    "first_passage_up_u",
    "format_csv",
    "format_errors",
    "format_json",
    "kernel_H",
    "kernel_H_delta",
    "kernel_W",
    "kernel_W_delta",
    "laplace_exponent",
    "laplace_exponent_derivative",
    "lemma_E_L1",
    "lemma_E_L2",
    "lemma_E_L3",
    "unrefracted_parisian",
    "mean_at_one",
    "net_profit_margin",
    "overshoot_laplace_y",
    "parisian_laplace",
    "parisian_laplace_to_barrier",
    "parisian_ruin_prob",
    "phi_inverse",
    "refracted_w",
    "scale_context",
    "scale_w",
    "scale_w_prime",
    "scale_w_y",
    "scale_w_y_prime",
    "scale_z",
    "scale_z_y",
    "simulate_functional",
    "simulate_parisian",
    "tau_up_within_r",
    "varphi_inverse",
    "weighted_integral"
]

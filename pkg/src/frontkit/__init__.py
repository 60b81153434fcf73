"""frontkit: traveling-wave solver and verification toolkit for delayed
reaction-diffusion competition systems."""

__version__ = "0.1.0"

from .kernels import DelayKernel
from .models import (LotkaVolterraModel, NicholsonModel, ZouModel,
                     lipschitz_beta, nicholson_f, nicholson_square,
                     positive_equilibrium, reaction_eval, weak_coupling_check)
from .bounds import build_bounds, decay_rates, select_eta, select_q, verify_bound_inequalities
from .greens import exponents, green_apply
from .waves import (SolveOptions, WaveProfile, apply_operator, normalize_phase,
                    residual, solve_wave, tail_ratio)
from .rectangles import (lv_family, nicholson_family, zou_family,
                         limit_verdict, verify_strict_contraction)
from .pdesim import advection_check, nonexistence_probe, simulate, spreading_speed
from .critical import ScalarCriticalSpec, critical_wave

__all__ = [
    "DelayKernel",
    "LotkaVolterraModel", "NicholsonModel", "ZouModel",
    "lipschitz_beta", "nicholson_f", "nicholson_square",
    "positive_equilibrium", "reaction_eval", "weak_coupling_check",
    "build_bounds", "decay_rates", "select_eta", "select_q",
    "verify_bound_inequalities",
    "exponents", "green_apply",
    "SolveOptions", "WaveProfile", "apply_operator", "normalize_phase",
    "residual", "solve_wave", "tail_ratio",
    "lv_family", "nicholson_family", "zou_family",
    "limit_verdict", "verify_strict_contraction",
    "advection_check", "nonexistence_probe", "simulate", "spreading_speed",
    "ScalarCriticalSpec", "critical_wave",
    "__version__",
]

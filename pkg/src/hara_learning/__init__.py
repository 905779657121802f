"""Optimal HARA portfolios when the market price of risk is learned from prices."""

from .bayes_filter import FilterState, filter_state, log_F, posterior_density, theta_hat, theta_var
from .config import RunConfig
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    HaraError,
    IntegrandError,
    PriorError,
    QuadratureError,
)
from .numerics import DEFAULT_QUAD, QuadConfig
from .policy import (
    EvalPoint,
    Exp,
    Log,
    MarketParams,
    PolicyReport,
    Power,
    gamma_sweep,
    h_value,
    learning_factor,
    pi_hat,
    pi_merton,
    pi_myopic,
    policy_report,
    value_function,
)
from .prior import Prior, SignClass, integrate, sign_class, support_bounds
from .simulator import SimConfig, SimReport, Strategy, filter_sde_check, filter_sde_convergence, simulate

__all__ = [
    "DEFAULT_QUAD",
    "ConfigError",
    "DivergenceError",
    "DomainError",
    "EvalPoint",
    "Exp",
    "FilterState",
    "HaraError",
    "IntegrandError",
    "Log",
    "MarketParams",
    "PolicyReport",
    "Power",
    "Prior",
    "PriorError",
    "QuadConfig",
    "QuadratureError",
    "RunConfig",
    "SignClass",
    "SimConfig",
    "SimReport",
    "Strategy",
    "filter_sde_check",
    "filter_sde_convergence",
    "filter_state",
    "gamma_sweep",
    "h_value",
    "integrate",
    "learning_factor",
    "log_F",
    "pi_hat",
    "pi_merton",
    "pi_myopic",
    "policy_report",
    "posterior_density",
    "sign_class",
    "simulate",
    "support_bounds",
    "theta_hat",
    "theta_var",
    "value_function",
]

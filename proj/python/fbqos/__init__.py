"""Finite-blocklength effective capacity, QoS exponents and queue simulation."""

from ._core import (
    ArrivalProcess,
    ChannelModel,
    CodeParams,
    DomainError,
    NumericError,
    PowerPolicy,
    PreconditionError,
    Service,
    dispersion,
    effective_capacity,
    ec_laplace_truncated,
    empirical_slope,
    epsilon_chi_bound,
    normal_approx_rate,
    optimal_received_snr,
    rate_function,
    simulate,
    solve_qos_exponent,
    solve_x_star,
    specfun,
    theoretical_slope,
)

__all__ = [
    "ArrivalProcess",
    "ChannelModel",
    "CodeParams",
    "DomainError",
    "NumericError",
    "PowerPolicy",
    "PreconditionError",
    "Service",
    "dispersion",
    "effective_capacity",
    "ec_laplace_truncated",
    "empirical_slope",
    "epsilon_chi_bound",
    "normal_approx_rate",
    "optimal_received_snr",
    "rate_function",
    "simulate",
    "solve_qos_exponent",
    "solve_x_star",
    "specfun",
    "theoretical_slope",
]

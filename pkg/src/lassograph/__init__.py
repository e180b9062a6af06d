"""Quantum scattering on a magnetic loop-plus-lead graph and general metric graphs."""

from .core import (
    DECOUPLED,
    BoundState,
    LassoParams,
    Momentum,
    ResolventKernelValue,
    decoupled_kernel,
    delta_denominator,
    krein_coefficients,
    negative_bound_states,
    phase_shift,
    positive_bound_states,
    reflection,
    resolvent_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "DECOUPLED",
    "BoundState",
    "LassoParams",
    "Momentum",
    "ResolventKernelValue",
    "decoupled_kernel",
    "delta_denominator",
    "krein_coefficients",
    "negative_bound_states",
    "phase_shift",
    "positive_bound_states",
    "reflection",
    "resolvent_kernel",
    "__version__",
]

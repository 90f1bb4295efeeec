"""Human-robot force interaction toolkit (Python bindings)."""

from ._core import (
    BiasParameters,
    CohortConfig,
    DegenerateError,
    DivergenceError,
    FitResult,
    FitStatus,
    SchemaError,
    bias,
    delta_v_closed_form,
    delta_v_direct,
    estimate_unstable_region,
    evaluation_value,
    fit_power_law,
    implicit_equilibrium,
    implicit_gain,
    reproduce,
    rmse,
    run_cohort,
    servo,
    simulate,
    stats,
    step,
    variable_gain,
)

__all__ = [
    "BiasParameters",
    "CohortConfig",
    "DegenerateError",
    "DivergenceError",
    "FitResult",
    "FitStatus",
    "SchemaError",
    "bias",
    "delta_v_closed_form",
    "delta_v_direct",
    "estimate_unstable_region",
    "evaluation_value",
    "fit_power_law",
    "implicit_equilibrium",
    "implicit_gain",
    "reproduce",
    "rmse",
    "run_cohort",
    "servo",
    "simulate",
    "stats",
    "step",
    "variable_gain",
]

"""Anchor regression for distributionally robust detection and attribution."""

from ._core import (
    AnchordaError,
    LinearModel,
    anchor_objective,
    anchor_transform,
    detect,
    fit_anchor,
    fit_ridge,
    grouped_kfold,
    metrics,
    predict,
    project,
    residual_diagnostics,
    run_cli,
    simulate,
    split_models,
    worst_case_risk,
)

__version__ = "0.1.0"

__all__ = [
    "AnchordaError",
    "LinearModel",
    "anchor_objective",
    "anchor_transform",
    "detect",
    "fit_anchor",
    "fit_ridge",
    "grouped_kfold",
    "metrics",
    "predict",
    "project",
    "residual_diagnostics",
    "run_cli",
    "simulate",
    "split_models",
    "worst_case_risk",
]

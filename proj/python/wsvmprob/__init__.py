"""Multiclass probability estimation with weighted SVMs."""

from ._core import (
    Model,
    egkl_loss,
    fit,
    gkl_loss,
    l1_error,
    l2_error,
    median_sigma,
    rbf_gram,
    simulate,
    stratified_split,
    true_probs,
)

__all__ = [
    "Model",
    "egkl_loss",
    "fit",
    "gkl_loss",
    "l1_error",
    "l2_error",
    "median_sigma",
    "rbf_gram",
    "simulate",
    "stratified_split",
    "true_probs",
]

"""Functional data regression: basis representations, FPCA, RBF networks and MLPs."""

from ._core import (
    ConfigError,
    Dataset,
    Error,
    MlpModel,
    OlsPath,
    PcaModel,
    RbfnModel,
    Representation,
    dist,
    distance,
    expert_scale,
    fit,
    fit_pca,
    inner,
    knn_impute,
    load_dataset,
    loo_score,
    mean_impute,
    median_pairwise_distance,
    run_experiment,
    select_basis_size,
    suite_configs,
    suite_names,
    train_mlp,
    train_rbfn,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "Error",
    "MlpModel",
    "OlsPath",
    "PcaModel",
    "RbfnModel",
    "Representation",
    "dist",
    "distance",
    "expert_scale",
    "fit",
    "fit_pca",
    "inner",
    "knn_impute",
    "load_dataset",
    "loo_score",
    "mean_impute",
    "median_pairwise_distance",
    "run_experiment",
    "select_basis_size",
    "suite_configs",
    "suite_names",
    "train_mlp",
    "train_rbfn",
]

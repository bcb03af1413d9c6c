"""Asymptotic homology classes of torus trajectories and measured solenoids.

Thin wrapper around the compiled `_acyc` module; see the C++ headers for the
full library surface. The CLI (`acyc`) drives the same pipelines from JSON
configs.
"""

from ._acyc import (  # noqa: F401
    ConfigError,
    DomainError,
    NumericalError,
    StructuralError,
    golden_manifest,
    k_class_t3,
    leaf_class,
    linear_class,
    loop_norm,
    measure_distance,
    run_config,
    stable_norm_flat,
    validate_config,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalError",
    "StructuralError",
    "golden_manifest",
    "k_class_t3",
    "leaf_class",
    "linear_class",
    "loop_norm",
    "measure_distance",
    "run_config",
    "stable_norm_flat",
    "validate_config",
]

"""Steering-dimension witnesses, maps and convex-weight quantifiers."""

from ._core import (
    Error,
    ValidationError,
    UnsupportedError,
    SolverError,
    assemblage_to_measurements,
    certify,
    choi_of,
    depolarizing_kraus,
    entanglement_weight_ppt,
    fourier_mub_measurements,
    incompatibility_weight,
    iso_sn_threshold,
    isotropic,
    measurements_to_assemblage,
    mub_nsim_threshold,
    pvm_nsim_threshold,
    region_table,
    state_to_channel,
    steer,
    steering_weight,
    witness_bound,
    witness_value,
)

__all__ = [
    "Error",
    "ValidationError",
    "UnsupportedError",
    "SolverError",
    "assemblage_to_measurements",
    "certify",
    "choi_of",
    "depolarizing_kraus",
    "entanglement_weight_ppt",
    "fourier_mub_measurements",
    "incompatibility_weight",
    "iso_sn_threshold",
    "isotropic",
    "measurements_to_assemblage",
    "mub_nsim_threshold",
    "pvm_nsim_threshold",
    "region_table",
    "state_to_channel",
    "steer",
    "steering_weight",
    "witness_bound",
    "witness_value",
]

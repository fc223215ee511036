"""Length-restricted Painleve conformal blocks, their discrete matrix model and tau expansions."""
from __future__ import annotations

from .blocks import (
    BlockParams,
    coeff_direct,
    coeff_product_form,
    dress_factor,
    particle_system,
    q_factor,
    weight_w,
)
from .errors import (
    BlocksError,
    DegenerateParameterError,
    DivergenceWarning,
    IllConditionedWarning,
    MissingParameterError,
    NonConvergenceError,
    PoleError,
    TruncationWarning,
)
from .matrixmodel import (
    MeasureSpec,
    RouteResult,
    hankel_det_q0,
    mgf,
    moments,
    partial_sum_direct,
    partial_sum_hankel,
    partition_function_balanced,
)
from .partitions import EMPTY, Partition, enumerate_pairs, hook, hook_product, particle_coords
from .specfun import SeriesControl, barnes_g, gamma, log_barnes_g, log_gamma, pfq, recip_gamma
from .tau import Equation, TauConfig, derive_a, structure_constant, tau_series

__version__ = "0.1.0"

__all__ = [
    "BlockParams",
    "BlocksError",
    "DegenerateParameterError",
    "DivergenceWarning",
    "EMPTY",
    "Equation",
    "IllConditionedWarning",
    "MeasureSpec",
    "MissingParameterError",
    "NonConvergenceError",
    "Partition",
    "PoleError",
    "RouteResult",
    "SeriesControl",
    "TauConfig",
    "TruncationWarning",
    "barnes_g",
    "coeff_direct",
    "coeff_product_form",
    "derive_a",
    "dress_factor",
    "enumerate_pairs",
    "gamma",
    "hankel_det_q0",
    "hook",
    "hook_product",
    "log_barnes_g",
    "log_gamma",
    "mgf",
    "moments",
    "partial_sum_direct",
    "partial_sum_hankel",
    "particle_coords",
    "particle_system",
    "partition_function_balanced",
    "pfq",
    "q_factor",
    "recip_gamma",
    "structure_constant",
    "tau_series",
    "weight_w",
]

"""LSA recursion engine and its exact error decompositions."""

from .engine import (
    build_model,
    decompose,
    error_closed_form,
    fluctuation_closed_forms,
    j1_direct_sum,
    noise_vector,
    run_lsa,
    sample_path,
)
from .models import (
    DECOMPOSITION_COLUMNS,
    AveragingMeta,
    ChainPath,
    Decomposition,
    LsaModel,
    NoiseVector,
)

__all__ = [
    # Models
    "DECOMPOSITION_COLUMNS",
    "AveragingMeta",
    "ChainPath",
    "Decomposition",
    "LsaModel",
    "NoiseVector",
    # Engine
    "build_model",
    "decompose",
    "run_lsa",
    "noise_vector",
    "sample_path",
    # Oracles
    "error_closed_form",
    "fluctuation_closed_forms",
    "j1_direct_sum",
]
